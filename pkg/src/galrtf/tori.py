"""Rank-one tori: Galois structures from biquadratic data, and a finite Poisson model.

The finite model replaces adelic quotients by the unit group A of the ring
R = (Z/N)[t]/(t^2 - d) with involution t -> -t.  The fixed subgroup H plays
T', the set {a / conj(a)} plays S, and a chosen subgroup G of A plays the
rational points.  The coarse identity is then Poisson summation for the
subgroup G H of the finite abelian group A, computed on both sides by
direct summation in exact cyclotomic arithmetic.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .arith import DomainError, QuadAlg, squarefree_part
from .cyclo import Cyclo
from .symspace import reflect


# ---------------------------------------------------------------------------
# classification

SPLIT_TYPE = "split-type"
FIELD = "field"


@dataclass(frozen=True)
class BiquadraticData:
    """M = L (x) E together with its three quadratic subalgebras E, L, Lp."""

    E: QuadAlg
    L: QuadAlg
    Lp: QuadAlg

    @classmethod
    def from_pair(cls, E: QuadAlg, L: QuadAlg) -> "BiquadraticData":
        if E.is_split:
            raise DomainError("E must be a field")
        return cls(E, L, reflect(L, E))

    def __post_init__(self):
        if reflect(self.L, self.E) != self.Lp:
            raise DomainError("Lp must be the reflection of L through E")

    @property
    def tag(self) -> str:
        """'split-type' when M = E x E (L split or L = E), otherwise 'field'."""
        return SPLIT_TYPE if self.L.is_split or self.L == self.E else FIELD

    def cores(self) -> tuple[int, int, int]:
        return (self.E.core, self.L.core, self.Lp.core)


def torus_label(L: QuadAlg, E: QuadAlg | None = None) -> str:
    if L.is_split:
        return "Gm"
    if E is not None and L == E:
        return "Nm1_{E/F}"
    return f"Nm1_{{Q(sqrt({L.core}))/F}}"


@dataclass(frozen=True)
class SymmetricPair:
    """(Res_{E/F} Nm1_{M/E}, Nm1_{L/F}) recorded by E and L."""

    E: QuadAlg
    L: QuadAlg
    tag: str

    @property
    def labels(self) -> tuple[str, str]:
        big = "Res_{E/F} Gm" if self.tag == SPLIT_TYPE else "Res_{E/F} Nm1_{M/E}"
        return big, torus_label(self.L, self.E)

    def as_dict(self) -> dict:
        T, Tp = self.labels
        return {"E": self.E.core, "L": self.L.core, "T": T, "T'": Tp, "M": self.tag}


def classify_structures(M: BiquadraticData) -> tuple[SymmetricPair, SymmetricPair]:
    """The two Galois structures on Res_{E/F} Nm1_{M/E}: one for L, one for Lp."""
    if M.E.is_split:
        raise DomainError("E must be a field")
    return SymmetricPair(M.E, M.L, M.tag), SymmetricPair(M.E, M.Lp, M.tag)


def symmetric_space_of(pair: SymmetricPair) -> QuadAlg:
    """The algebra L' with S = Nm1_{L'/F}: the reflection of the pair's L through E."""
    return reflect(pair.L, pair.E)


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def classification_sweep(count: int = 100, seed: int = 0, bound: int = 30) -> dict:
    """Random (E, L): the partner of each structure's space is the other structure's L."""
    rng = random.Random(seed)
    cores = sorted({squarefree_part(n) for n in range(-bound, bound + 1) if n})
    fields = [c for c in cores if c != 1]
    failures = []
    for _ in range(count):
        E = QuadAlg(rng.choice(fields))
        L = QuadAlg(rng.choice(cores))
        M = BiquadraticData.from_pair(E, L)
        first, second = classify_structures(M)
        ok = (
            symmetric_space_of(first) == M.Lp
            and symmetric_space_of(second) == M.L
            and classify_structures(M) == (first, second)
            and is_square(abs(E.core * L.core * M.Lp.core))
            and E.core * L.core * M.Lp.core > 0
        )
        if not ok:
            failures.append((E.core, L.core))
    return {"count": count, "failures": failures, "passed": not failures}


# ---------------------------------------------------------------------------
# finite abelian groups and their duals

Elem = tuple


class FiniteAbelian:
    """A finite abelian group given by its elements and multiplication."""

    def __init__(self, elements: list, mul: Callable, one):
        self.elements = list(elements)
        self.mul = mul
        self.one = one
        self._index = {g: i for i, g in enumerate(self.elements)}
        if one not in self._index:
            raise DomainError("identity missing")

    def __len__(self):
        return len(self.elements)

    def __contains__(self, g):
        return g in self._index

    def power(self, g, k: int):
        out, base = self.one, g
        while k:
            if k & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            k >>= 1
        return out

    def order(self, g) -> int:
        k, h = 1, g
        while h != self.one:
            h = self.mul(h, g)
            k += 1
        return k

    def exponent(self) -> int:
        return math.lcm(*(self.order(g) for g in self.elements))

    def generated(self, gens) -> frozenset:
        sub = {self.one}
        frontier = [self.one]
        while frontier:
            nxt = []
            for h in frontier:
                for g in gens:
                    x = self.mul(h, g)
                    if x not in sub:
                        sub.add(x)
                        nxt.append(x)
            frontier = nxt
        return frozenset(sub)

    def characters(self) -> tuple[int, list[dict]]:
        """(e, chars): every character as a map g -> k with chi(g) = zeta_e^k.

        Built along a chain 1 = H_0 < H_1 < ... < A, H_i = H_{i-1} <g_i>: a
        character of H_{i-1} extends in exactly m ways, m the order of g_i
        modulo H_{i-1}, by choosing an m-th root of its value on g_i^m.
        """
        e = self.exponent()
        chars = [{self.one: 0}]
        sub = [self.one]
        members = {self.one}
        for g in self.elements:
            if g in members:
                continue
            m, h = 1, g
            while h not in members:
                h = self.mul(h, g)
                m += 1
            # h = g^m lies in the current subgroup
            new_sub = []
            powers = [self.one]
            for _ in range(m - 1):
                powers.append(self.mul(powers[-1], g))
            for j, gj in enumerate(powers):
                for x in sub:
                    new_sub.append((x, j, self.mul(x, gj)))
            new_chars = []
            for chi in chars:
                k = chi[h]
                if k % m:
                    raise DomainError("character value has no m-th root in the exponent")
                for t in range(m):
                    root = (k // m + t * (e // m)) % e
                    ext = {}
                    for x, j, y in new_sub:
                        ext[y] = (chi[x] + j * root) % e
                    new_chars.append(ext)
            chars = new_chars
            sub = [y for _, _, y in new_sub]
            members = set(sub)
        if len(chars) != len(self) or len(members) != len(self):
            raise DomainError("character construction did not exhaust the group")
        return e, chars


# ---------------------------------------------------------------------------
# the finite model

@dataclass
class FiniteTorusModel:
    """Units of (Z/N)[t]/(t^2 - d), the involution t -> -t, and a 'rational' subgroup."""

    N: int
    d: int
    rational_gens: tuple = ()
    group: FiniteAbelian = field(init=False, repr=False)

    def __post_init__(self):
        if self.N < 2:
            raise DomainError("N must be at least 2")
        N, d = self.N, self.d % self.N

        def mul(a, b):
            return ((a[0] * b[0] + d * a[1] * b[1]) % N, (a[0] * b[1] + a[1] * b[0]) % N)

        units = [(x, y) for x in range(N) for y in range(N) if math.gcd((x * x - d * y * y) % N, N) == 1]
        self.group = FiniteAbelian(units, mul, (1 % N, 0))
        for g in self.rational_gens:
            if g not in self.group:
                raise DomainError(f"{g} is not a unit of the model")
        self._chars = None

    def conj(self, a):
        return (a[0], (-a[1]) % self.N)

    def inverse(self, a):
        return self.group.power(a, self.group.order(a) - 1)

    def symmetrize(self, a):
        """a -> a / conj(a), the orbit map onto the model of S."""
        return self.group.mul(a, self.inverse(self.conj(a)))

    @property
    def fixed(self) -> frozenset:
        """The subgroup H = {a = conj(a)}, the model of T'."""
        return frozenset(a for a in self.group.elements if self.conj(a) == a)

    @property
    def rational(self) -> frozenset:
        return self.group.generated(self.rational_gens)

    @property
    def space(self) -> frozenset:
        return frozenset(self.symmetrize(a) for a in self.group.elements)

    @property
    def rational_space(self) -> frozenset:
        """Images of the rational subgroup: the model of the rational points of S in one orbit."""
        return frozenset(self.symmetrize(a) for a in self.rational)

    @property
    def glued(self) -> frozenset:
        """G H, the subgroup against which Poisson summation is taken."""
        H = self.fixed
        return frozenset(self.group.mul(g, h) for g in self.rational for h in H)

    def characters(self):
        if self._chars is None:
            self._chars = self.group.characters()
        return self._chars

    def annihilator(self, sub) -> list[dict]:
        e, chars = self.characters()
        return [chi for chi in chars if all(chi[g] == 0 for g in sub)]

    def cokernel_size(self) -> int:
        """|A / G H|: the number of classes xi in the model."""
        return len(self.group) // len(self.glued)

    def check(self) -> None:
        H = self.fixed
        for a in H:
            for b in H:
                if self.group.mul(a, b) not in H:
                    raise DomainError("fixed points do not form a subgroup")
        for s in self.space:
            if self.group.mul(s, self.conj(s)) != self.group.one:
                raise DomainError("symmetrized elements must satisfy s conj(s) = 1")

    def as_dict(self) -> dict:
        return {
            "N": self.N,
            "d": self.d,
            "order": len(self.group),
            "fixed": len(self.fixed),
            "rational": len(self.rational),
            "rational_space": len(self.rational_space),
            "cokernel": self.cokernel_size(),
        }


def random_model(rng: random.Random, N: int | None = None, d: int | None = None, gens: int = 2) -> FiniteTorusModel:
    N = N if N is not None else rng.randint(3, 16)
    d = d if d is not None else rng.randint(1, N - 1)
    base = FiniteTorusModel(N, d)
    pool = sorted(base.group.elements)
    return FiniteTorusModel(N, d, tuple(rng.choice(pool) for _ in range(gens)))


def match_test_function(model: FiniteTorusModel, f: Mapping, section: str | Mapping | None = None) -> dict:
    """Phi on A whose sums over H-cosets reproduce f on the model of S.

    The canonical choice spreads f(a / conj a) evenly over the coset a H.  A
    ``section`` ('min', 'max', or an explicit coset -> representative map)
    instead puts the whole value on one representative per coset.
    """
    space = model.space
    for s in f:
        if s not in space:
            raise DomainError(f"{s} is not in the image of the orbit map")
    H = model.fixed
    if section is None:
        scale = Fraction(1, len(H))
        return {a: Fraction(f.get(model.symmetrize(a), 0)) * scale for a in model.group.elements}
    cosets = {}
    for a in model.group.elements:
        cosets.setdefault(model.symmetrize(a), []).append(a)
    if isinstance(section, str):
        pick = {"min": min, "max": max}[section]
        reps = {s: pick(members) for s, members in cosets.items()}
    else:
        reps = dict(section)
    Phi = {a: Fraction(0) for a in model.group.elements}
    for s, a in reps.items():
        if model.symmetrize(a) != s:
            raise DomainError(f"{a} does not lie over {s}")
        Phi[a] = Fraction(f.get(s, 0))
    return Phi


def coset_average(model: FiniteTorusModel, Phi: Mapping) -> dict:
    """s -> sum over a H lying over s of Phi."""
    out = {}
    for a in model.group.elements:
        s = model.symmetrize(a)
        out[s] = out.get(s, Fraction(0)) + Fraction(Phi.get(a, 0))
    return out


def fourier(model: FiniteTorusModel, Phi: Mapping, chi: dict, e: int) -> Cyclo:
    """Phi^(chi) = sum_a Phi(a) conj(chi(a))."""
    coeffs = {}
    for a, val in Phi.items():
        if val:
            k = (-chi[a]) % e
            coeffs[k] = coeffs.get(k, Fraction(0)) + Fraction(val)
    return Cyclo(e, coeffs)


@dataclass
class PoissonResult:
    geom: Fraction
    spec: Cyclo
    characters: int

    @property
    def agrees(self) -> bool:
        return self.spec == Cyclo.rational(self.spec.n, self.geom)


def finite_poisson(model: FiniteTorusModel, f: Mapping, section=None) -> PoissonResult:
    """geom = sum over the rational points of S of f; spec = (|GH| / |A|) sum_{chi on A/GH} Phi^(chi)."""
    model.check()
    geom = sum((Fraction(f.get(s, 0)) for s in model.rational_space), Fraction(0))
    Phi = match_test_function(model, f, section)
    glued = model.glued
    e, _ = model.characters()
    dual = model.annihilator(glued)
    spec = Cyclo(e)
    for chi in dual:
        spec = spec + fourier(model, Phi, chi, e)
    spec = spec * Fraction(len(glued), len(model.group))
    return PoissonResult(geom, spec, len(dual))


def poisson_sweep(count: int = 20, seed: int = 0, N_values=None) -> dict:
    """Randomized models and random rational f; geom = spec exactly in each."""
    rng = random.Random(seed)
    rows = []
    for i in range(count):
        N = N_values[i % len(N_values)] if N_values else None
        model = random_model(rng, N)
        space = sorted(model.space)
        f = {s: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for s in space}
        section = rng.choice([None, "min", "max"])
        res = finite_poisson(model, f, section)
        rows.append({**model.as_dict(), "section": section, "geom": str(res.geom),
                     "characters": res.characters, "agrees": res.agrees})
    return {"models": rows, "passed": all(r["agrees"] for r in rows)}
