"""Polyhedral cones and the truncation indicator functions built from them.

Cones live in Q^n (n <= 2) and are given by generators; all membership
tests are exact. The indicator functions are written as the general face
sums and specialized only through the choice of chamber system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Sequence

from .arith import DomainError, frac

Vector = tuple[Fraction, ...]


def _vec(v, n: int) -> Vector:
    if not isinstance(v, (tuple, list)):
        v = (v,)
    if len(v) != n:
        raise DomainError(f"expected a vector of length {n}, got {v!r}")
    return tuple(c if type(c) is Fraction else frac(c) for c in v)


def _dot(u: Vector, v: Vector) -> Fraction:
    if len(u) == 1:
        return u[0] * v[0]
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def _sub(u: Vector, v: Vector) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def _scale(c, v: Vector) -> Vector:
    return tuple(c * a for a in v)


def _is_zero(v: Vector) -> bool:
    return all(a == 0 for a in v)


def _rank(vectors: Sequence[Vector]) -> int:
    rows = [list(v) for v in vectors if not _is_zero(v)]
    if not rows:
        return 0
    n = len(rows[0])
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col] / rows[r][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
    return r


def _solve(cols: Sequence[Vector], v: Vector) -> list[Fraction] | None:
    """Exact coefficients c with sum c_i cols_i = v, for independent cols; None if none exist."""
    k, n = len(cols), len(v)
    aug = [[cols[j][i] for j in range(k)] + [v[i]] for i in range(n)]
    r = 0
    pivots = []
    for col in range(k):
        piv = next((i for i in range(r, n) if aug[i][col] != 0), None)
        if piv is None:
            return None
        aug[r], aug[piv] = aug[piv], aug[r]
        pv = aug[r][col]
        aug[r] = [a / pv for a in aug[r]]
        for i in range(n):
            if i != r and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
    if any(aug[i][k] != 0 for i in range(r, n)):
        return None
    return [aug[i][k] for i in range(k)]


class Cone:
    """The cone of nonnegative combinations of finitely many rational vectors."""

    def __init__(self, generators: Iterable, ambient_dim: int):
        self.n = ambient_dim
        gens: list[Vector] = []
        for g in generators:
            g = _vec(g, ambient_dim)
            if _is_zero(g):
                continue
            if any(self._positive_multiple(g, h) for h in gens):
                continue
            gens.append(g)
        self.generators: tuple[Vector, ...] = tuple(gens)
        self._faces: list[Cone] | None = None
        self._dual: Cone | None = None
        self._dim: int | None = None

    @staticmethod
    def _positive_multiple(g: Vector, h: Vector) -> bool:
        c = _solve([h], g)
        return c is not None and c[0] > 0

    # basic structure -----------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "Cone":
        return cls([], n)

    @classmethod
    def whole(cls, n: int) -> "Cone":
        basis = [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
        return cls(basis + [_scale(-1, b) for b in basis], n)

    @property
    def dim(self) -> int:
        if self._dim is None:
            self._dim = _rank(self.generators)
        return self._dim

    def contains(self, v) -> bool:
        """Membership via the inequalities of the dual cone (a closed cone is its double dual)."""
        if self.n > 2:
            return self.contains_by_generators(v)
        v = _vec(v, self.n)
        return all(_dot(d, v) >= 0 for d in self.dual().generators)

    def contains_by_generators(self, v) -> bool:
        """Membership by solving for nonnegative coefficients on independent generator subsets."""
        v = _vec(v, self.n)
        if _is_zero(v):
            return True
        for k in range(1, self.n + 1):
            for subset in combinations(self.generators, k):
                if _rank(subset) < k:
                    continue
                c = _solve(subset, v)
                if c is not None and all(x >= 0 for x in c):
                    return True
        return False

    def __contains__(self, v) -> bool:
        return self.contains(v)

    def issubset(self, other: "Cone") -> bool:
        return all(other.contains_by_generators(g) for g in self.generators)

    def __eq__(self, other):
        return isinstance(other, Cone) and self.n == other.n and self.issubset(other) and other.issubset(self)

    def __hash__(self):
        return hash((self.n, self.dim))

    def span(self) -> "Cone":
        return Cone(list(self.generators) + [_scale(-1, g) for g in self.generators], self.n)

    def __add__(self, other: "Cone") -> "Cone":
        return Cone(self.generators + other.generators, self.n)

    def dual(self) -> "Cone":
        """{v : <v, c> >= 0 for all c in the cone}."""
        if self._dual is None:
            self._dual = self._compute_dual()
        return self._dual

    def _compute_dual(self) -> "Cone":
        cands: list[Vector] = []
        basis = [tuple(Fraction(int(i == j)) for j in range(self.n)) for i in range(self.n)]
        cands += basis + [_scale(-1, b) for b in basis]
        for g in self.generators:
            cands += [g, _scale(-1, g)]
            if self.n == 2:
                perp = (-g[1], g[0])
                cands += [perp, _scale(-1, perp)]
        if self.n > 2:
            raise DomainError("dual cones are implemented for ambient dimension <= 2")
        ok = [c for c in cands if all(_dot(c, g) >= 0 for g in self.generators)]
        return Cone(ok, self.n)

    def faces(self) -> list["Cone"]:
        """All faces, each computed as C intersected with u-perp for u in the dual."""
        if self._faces is None:
            dual_gens = self.dual().generators
            found: list[Cone] = []
            for k in range(len(dual_gens) + 1):
                for subset in combinations(dual_gens, k):
                    u = tuple(sum(col, Fraction(0)) for col in zip(*subset)) if subset else (Fraction(0),) * self.n
                    face = Cone([g for g in self.generators if _dot(u, g) == 0], self.n)
                    if face not in found:
                        found.append(face)
            found.sort(key=lambda f: f.dim)
            self._faces = found
        return list(self._faces)

    def is_face_of(self, other: "Cone") -> bool:
        return any(self == f for f in other.faces())

    def rint_contains(self, v) -> bool:
        """Membership in the relative interior; rint{0} = {0}."""
        v = _vec(v, self.n)
        if not self.contains(v):
            return False
        # a face of full dimension is the cone itself
        return not any(f.contains(v) for f in self.faces() if f.dim < self.dim)

    def __repr__(self):
        gens = ", ".join("(" + ", ".join(str(c) for c in g) + ")" for g in self.generators)
        return f"Cone[{gens}]"


def angle_cone(F: Cone, C: Cone) -> Cone:
    """A(F, C) = span(F) + C for a face F of C."""
    if not F.is_face_of(C):
        raise DomainError(f"{F} is not a face of {C}")
    return F.span() + C


def dual_cone(C: Cone) -> Cone:
    return C.dual()


@dataclass(frozen=True)
class IndicatorFn:
    """Pointwise {0,1}-valued (or signed combination) function on Q^n."""

    evaluator: Callable[..., int]
    name: str = ""

    def __call__(self, *args) -> int:
        return self.evaluator(*args)


def rint_indicator(C: Cone) -> IndicatorFn:
    return IndicatorFn(lambda H: int(C.rint_contains(H)), f"[rint {C}]")


def sign_between(small: Cone, big: Cone) -> int:
    """(-1)^(dim big - dim small) for nested cones."""
    return -1 if (big.dim - small.dim) % 2 else 1


# ---------------------------------------------------------------------------
# chamber systems

@dataclass
class ChamberSystem:
    """Standard parabolic labels with the closed positive chambers of their split components."""

    ambient_dim: int
    chambers: dict[str, Cone] = field(default_factory=dict)
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    def _cached(self, key, build):
        if key not in self._memo:
            self._memo[key] = build()
        return self._memo[key]

    def closure(self, P: str) -> Cone:
        try:
            return self.chambers[P]
        except KeyError:
            raise DomainError(f"unknown parabolic label {P!r}") from None

    def contains(self, P: str, Q: str) -> bool:
        """P is contained in Q iff the chamber of Q is a face of the chamber of P."""
        return self._cached(("contains", P, Q), lambda: self.closure(Q).is_face_of(self.closure(P)))

    def _check(self, P: str, Q: str) -> None:
        if not self.contains(P, Q):
            raise DomainError(f"{P} is not contained in {Q}")

    def labels(self) -> list[str]:
        return list(self.chambers)

    def parabolics_between(self, P: str, Q: str) -> list[str]:
        return [R for R in self.chambers if self.contains(P, R) and self.contains(R, Q)]

    def split_space(self, P: str) -> Cone:
        return self._cached(("span", P), lambda: self.closure(P).span())

    def epsilon(self, P: str, Q: str) -> int:
        """(-1)^(dim a_P^Q)."""
        self._check(P, Q)
        return sign_between(self.split_space(Q), self.split_space(P))

    def angle(self, P: str, Q: str) -> Cone:
        self._check(P, Q)
        return self._cached(("angle", P, Q), lambda: angle_cone(self.closure(Q), self.closure(P)))

    def _v(self, H) -> Vector:
        return _vec(H, self.ambient_dim)

    def tau(self, P: str, Q: str) -> IndicatorFn:
        return self._cached(("tau", P, Q), lambda: self._tau(P, Q))

    def _tau(self, P: str, Q: str) -> IndicatorFn:
        A = self.angle(P, Q)
        return IndicatorFn(lambda H: int(A.rint_contains(self._v(H))), f"tau_{P}^{Q}")

    def tau_hat(self, P: str, Q: str) -> IndicatorFn:
        return self._cached(("tau_hat", P, Q), lambda: self._tau_hat(P, Q))

    def _tau_hat(self, P: str, Q: str) -> IndicatorFn:
        D = self.angle(P, Q).dual()
        return IndicatorFn(lambda H: int(D.rint_contains(self._v(H))), f"tauhat_{P}^{Q}")

    def sigma(self, P1: str, P2: str) -> IndicatorFn:
        """sum over faces E of F of sign * [rint A(E, C)] [rint E^dual], F = chamber(P2), C = chamber(P1)."""
        self._check(P1, P2)
        return self._cached(("sigma", P1, P2), lambda: self._sigma(P1, P2))

    def _sigma(self, P1: str, P2: str) -> IndicatorFn:
        F, C = self.closure(P2), self.closure(P1)
        terms = []
        for E in F.faces():
            terms.append((sign_between(E, F), angle_cone(E, C), E.dual()))

        def ev(H):
            H = self._v(H)
            return sum(s * int(A.rint_contains(H)) * int(D.rint_contains(H)) for s, A, D in terms)

        return IndicatorFn(ev, f"sigma_{P1}^{P2}")

    def gamma(self, P: str, Q: str) -> IndicatorFn:
        """Two-variable alternating face sum over the faces F of C = A(chamber Q, chamber P)."""
        return self._cached(("gamma", P, Q), lambda: self._gamma(P, Q))

    def _gamma(self, P: str, Q: str) -> IndicatorFn:
        C = self.angle(P, Q)
        faces = C.faces()
        F0 = faces[0]
        terms = [(sign_between(F0, F), angle_cone(F, C), F.dual()) for F in faces]

        def ev(H, X):
            H, X = self._v(H), self._v(X)
            HX = _sub(H, X)
            return sum(s * int(A.rint_contains(H)) * int(D.rint_contains(HX)) for s, A, D in terms)

        return IndicatorFn(ev, f"Gamma_{P}^{Q}")

    # projections onto a_R and its orthogonal complement
    def _orthogonal_basis(self, R: str) -> list[Vector]:
        basis: list[Vector] = []
        for g in self.split_space(R).generators:
            w = g
            for b in basis:
                w = _sub(w, _scale(_dot(w, b) / _dot(b, b), b))
            if not _is_zero(w):
                basis.append(w)
        return basis

    def project(self, R: str, H) -> tuple[Vector, Vector]:
        """(H_R, H^R): components in a_R and in its orthogonal complement."""
        H = self._v(H)
        basis = self._cached(("basis", R), lambda: self._orthogonal_basis(R))
        HR = (Fraction(0),) * self.ambient_dim
        for b in basis:
            HR = tuple(x + y for x, y in zip(HR, _scale(_dot(H, b) / _dot(b, b), b)))
        return HR, _sub(H, HR)


def sl2_chambers() -> ChamberSystem:
    """Rank-one system: a_B = Q with positive chamber Q_{>0}, a_G = {0}."""
    return ChamberSystem(1, {"B": Cone([(1,)], 1), "G": Cone.zero(1)})


def absorption_sides(system: ChamberSystem, P: str, H, X) -> tuple[int, int]:
    """Both sides of tauhat_P(H - X) = sum_R eps_R^G tauhat_P^R(H^R) Gamma_R^G(H_R, X_R)."""
    top = _top_label(system)
    Hv, Xv = system._v(H), system._v(X)
    lhs = system.tau_hat(P, top)(_sub(Hv, Xv))
    rhs = 0
    for R in system.parabolics_between(P, top):
        H_R, H_upper = system.project(R, Hv)
        X_R, _ = system.project(R, Xv)
        rhs += system.epsilon(R, top) * system.tau_hat(P, R)(H_upper) * system.gamma(R, top)(H_R, X_R)
    return lhs, rhs


def contraction_sides(system: ChamberSystem, P1: str, P: str, H) -> tuple[int, int]:
    """Both sides of tau_{P1}^P tauhat_P = sum_{P2 containing P} sigma_{P1}^{P2}."""
    top = _top_label(system)
    lhs = system.tau(P1, P)(H) * system.tau_hat(P, top)(H)
    rhs = sum(system.sigma(P1, P2)(H) for P2 in system.labels() if system.contains(P, P2))
    return lhs, rhs


def _top_label(system: ChamberSystem) -> str:
    tops = [P for P in system.labels() if system.closure(P).dim == 0]
    if len(tops) != 1:
        raise DomainError("chamber system needs a unique top parabolic")
    return tops[0]


def rational_grid(lo, hi, count: int) -> list[Fraction]:
    """count evenly spaced rationals in [lo, hi], always including 0 when it lies inside."""
    lo, hi = frac(lo), frac(hi)
    step = (hi - lo) / (count - 1)
    pts = [lo + k * step for k in range(count)]
    if lo <= 0 <= hi and Fraction(0) not in pts:
        pts[min(range(count), key=lambda i: abs(pts[i]))] = Fraction(0)
    return pts
