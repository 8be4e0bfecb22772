"""Fine geometric expansion: J^T_o(f) for elliptic, regular semisimple and unipotent data.

Global volumes are symbolic with numeric defaults of 1 (see ``Volumes``).
Each report keeps the volume symbol next to the numeric factor so that
identities that only hold up to a volume can be compared formally.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .arith import (DomainError, QuadAlg, QuadraticCharacter, factorize, frac, hilbert_symbol,
                    quadratic_characters_unramified_outside)
from .heights import AdelicPoint, psi_T_quadrature
from .integrals import derive_fx, kappa_average, richardson_even, tate_zeta_global, zeta_sderivative
from .orbital import (_bounds, _gauss_legendre, global_orbital, levi_local, split_profile_finite,
                      split_profile_real, weighted_orbital)
from .symspace import (ELLIPTIC, RSS, UNIP_MINUS, UNIP_PLUS, GeomDatum, Mat2, XPoint, classify, elliptic_rep,
                       slice_discriminant)
from .testfns import REAL, GlobalTestFn


@dataclass
class Volumes:
    """Global volumes, carried as named symbols with overridable numeric values."""

    sl2: float = 1.0
    gm1: float = 1.0
    mb1: float = 1.0
    torus: float = 1.0

    SYMBOLS = {"sl2": "vol[SL2]", "gm1": "vol[Gm]^1", "mb1": "vol[M_B']^1", "torus": "vol[T_eta]"}

    def value(self, key: str) -> float:
        return getattr(self, key)


@dataclass
class AffineInT:
    constant: float
    slope: float

    def __call__(self, T: float) -> float:
        return self.constant + self.slope * T

    def as_dict(self) -> dict:
        return {"constant": self.constant, "slope": self.slope}


@dataclass
class Term:
    label: str
    volume: str  # key into Volumes
    numeric: float
    slope: float = 0.0

    def value(self, vols: Volumes) -> float:
        return vols.value(self.volume) * self.numeric

    def as_dict(self, vols: Volumes) -> dict:
        return {
            "label": self.label,
            "volume": Volumes.SYMBOLS[self.volume],
            "numeric": self.numeric,
            "value": self.value(vols),
            "slope": vols.value(self.volume) * self.slope,
        }


@dataclass
class ExpansionReport:
    datum: GeomDatum
    terms: list
    record: AffineInT
    volumes: Volumes = field(default_factory=Volumes)
    diagnostics: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return sum(t.value(self.volumes) for t in self.terms)

    def as_dict(self) -> dict:
        return {
            "datum": self.datum.as_dict(),
            "terms": [t.as_dict(self.volumes) for t in self.terms],
            "total": self.total,
            "affine_in_T": self.record.as_dict(),
            "diagnostics": self.diagnostics,
        }


# ---------------------------------------------------------------------------
# fibers and descent

def iota_fiber(d: GeomDatum, E: QuadAlg) -> list[XPoint]:
    """Diagonal points of the datum: [], [+-1], or [diag(x, conj x), diag(conj x, x)]."""
    tau = E.core
    if d.cls == ELLIPTIC:
        return []
    if d.cls == UNIP_PLUS:
        return [XPoint.identity(tau)]
    if d.cls == UNIP_MINUS:
        return [-XPoint.identity(tau)]
    y = _rational_sqrt(slice_discriminant(d.t0, tau))
    return [XPoint.make(tau, d.t0, y, 0, 0), XPoint.make(tau, d.t0, -y, 0, 0)]


def _rational_sqrt(q: Fraction) -> Fraction:
    q = frac(q)
    n, m = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if q < 0 or n * n != q.numerator or m * m != q.denominator:
        raise DomainError(f"{q} is not a rational square")
    return Fraction(n, m)


def _places_of(f: GlobalTestFn, values: Iterable) -> list[int]:
    primes = set(f.S) | {2}
    for q in values:
        q = frac(q)
        for n in (q.numerator, q.denominator):
            if n not in (0, 1, -1):
                primes |= {p for p, _ in factorize(n)}
    return [REAL] + sorted(primes)


def levi_descend(f: GlobalTestFn, eta: XPoint) -> dict:
    """Per-place factors of f_M at the diagonal point eta; the global value is their product."""
    if eta.b != 0 or eta.c != 0:
        raise DomainError("levi_descend needs a diagonal point")
    return {v: levi_local(f.at(v), eta.u, eta.v, f.tau) for v in _places_of(f, (eta.u, eta.v))}


def f_M(f: GlobalTestFn, eta: XPoint) -> float:
    return math.prod(float(x) for x in levi_descend(f, eta).values())


# ---------------------------------------------------------------------------
# elliptic terms

def _norm_classes(delta: Fraction, primes: list[int]) -> list[Fraction]:
    """Representatives xi of Q^x / Nm(Q(sqrt delta)^x) supported on ``primes`` and -1."""
    reps, seen = [], set()
    places = [0] + primes
    for sign in (1, -1):
        for mask in itertools.product((0, 1), repeat=len(primes)):
            xi = Fraction(sign)
            for p, m in zip(primes, mask):
                if m:
                    xi *= p
            key = tuple(hilbert_symbol(xi, delta, v) for v in places)
            if key not in seen:
                seen.add(key)
                reps.append(xi)
    return reps


def assemble_elliptic(d: GeomDatum, f: GlobalTestFn, volumes: Volumes | None = None,
                      depth: int = 4) -> ExpansionReport:
    """sum over rational orbits eta_xi of vol[T_eta] prod_v O_v(f_v, eta_xi); slope 0."""
    volumes = volumes or Volumes()
    if d.cls != ELLIPTIC:
        raise DomainError("assemble_elliptic needs an elliptic datum")
    tau = f.tau
    delta = slice_discriminant(d.t0, tau)
    primes = sorted({p for p in _places_of(f, (d.t0, delta)) if p != REAL})
    terms, diag = [], {"classes": [], "places": primes}
    for xi in _norm_classes(delta, primes):
        eta = elliptic_rep(d.t0, tau, xi)
        glob = global_orbital(f, eta, depth, extra=primes)
        diag["classes"].append({
            "xi": str(xi),
            "value": glob.value,
            "stabilized": glob.stabilized,
            "local": {str(v): r.as_dict() for v, r in glob.local.items()},
        })
        if glob.value != 0:
            terms.append(Term(f"orbit xi={xi}", "torus", glob.value))
    const = sum(t.value(volumes) for t in terms)
    return ExpansionReport(d, terms, AffineInT(const, 0.0), volumes, diag)


# ---------------------------------------------------------------------------
# regular semisimple terms

def assemble_rss(d: GeomDatum, f: GlobalTestFn, volumes: Volumes | None = None) -> ExpansionReport:
    """constant -2 vol * int f(x^{-1} eta x) v(x) dx, slope 4 vol * int f(x^{-1} eta x) dx."""
    volumes = volumes or Volumes()
    if d.cls != RSS:
        raise DomainError("assemble_rss needs a regular semisimple non-elliptic datum")
    eta = iota_fiber(d, QuadAlg(f.tau))[0]
    w = weighted_orbital(f, eta, extra=_places_of(f, (d.t0, eta.v))[1:])
    terms = [
        Term("weighted orbital integral", "mb1", -2 * w.weighted),
        Term("4T x orbital integral (slope)", "mb1", 0.0, slope=4 * w.value),
    ]
    vol = volumes.mb1
    diag = {"local": {str(v): x for v, x in w.local.items()},
            "local_weights": {str(v): x for v, x in w.local_weights.items()},
            "eta": [str(c) for c in eta.coords]}
    return ExpansionReport(d, terms, AffineInT(-2 * vol * w.weighted, 4 * vol * w.value), volumes, diag)


def rss_JT_direct(f: GlobalTestFn, eta: XPoint, T: float, volumes: Volumes | None = None,
                  n: int = 24, panels: int = 8) -> float:
    """vol * int f(x^{-1} eta x) [int psi^T(a x) da] dx with the inner integral by root finding.

    x runs over N(A) K; the psi^T integral depends only on the unipotent part,
    which is assembled as an adelic point from the finite cells and the real nodes.
    """
    volumes = volumes or Volumes()
    places = _places_of(f, (eta.u, eta.v))
    finite = [v for v in places if v != REAL]
    cells = {p: split_profile_finite(f.at(p), f.tau, eta.u, eta.v, refine=True) for p in finite}
    if any(not c for c in cells.values()):
        return 0.0
    U, g = split_profile_real(f.at(REAL), eta.u, float(eta.v))
    if g is None:
        return 0.0
    xs, ws = _gauss_legendre(-U, U, n, panels)
    gv = g(xs)
    total = 0.0
    for combo in itertools.product(*(cells[p] for p in finite)):
        weight = math.prod(float(val * vol) for _, val, vol in combo)
        entries = {p: Mat2(Fraction(1), u, Fraction(0), Fraction(1)) for p, (u, _, _) in zip(finite, combo)}
        for x, wx_, gx in zip(xs, ws, gv):
            if gx == 0:
                continue
            entries[REAL] = Mat2(1.0, float(x), 0.0, 1.0)
            total += weight * wx_ * gx * psi_T_quadrature(AdelicPoint(dict(entries)), T)
    return volumes.mb1 * total


# ---------------------------------------------------------------------------
# unipotent terms

def _sign_point(tau: int, minus: bool) -> XPoint:
    return -XPoint.identity(tau) if minus else XPoint.identity(tau)


def unipotent_characters(f: GlobalTestFn, extra: Iterable[int] = ()) -> list[QuadraticCharacter]:
    """Nontrivial quadratic characters with conductor supported on S(f), 2 and ``extra``."""
    return quadratic_characters_unramified_outside(set(f.S) | {2} | set(extra), include_trivial=False)


@dataclass
class UnipotentPieces:
    lines: dict
    residue: float
    derivative: float
    derivative_error: float
    kappa_terms: list


def _unipotent_pieces(f: GlobalTestFn, minus: bool, vol_gm: float, kappas, tol: float = 1e-6) -> UnipotentPieces:
    triv = QuadraticCharacter(1)
    lines = kappa_average(f, triv, minus)
    residue = tate_zeta_global(lines, triv, 1, vol_gm).residue

    def Z(s):
        return tate_zeta_global(lines, triv, s, vol_gm).value

    deriv, err = zeta_sderivative(Z, tol=tol)
    kterms = []
    for kap in kappas:
        kl = kappa_average(f, kap, minus)
        kterms.append((kap, float(np.real(tate_zeta_global(kl, kap, 1, vol_gm).value))))
    return UnipotentPieces(lines, residue, deriv, err, kterms)


def assemble_unipotent(minus: bool, f: GlobalTestFn, kappas=None, volumes: Volumes | None = None,
                       pieces: UnipotentPieces | None = None, tol: float = 1e-6) -> ExpansionReport:
    """vol[SL2] f(+-1) + sum_kappa Z(f^kappa, kappa |.|) + d/ds s Z(f_K, |.|^{1+s}) at 0; slope vol[Gm]^1 hat f_K(0)."""
    volumes = volumes or Volumes()
    kappas = unipotent_characters(f) if kappas is None else kappas
    pieces = pieces or _unipotent_pieces(f, minus, 1.0, kappas, tol)
    tau = f.tau
    f1 = float(f.evaluate_rational(_sign_point(tau, minus)))
    terms = [Term("f(-1)" if minus else "f(1)", "sl2", f1)]
    for kap, z in pieces.kappa_terms:
        terms.append(Term(f"Z(f^kappa, kappa|.|), D={kap.D}", "gm1", z))
    terms.append(Term("d/ds s Z(f_K, |.|^(1+s)) at s=0", "gm1", pieces.derivative, slope=pieces.residue))
    const = sum(t.value(volumes) for t in terms)
    datum = classify(-1 if minus else 1, QuadAlg(tau))
    diag = {"derivative_error": pieces.derivative_error, "characters": [k.D for k, _ in pieces.kappa_terms]}
    return ExpansionReport(datum, terms, AffineInT(const, volumes.gm1 * pieces.residue), volumes, diag)


def unipotent_JT_direct(minus: bool, f: GlobalTestFn, T: float, kappas=None, volumes: Volumes | None = None,
                        tol: float = 1e-7) -> tuple[float, float]:
    """J^T through the bracket lim_{s->0} [Z(f_K, |.|^{1+s}) - vol hat f_K(0) e^{-sT} / s]."""
    volumes = volumes or Volumes()
    kappas = unipotent_characters(f) if kappas is None else kappas
    triv = QuadraticCharacter(1)
    lines = kappa_average(f, triv, minus)
    R = tate_zeta_global(lines, triv, 1, volumes.gm1).residue

    def bracket(s):
        return tate_zeta_global(lines, triv, 1 + s, volumes.gm1).value - R * math.exp(-s * T) / s

    lim, err = richardson_even(bracket, h=0.1, tol=tol)
    total = volumes.sl2 * float(f.evaluate_rational(_sign_point(f.tau, minus))) + lim
    for kap in kappas:
        total += float(np.real(tate_zeta_global(kappa_average(f, kap, minus), kap, 1, volumes.gm1).value))
    return total, err


def cancellation_bracket(f: GlobalTestFn, T: float, ks=range(1, 6), minus: bool = False,
                         volumes: Volumes | None = None) -> list[float]:
    """[Z(f_K, |.|^{1+s}) - vol hat f_K(0) e^{-sT}/s] at s = +-10^{-k}, averaged over the two signs."""
    volumes = volumes or Volumes()
    triv = QuadraticCharacter(1)
    lines = kappa_average(f, triv, minus)
    R = tate_zeta_global(lines, triv, 1, volumes.gm1).residue
    out = []
    for k in ks:
        s = 10.0 ** (-k)
        vals = [tate_zeta_global(lines, triv, 1 + t, volumes.gm1).value - R * math.exp(-t * T) / t for t in (s, -s)]
        out.append(0.5 * (vals[0] + vals[1]))
    return out


def assemble(d: GeomDatum, f: GlobalTestFn, volumes: Volumes | None = None, depth: int = 4,
             tol: float = 1e-6) -> ExpansionReport:
    """Dispatch on the class of d."""
    if d.cls == ELLIPTIC:
        return assemble_elliptic(d, f, volumes, depth)
    if d.cls == RSS:
        return assemble_rss(d, f, volumes)
    return assemble_unipotent(d.cls == UNIP_MINUS, f, volumes=volumes, tol=tol)


# ---------------------------------------------------------------------------
# slope cross-check

@dataclass
class SlopeCheck:
    slope: float
    descent: float
    ratio: float | None
    conclusive: bool


def slope_crosscheck(d: GeomDatum, f: GlobalTestFn, volumes: Volumes | None = None) -> SlopeCheck:
    """Assembled slope against sum over the diagonal fiber of vol[M_B']^1 f_M(eta)."""
    volumes = volumes or Volumes()
    E = QuadAlg(f.tau)
    fiber = iota_fiber(d, E)
    if d.cls == ELLIPTIC:
        return SlopeCheck(0.0, 0.0, None, True)
    if d.cls == RSS:
        slope = assemble_rss(d, f, volumes).record.slope
    else:
        minus = d.cls == UNIP_MINUS
        triv = QuadraticCharacter(1)
        slope = volumes.gm1 * tate_zeta_global(kappa_average(f, triv, minus), triv, 1).residue
    descent = sum(volumes.mb1 * f_M(f, eta) for eta in fiber)
    if abs(descent) < 1e-14:
        return SlopeCheck(slope, descent, None, False)
    return SlopeCheck(slope, descent, slope / descent, True)


# ---------------------------------------------------------------------------
# truncated kernels

def _primitive_pairs(bound: int):
    """Primitive (m, n) up to sign with |m|, |n| <= bound."""
    for m in range(0, bound + 1):
        for n in range(-bound, bound + 1):
            if math.gcd(m, n) != 1:
                continue
            if m == 0 and n != 1:
                continue
            yield m, n


def _sl2_with_bottom(m: int, n: int) -> Mat2:
    """An integer matrix of determinant 1 with bottom row (m, n)."""
    if m == 0:
        return Mat2(Fraction(n), Fraction(0), Fraction(0), Fraction(n))
    # a n - b m = 1
    g, a, b = _ext_gcd(n, -m)
    return Mat2(Fraction(a), Fraction(b), Fraction(m), Fraction(n))


def _ext_gcd(a: int, b: int):
    """(g, x, y) with a x + b y = g = gcd(a, b) = 1 for coprime inputs."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _denominator(f: GlobalTestFn) -> int:
    """D with f supported on Y0 in (1/D) * (integral points) at every finite place."""
    D = 1
    for p in f.S:
        D *= p ** f.at(p).radius_exp
    return D


def _eval_at(f: GlobalTestFn, x_real: Mat2, Y0: tuple, u=1) -> float:
    """f_inf(x^{-1} (u, Y0) x) times the finite values at (u, Y0)."""
    tau = f.tau
    finite = 1
    pt = XPoint(tau, frac(u), *(frac(e) for e in Y0))
    primes = set(f.S) | {2}
    for e in Y0:
        q = frac(e)
        if q.denominator > 1:
            primes |= {p for p, _ in factorize(q.denominator)}
    for p in primes:
        finite *= f.at(p)(pt)
        if finite == 0:
            return 0.0
    fl = XPoint(tau, float(u), *(float(e) for e in Y0)).conjugate(x_real)
    return float(finite) * f.at(REAL)(fl)


def _real_bound(f: GlobalTestFn, x: Mat2) -> float:
    center, half, B = _bounds(f.at(REAL))
    norm2 = sum(float(e) ** 2 for e in x.entries())
    return norm2 * math.sqrt(2 * B[1] ** 2 + B[2] ** 2 + B[3] ** 2)


@dataclass
class KernelReport:
    direct: float
    rewritten: float
    truncation: float
    bound: float
    terms: int

    @property
    def difference(self) -> float:
        return abs(self.direct - self.rewritten)


def unipotent_kernel_direct(f: GlobalTestFn, x: Mat2, bound: float | None = None) -> tuple[float, int]:
    """sum over rational points (1, Y0) of o+ of f(x^{-1} (1, Y0) x), by brute force over (b, c)."""
    D = _denominator(f)
    bound = _real_bound(f, x) if bound is None else bound
    M = int(math.floor(bound * D)) + 1
    total = _eval_at(f, x, (0, 0, 0))
    count = 1
    for B in range(-M, M + 1):
        for C in range(-M, M + 1):
            if B == 0 and C == 0:
                continue
            sq = -B * C
            if sq < 0:
                continue
            r = math.isqrt(sq)
            if r * r != sq:
                continue
            for V in {r, -r}:
                count += 1
                total += _eval_at(f, x, (Fraction(V, D), Fraction(B, D), Fraction(C, D)))
    return total, count


def unipotent_kernel_rewritten(f: GlobalTestFn, x: Mat2, bound: float | None = None) -> tuple[float, int]:
    """f(1) + sum over [m : n] in P^1(Q) and b in Q^x of f(x^{-1} d^{-1} n(sqrt(tau) b) theta(n)^{-1} d x)."""
    D = _denominator(f)
    bound = _real_bound(f, x) if bound is None else bound
    total = _eval_at(f, x, (0, 0, 0))
    count = 1
    # b runs over (1/2D) Z; entries of 2b [[mn, n^2], [-m^2, -mn]] bound |2b| max(m^2, n^2)
    mmax = int(math.isqrt(int(bound * D))) + 1
    for m, n in _primitive_pairs(mmax):
        bmax = int(math.floor(bound * D / max(m * m, n * n))) + 1
        for j in range(-bmax, bmax + 1):
            if j == 0:
                continue
            b = Fraction(j, 2 * D)
            Y0 = (2 * b * m * n, 2 * b * n * n, -2 * b * m * m)
            count += 1
            total += _eval_at(f, x, Y0)
    return total, count


def unipotent_constant_term(f: GlobalTestFn, delta: Mat2, x: Mat2) -> float:
    """hat f_{delta x}(0) = prod_v int f_{delta x, v}(b) db for delta in SL2(Z)."""
    tau = f.tau
    value = derive_fx(f.at(REAL), delta.map(float) * x, tau).integral()
    for p in sorted(set(f.S) | {2}):
        value *= float(derive_fx(f.at(p), delta, tau).integral())
    return value


def eval_truncated_kernel(f: GlobalTestFn, d: GeomDatum, x: Mat2, T: float,
                          bound: float | None = None) -> KernelReport:
    """Unipotent-plus truncated kernel at a real point x: direct vs rewritten forms.

    Both sides subtract sum_delta [H(delta x) > T] hat f_{delta x}(0); the rows
    with H(delta x) > T are those with |(m, n) x| < e^{-T}.
    """
    if d.cls != UNIP_PLUS:
        raise DomainError("the kernel comparison is implemented for the unipotent-plus datum")
    bound = _real_bound(f, x) if bound is None else bound
    direct, nd = unipotent_kernel_direct(f, x, bound)
    rewritten, nr = unipotent_kernel_rewritten(f, x, bound)
    trunc = 0.0
    limit = math.exp(-T)
    xf = x.map(float)
    rmax = int(math.ceil(limit * math.sqrt(sum(e * e for e in x.map(float).inverse().entries())))) + 1
    for m, n in _primitive_pairs(rmax):
        row = (m * xf.a + n * xf.c, m * xf.b + n * xf.d)
        if math.hypot(*row) < limit:
            trunc += unipotent_constant_term(f, _sl2_with_bottom(m, n), x)
    return KernelReport(direct - trunc, rewritten - trunc, trunc, bound, nd + nr)
