"""Iwasawa decompositions of SL2 over R and Q_p, heights, the weight v(x), and psi^T.

The coordinate on the one-dimensional split component is H(diag(t, 1/t)) = log|t|.
Places are integers: 0 is the real place, a prime p is the p-adic place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np
from scipy.optimize import brentq

from .arith import INF, DomainError, PadicElem, PrecisionError, QuadAlg, QuadElem, frac, local_splitting, sqrt_mod_prime_power, vp
from .symspace import W, Mat2

REAL = 0


@dataclass(frozen=True)
class IwasawaData:
    """g = n(u) diag(t, 1/t) k."""

    u: object
    t: object
    height: float
    k: Mat2


def _rot(c: float, d: float) -> Mat2:
    return Mat2(d, -c, c, d)


def iwasawa_real(g: Mat2, tol: float = 1e-10) -> IwasawaData:
    a, b, c, d = (float(e) for e in g.entries())
    if abs(a * d - b * c - 1) > tol:
        raise DomainError("iwasawa_real needs det g = 1")
    r = math.hypot(c, d)
    t = 1 / r
    k = _rot(c * t, d * t)
    nk = g * k.map(float).adjugate()  # k^{-1} = k^T = adjugate for rotations
    u = nk.b * t
    return IwasawaData(u, t, math.log(t), k)


def padic_height_exponent(c, d, p: int) -> int:
    """min(v(c), v(d)); the p-adic height is this times log p."""
    vals = []
    for e in (c, d):
        if isinstance(e, PadicElem):
            if e.prime != p:
                raise DomainError("mixed primes")
            vals.append((e.valuation if not e.is_zero else e.absolute_precision, e.is_zero))
        else:
            vals.append((vp(frac(e), p), False))
    (vc, zc), (vd, zd) = vals
    if zc and zd:
        raise PrecisionError("bottom row is zero to working precision")
    m = min(vc, vd)
    # an inexact zero only bounds its valuation from below
    if (zc and vc <= vd) or (zd and vd <= vc):
        raise PrecisionError("insufficient precision to decide max(|c|, |d|)")
    if m == INF:
        raise DomainError("bottom row vanishes")
    return int(m)


def iwasawa_padic(g: Mat2, p: int) -> IwasawaData:
    """Exact decomposition for rational g (height in units of log p via IwasawaData.t)."""
    if g.det() != 1:
        raise DomainError("iwasawa_padic needs det g = 1")
    a, b, c, d = (frac(e) for e in g.entries())
    m = padic_height_exponent(c, d, p)
    t = Fraction(p) ** (-m)  # |t|_p = p^m
    c1, d1 = c * t, d * t
    if vp(d1, p) == 0:
        k = Mat2(1 / d1, Fraction(0), c1, d1)
    else:
        k = Mat2(Fraction(0), -1 / c1, c1, d1)
    nk = g * k.inverse()
    u = nk.b * t
    return IwasawaData(u, t, m * math.log(p), k)


def local_height(g: Mat2, place: int) -> float:
    if place == REAL:
        return iwasawa_real(g).height
    if g.det() != 1:
        raise DomainError("local_height needs det g = 1")
    return padic_height_exponent(g.c, g.d, place) * math.log(place)


class AdelicPoint:
    """Finitely supported family place -> SL2 matrix; identity elsewhere."""

    def __init__(self, entries: Mapping[int, Mat2] | None = None):
        self.entries = dict(entries or {})

    def at(self, place: int) -> Mat2:
        return self.entries.get(place, Mat2.identity())

    @property
    def places(self) -> list[int]:
        return sorted(self.entries)

    def left(self, g: Mat2 | Mapping[int, Mat2], places=None) -> "AdelicPoint":
        """Left multiplication by a rational g (diagonally) or by a per-place family."""
        if isinstance(g, Mat2):
            support = set(self.entries) | set(places or [])
            return AdelicPoint({v: g * self.at(v) for v in support})
        out = dict(self.entries)
        for v, h in g.items():
            out[v] = h * self.at(v)
        return AdelicPoint(out)

    def real_part(self) -> Mat2:
        return self.at(REAL)

    def __repr__(self):
        return f"AdelicPoint({self.entries!r})"


def height_adelic(x: AdelicPoint, extra_places=()) -> float:
    return sum(local_height(x.at(v), v) for v in set(x.places) | set(extra_places))


def wx(x: AdelicPoint) -> AdelicPoint:
    """Left multiplication by w at every place (w lies in every K_p, so only the support matters)."""
    return AdelicPoint({v: W * x.at(v) for v in set(x.places) | {REAL}})


def weight_v(x: AdelicPoint) -> float:
    """v(x) = H(x) + H(wx)."""
    return height_adelic(x, [REAL]) + height_adelic(wx(x), [REAL])


def weight_local(g: Mat2, place: int) -> float:
    return local_height(g, place) + local_height(W * g, place)


def weight_unipotent(u, place: int) -> float:
    """v_place(n(u)) in closed form."""
    if place == REAL:
        return -0.5 * math.log1p(float(u) ** 2)
    if u == 0:
        return 0.0
    return min(0, vp(frac(u), place)) * math.log(place)


# ---------------------------------------------------------------------------
# base-change height on SL2(E)

def _padic_sqrt(tau: int, p: int, prec: int) -> int:
    return sqrt_mod_prime_power(tau, p, prec)


def _split_valuation(z: QuadElem, p: int, root: int, prec: int) -> float:
    """Valuation of x + y * root in Q_p, with root a square root of tau mod p^prec."""
    if z.x == 0 and z.y == 0:
        return INF
    den = z.x.denominator * z.y.denominator
    shift = vp(Fraction(den), p)
    n = int(z.x * den) + int(z.y * den) * root
    mod = p ** prec
    n %= mod
    if n == 0:
        raise PrecisionError("valuation exceeds working precision")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v - shift


def height_E(g: Mat2, place: int, prec: int = 60) -> float:
    """Height on SL2(E_v) = sum over places w | v, with normalized absolute values."""
    E = next((e.alg for e in g.entries() if isinstance(e, QuadElem)), None)
    if E is None:
        raise DomainError("height_E expects entries in E")
    c, d = g.c, g.d
    if place == REAL:
        if E.core > 0:
            return sum(
                -math.log(math.hypot(c.to_complex(sgn).real, d.to_complex(sgn).real)) for sgn in (1, -1)
            )
        return -math.log(abs(c.to_complex()) ** 2 + abs(d.to_complex()) ** 2)
    p = place
    kind = local_splitting(E, p)
    if kind != "split":
        m = min(vp(c.norm(), p), vp(d.norm(), p))
        return m * math.log(p)
    tau = E.core
    root = _padic_sqrt(tau % (p ** prec), p, prec)
    total = 0
    for r in (root, -root):
        total += min(_split_valuation(c, p, r, prec), _split_valuation(d, p, r, prec))
    return total * math.log(p)


def height_E_adelic(x: AdelicPoint, E: QuadAlg) -> float:
    """Base-change height of a point of G'(A) viewed in G(A)."""
    total = 0.0
    for v in set(x.places) | {REAL}:
        g = x.at(v).map(lambda e: QuadElem(E, e))
        total += height_E(g, v)
    return total


# ---------------------------------------------------------------------------
# psi^T

def psi_T(x: AdelicPoint, T: float) -> int:
    """1 - [H(x) > T] - [H(wx) > T]."""
    return 1 - int(height_adelic(x, [REAL]) > T) - int(height_adelic(wx(x), [REAL]) > T)


def psi_T_integral(x: AdelicPoint, T: float) -> float:
    """Closed form -2 v(x) + 4T (measure da = d H_0(a) = 2 dX)."""
    return -2 * weight_v(x) + 4 * T


MEASURE_FACTOR = 2.0


def psi_T_quadrature(x: AdelicPoint, T: float) -> float:
    """Integrate a -> psi^T(a x) over A^infinity numerically.

    Heights of a x and w a x are recomputed from Iwasawa decompositions; the
    jumps are located by root finding and the piecewise-constant integrand is
    integrated exactly between them.
    """

    def ax(X: float) -> AdelicPoint:
        a = Mat2(math.exp(X), 0.0, 0.0, math.exp(-X))
        out = dict(x.entries)
        out[REAL] = a * x.at(REAL).map(float)
        return AdelicPoint(out)

    def h1(X):
        return height_adelic(ax(X), [REAL]) - T

    def h2(X):
        return height_adelic(wx(ax(X)), [REAL]) - T

    def bracket_root(fn) -> float:
        lo, hi = -1.0, 1.0
        while np.sign(fn(lo)) == np.sign(fn(hi)):
            lo, hi = 2 * lo, 2 * hi
            if hi > 1e6:
                raise DomainError("no sign change found")
        return brentq(fn, lo, hi, xtol=1e-14, rtol=1e-15)

    jumps = sorted([bracket_root(h1), bracket_root(h2)])
    lo, hi = jumps
    mid = 0.5 * (lo + hi)
    value = psi_T(ax(mid), T)
    # outside [lo, hi] exactly one indicator fires, so psi vanishes there
    for probe in (lo - 1.0, hi + 1.0):
        if psi_T(ax(probe), T) != 0:
            raise DomainError("psi^T does not vanish outside the jump interval")
    return MEASURE_FACTOR * value * (hi - lo)
