"""Line functions, local Fourier transforms, Tate zeta integrals and compact averages.

A line function is a function of one variable b in F_v obtained by restricting
a test function to the unipotent line through a point x.  At a prime it is
stored as a table on p^lo Z_p / p^hi Z_p; at the real place as a vectorized
callable with an effective support radius.

Additive character: psi_p(x) = exp(-2 pi i {x}_p), psi_inf(x) = exp(2 pi i x),
so that Z_p and [0, 1] are self-dual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping

import mpmath
import numpy as np
from scipy import integrate

from .arith import INF, DomainError, QuadraticCharacter, frac, vp
from .cyclo import Cyclo
from .symspace import Mat2, XPoint, conj_traceless
from .testfns import REAL, GlobalTestFn, LocalTestFn

EULER_GAMMA = 0.57721566490153286060651209008240243


class AccuracyError(ArithmeticError):
    """A numerical routine could not reach the requested tolerance."""


# ---------------------------------------------------------------------------
# line functions

@dataclass
class LineFn:
    """g(b) for b in F_v.

    finite place p: g vanishes off p^lo Z_p and is constant on p^hi Z_p cosets;
    ``table[j]`` is the value at b = p^lo * j, 0 <= j < p^(hi - lo).
    real place: ``evaluator`` accepts numpy arrays; g is negligible for |b| > radius.
    """

    place: int
    lo: int = 0
    hi: int = 0
    table: list | None = None
    evaluator: Callable | None = None
    radius: float = INF

    @classmethod
    def tabulate(cls, p: int, lo: int, hi: int, fn: Callable) -> "LineFn":
        hi = max(hi, lo)
        step = Fraction(p) ** lo
        return cls(p, lo, hi, [fn(step * j) for j in range(p ** (hi - lo))])

    @property
    def size(self) -> int:
        return len(self.table)

    def points(self) -> list[Fraction]:
        step = Fraction(self.place) ** self.lo
        return [step * j for j in range(self.size)]

    def index(self, b) -> int | None:
        b = frac(b)
        p = self.place
        if vp(b, p) < self.lo:
            return None
        q = b / Fraction(p) ** self.lo
        mod = p ** (self.hi - self.lo)
        return q.numerator * pow(q.denominator, -1, mod) % mod if mod > 1 else 0

    def __call__(self, b):
        if self.place == REAL:
            return self.evaluator(b)
        j = self.index(b)
        return 0 if j is None else self.table[j]

    def integral(self):
        """int g(b) db (vol Z_p = 1, Lebesgue at the real place)."""
        if self.place == REAL:
            return _real_integral(self.evaluator, self.radius)
        return sum(self.table, 0) * Fraction(self.place) ** (-self.hi)

    def refine(self, lo: int | None = None, hi: int | None = None) -> "LineFn":
        """The same function on a finer table."""
        lo = self.lo if lo is None else min(lo, self.lo)
        hi = self.hi if hi is None else max(hi, self.hi)
        return LineFn.tabulate(self.place, lo, hi, self)


def _real_integral(fn, radius) -> float:
    R = float(radius) if math.isfinite(radius) else 60.0
    if R == 0:
        return 0.0
    val, _ = integrate.quad(lambda t: float(fn(t)), -R, R, limit=400, epsabs=1e-14, epsrel=1e-12)
    return val


def line_matrix(x: Mat2) -> tuple:
    """(v, b, c) of x^{-1} e12 x, e12 = [[0, 1], [0, 0]]."""
    return conj_traceless(x, (Fraction(0), Fraction(1), Fraction(0)))


def _line_scale(tau: int, minus: bool):
    return (-1, -2 * tau) if minus else (1, 2)


def derive_fx(fn: LocalTestFn, x: Mat2, tau: int, minus: bool = False) -> LineFn:
    """b -> f(x^{-1} n(sqrt(tau) b) theta(n(sqrt(tau) b))^{-1} x), moved to o- by gamma0 if ``minus``.

    The point is u = +-1, Y0 = s b x^{-1} e12 x with s = 2 (or -2 tau on o-).
    """
    u, s = _line_scale(tau, minus)
    if fn.place == REAL:
        M = np.array([float(e) for e in line_matrix(x.map(float))])
        return _real_line(fn, float(u), float(s) * M)
    p = fn.place
    x = x.map(frac)
    M = line_matrix(x)
    mv = min(vp(e, p) for e in M if e != 0)
    vs = vp(Fraction(s), p)
    lo = -fn.radius_exp - vs - mv
    hi = fn.level - vs - mv

    def value(b):
        return fn(XPoint(tau, Fraction(u), s * b * M[0], s * b * M[1], s * b * M[2]))

    return LineFn.tabulate(p, lo, hi, value)


def _real_line(fn: LocalTestFn, u: float, direction: np.ndarray) -> LineFn:
    """b -> f(u, b * direction) with an effective support radius from the support box."""
    center, half = fn.support_box()
    if abs(u - center[0]) > half[0]:
        radius = 0.0
    else:
        radius = INF
        for i in range(3):
            if direction[i] != 0:
                radius = min(radius, (abs(center[i + 1]) + half[i + 1]) / abs(direction[i]))

    def ev(b):
        b = np.asarray(b, dtype=float)
        coords = np.stack([np.full(b.shape, u)] + [direction[i] * b for i in range(3)])
        return fn.evaluate_array(coords)

    return LineFn(REAL, evaluator=ev, radius=radius)


# ---------------------------------------------------------------------------
# Fourier transform on a line

def _psi_exponent(z: Fraction, p: int, n: int) -> int:
    """e with psi_p(z) = zeta_n^e, assuming n z in Z_p."""
    t = z * n
    if vp(t, p) < 0:
        raise DomainError("phase outside the expected cyclotomic field")
    res = t.numerator * pow(t.denominator, -1, n) % n if n > 1 else 0
    return (-res) % n


def fourier_line(g: LineFn) -> LineFn:
    """hat g(y) = int g(b) psi(b y) db."""
    if g.place == REAL:
        return _fourier_real(g)
    p, lo, hi = g.place, g.lo, g.hi
    n = p ** (hi - lo)
    pts = g.points()
    vol = Fraction(p) ** (-hi)
    exact = all(isinstance(t, (int, Fraction, Cyclo)) for t in g.table)

    def value(y):
        y = frac(y)
        if exact:
            acc = Cyclo(n)
            for b, gb in zip(pts, g.table):
                if gb == 0:
                    continue
                z = Cyclo.zeta(n, _psi_exponent(b * y, p, n))
                if isinstance(gb, Cyclo):
                    gb = gb.embed(n) if gb.n != n else gb
                acc = acc + z * gb
            acc = acc * vol
            return acc.rational_value() if acc.is_rational() else acc
        acc = 0j
        for b, gb in zip(pts, g.table):
            acc += complex(gb) * np.exp(-2j * math.pi * float(_frac_part(b * y, p)))
        return acc * float(vol)

    return LineFn.tabulate(p, -hi, -lo, value)


def _frac_part(z: Fraction, p: int) -> Fraction:
    """{z}_p: the rational in [0, 1) with p-power denominator and z - {z}_p in Z_p."""
    v = vp(z, p)
    if v >= 0:
        return Fraction(0)
    m = p ** (-v)
    t = z * m
    r = t.numerator * pow(t.denominator, -1, m) % m
    return Fraction(r, m)


def _fourier_real(g: LineFn) -> LineFn:
    R = g.radius if math.isfinite(g.radius) else 60.0
    fn = g.evaluator

    def one(y: float) -> complex:
        y = float(y)
        if R == 0:
            return 0j
        if y == 0:
            re, _ = integrate.quad(lambda t: float(fn(t)), -R, R, limit=400, epsabs=1e-14)
            return complex(re)
        w = 2 * math.pi * y
        re, _ = integrate.quad(lambda t: float(fn(t)), -R, R, weight="cos", wvar=w, limlst=200, limit=400,
                               epsabs=1e-14)
        im, _ = integrate.quad(lambda t: float(fn(t)), -R, R, weight="sin", wvar=w, limlst=200, limit=400,
                               epsabs=1e-14)
        return complex(re, im)

    def ev(y):
        arr = np.asarray(y, dtype=float)
        if arr.ndim == 0:
            return one(float(arr))
        return np.array([one(t) for t in arr.ravel()]).reshape(arr.shape)

    return LineFn(REAL, evaluator=ev, radius=INF)


def plancherel_finite(g: LineFn) -> tuple:
    """(int |g|^2, int |hat g|^2), both exact."""
    gh = fourier_line(g)

    def norm2(h: LineFn):
        n = max([t.n for t in h.table if isinstance(t, Cyclo)], default=1)
        acc = Cyclo(n)
        for t in h.table:
            if isinstance(t, Cyclo):
                t = t.embed(n)
                acc = acc + t * t.conj()
            else:
                acc = acc + frac(t) ** 2
        # each |t|^2 is only real; the sum is rational
        return acc.rational_value() * Fraction(h.place) ** (-h.hi)

    return norm2(g), norm2(gh)


# ---------------------------------------------------------------------------
# Tate zeta integrals

@dataclass
class ZetaValue:
    s: object
    value: object
    pole: bool = False
    residue: object = None
    error: float = 0.0
    parts: dict = field(default_factory=dict)


@lru_cache(maxsize=None)
def _kappa_units(D: int, p: int, M: int) -> tuple:
    """kappa_p(u) for every u mod p^M (0 for non-units)."""
    kap = QuadraticCharacter(D)
    mod = p ** M
    return tuple(kap.local(p, u) if u % p else 0 for u in range(mod))


def tate_zeta_local(g: LineFn, kappa: QuadraticCharacter, s) -> ZetaValue:
    """int_{F_v^x} g(t) kappa_v(t) |t|^s d^x t with vol Z_p^x = 1 and dt/|t| at the real place."""
    if g.place == REAL:
        return _tate_real(g, kappa, s)
    p = g.place
    exact = isinstance(s, (int, Fraction)) and all(isinstance(t, (int, Fraction)) for t in g.table)
    if exact:
        s = Fraction(s)
        if s.denominator != 1:
            exact = False
    if not exact:
        s = complex(s)
        if s.imag == 0:
            s = s.real
        if s.real <= 0:
            raise DomainError("the local zeta integral needs Re s > 0")
    cond = kappa.conductor_exponent(p)
    K = max(g.hi, g.lo)
    total = Fraction(0) if exact else 0 * s
    for k in range(g.lo, K):
        M = max(g.hi - k, cond, 1)
        units = _kappa_units(kappa.D, p, M)
        acc = Fraction(0)
        kp = kappa.local(p, Fraction(p) ** k)
        base = Fraction(p) ** k
        count = 0
        for u in range(1, p ** M):
            if u % p == 0:
                continue
            count += 1
            val = g(base * u)
            if val:
                acc += frac(val) * units[u] * kp
        avg = acc / count
        if exact:
            total += avg * Fraction(p) ** (-k * s)
        else:
            total += float(avg) * p ** (-k * s)
    g0 = g(Fraction(0))
    if g0 and not kappa.is_ramified(p):
        kp = kappa.local(p, p)
        if exact:
            z = kp * Fraction(p) ** (-s)
        else:
            z = kp * p ** (-s)
        total += frac(g0) * z ** K / (1 - z) if exact else float(g0) * z ** K / (1 - z)
    return ZetaValue(s, total)


def _tate_real(g: LineFn, kappa: QuadraticCharacter, s) -> ZetaValue:
    s = float(s)
    if s <= 0:
        raise DomainError("the local zeta integral needs s > 0")
    sign = kappa.local(REAL, -1)
    R = g.radius if math.isfinite(g.radius) else 60.0
    if R == 0:
        return ZetaValue(s, 0.0)

    def h(t):
        return float(g.evaluator(t)) + sign * float(g.evaluator(-t))

    val, err = integrate.quad(h, 0, R, weight="alg", wvar=(s - 1, 0), limit=400, epsabs=1e-14)
    return ZetaValue(s, val, error=err)


def _partial_L(kappa: QuadraticCharacter, s, S) -> mpmath.mpf:
    if kappa.is_trivial:
        L = mpmath.zeta(s)
    else:
        D = abs(kappa.D)
        chi = [kappa.at_prime(n) if n else 0 for n in range(D)]
        if s == 1:
            # each Hurwitz term has a pole at 1; since sum chi = 0 the digamma form is finite
            L = -mpmath.fsum(c * mpmath.digamma(mpmath.mpf(k) / D) for k, c in enumerate(chi) if c) / D
        else:
            L = mpmath.dirichlet(s, chi)
    for p in S:
        L *= 1 - kappa.local(p, p) * mpmath.power(p, -s) if not kappa.is_ramified(p) else 1
    return L


def tate_zeta_global(local: Mapping[int, LineFn], kappa: QuadraticCharacter, s, vol: float = 1.0,
                     dps: int = 30) -> ZetaValue:
    """vol * prod_v Z_v(g_v, kappa_v |.|^s) with g_p = 1_{Z_p} at unlisted primes.

    Unlisted primes contribute their local L-factor, so the product is
    Z_inf * prod_{p in S} Z_p * L^S(s, kappa).  At s = 1 with kappa trivial the
    value is a pole and ``residue`` holds vol * prod_v int g_v.
    """
    if REAL not in local:
        raise DomainError("a real line function is required")
    S = sorted(v for v in local if v != REAL)
    parts = {}
    # an unlisted ramified prime sees 1_{Z_p} against a ramified character: zero
    for q in kappa.ramified_primes():
        if q not in local:
            z = tate_zeta_local(LineFn.tabulate(q, 0, 0, lambda b: 1), kappa, 2).value
            parts[q] = z
            if z == 0:
                return ZetaValue(s, 0.0, parts=parts)
    residue = None
    if kappa.is_trivial:
        residue = vol
        for v in [REAL] + S:
            residue *= float(local[v].integral())
    sval = float(s) if not isinstance(s, complex) else s
    if kappa.is_trivial and sval == 1:
        return ZetaValue(s, INF, pole=True, residue=residue, parts=parts)
    value = vol
    for v in [REAL] + S:
        z = tate_zeta_local(local[v], kappa, s).value
        parts[v] = z
        value *= complex(z) if isinstance(z, complex) else float(z)
    if value == 0:
        return ZetaValue(s, 0.0, residue=residue, parts=parts)
    with mpmath.workdps(dps):
        L = _partial_L(kappa, mpmath.mpf(sval) if not isinstance(sval, complex) else mpmath.mpc(sval), S)
    Lc = complex(L)
    out = value * (Lc if abs(Lc.imag) > 0 else Lc.real)
    return ZetaValue(s, out, residue=residue, parts=parts)


def zeta_sderivative(Zfun: Callable[[float], float], h: float = 0.1, tol: float = 1e-6,
                     levels: int = 7) -> tuple[float, float]:
    """d/ds [s Z(1 + s)] at s = 0 for Z with a simple pole at 1.

    Central differences of the analytic function s Z(1+s) in steps h, h/2, ...,
    extrapolated with a Richardson table in h^2.  Returns (value, error estimate).
    """

    def F(s):
        return s * float(Zfun(1 + s))

    table = []
    best, best_err = None, INF
    for i in range(levels):
        step = h / 2 ** i
        row = [(F(step) - F(-step)) / (2 * step)]
        for j in range(1, i + 1):
            row.append(row[j - 1] + (row[j - 1] - table[i - 1][j - 1]) / (4 ** j - 1))
        table.append(row)
        if i:
            err = abs(row[-1] - table[i - 1][-1])
            if err < best_err:
                best, best_err = row[-1], err
            if err < tol * 1e-2:
                break
    if best_err > tol:
        raise AccuracyError(f"s-derivative did not converge: error {best_err:.2e}")
    return best, best_err


def laurent_constant(Zfun: Callable[[float], float], residue: float, h: float = 0.1, tol: float = 1e-6,
                     levels: int = 7) -> tuple[float, float]:
    """lim_{s -> 0} [Z(1 + s) - residue / s], by symmetric Richardson extrapolation."""

    def B(s):
        return float(Zfun(1 + s)) - residue / s

    return richardson_even(B, h, tol, levels)


def richardson_even(B: Callable[[float], float], h: float = 0.1, tol: float = 1e-6,
                    levels: int = 7) -> tuple[float, float]:
    """lim_{s -> 0} B(s) for B analytic at 0 but only evaluable at s != 0."""
    table = []
    best, best_err = None, INF
    for i in range(levels):
        step = h / 2 ** i
        row = [(B(step) + B(-step)) / 2]
        for j in range(1, i + 1):
            row.append(row[j - 1] + (row[j - 1] - table[i - 1][j - 1]) / (4 ** j - 1))
        table.append(row)
        if i:
            err = abs(row[-1] - table[i - 1][-1])
            if err < best_err:
                best, best_err = row[-1], err
            if err < tol * 1e-2:
                break
    if best_err > tol:
        raise AccuracyError(f"extrapolation did not converge: error {best_err:.2e}")
    return best, best_err


def basic_gaussian_sderivative() -> float:
    """Closed form of d/ds [s Z(1+s)] at 0 for 1_{Z_p} everywhere and e^{-pi b^2} at infinity."""
    return EULER_GAMMA / 2 - math.log(2) - 0.5 * math.log(math.pi)


# ---------------------------------------------------------------------------
# averages over the maximal compact

def _primitive_rows(p: int, N: int):
    mod = p ** N
    for c in range(mod):
        for d in range(mod):
            if c % p or d % p:
                yield c, d


def kappa_average_local(fn: LocalTestFn, tau: int, kappa: QuadraticCharacter, minus: bool = False,
                        n_theta: int = 96) -> LineFn:
    """f^kappa(b) = int_K kappa(det k) f_k(b) dk on the line through the identity.

    f_k(b) = f(k^{-1} n(sqrt(tau) b) theta(n)^{-1} k); at a prime k runs over GL2(Z_p),
    at the real place over O(2).
    """
    u, s = _line_scale(tau, minus)
    if fn.place == REAL:
        return _kappa_average_real(fn, float(u), float(s), kappa, n_theta)
    p = fn.place
    vs = vp(Fraction(s), p)
    lo = -fn.radius_exp - vs
    hi = max(fn.level - vs, lo)
    cond = kappa.conductor_exponent(p)
    if fn.k_invariant and kappa.is_trivial:
        return derive_fx(fn, Mat2.identity(), tau, minus)
    N = max(fn.level + fn.radius_exp, cond, 1)
    rows = list(_primitive_rows(p, N))
    step = Fraction(p) ** lo
    size = p ** (hi - lo)
    F = []
    for j in range(size):
        b = step * j
        acc = Fraction(0)
        for c, d in rows:
            sb = s * b
            acc += frac(fn(XPoint(tau, Fraction(u), sb * d * c, sb * d * d, -sb * c * c)))
        F.append(acc / len(rows))
    mod_units = p ** N
    units = [t for t in range(1, mod_units) if t % p]
    kv = _kappa_units(kappa.D, p, N)
    table = []
    for j in range(size):
        acc = Fraction(0)
        for t in units:
            # b / t on the grid: index j * t^{-1} mod p^(hi - lo)
            jj = j * pow(t, -1, size) % size if size > 1 else 0
            acc += kv[t] * F[jj]
        table.append(acc / len(units))
    return LineFn(p, lo, hi, table)


def _kappa_average_real(fn: LocalTestFn, u: float, s: float, kappa: QuadraticCharacter, n_theta: int) -> LineFn:
    center, half = fn.support_box()
    bound = float(np.max(np.abs(center[1:]) + half[1:]))
    radius = 0.0 if abs(u - center[0]) > half[0] else 2 * bound / abs(s)
    sign = kappa.local(REAL, -1)
    th = 2 * math.pi * np.arange(n_theta) / n_theta
    c, d = np.sin(th), np.cos(th)

    def ev(b):
        b = np.asarray(b, dtype=float)
        bb = b[..., None]
        out = 0.0
        for det, dd in ((1.0, d), (-1.0, -d)):
            sb = s * bb / det
            coords = np.stack([np.full(np.broadcast(bb, c).shape, u), sb * dd * c, sb * dd * dd, -sb * c * c])
            vals = fn.evaluate_array(coords).mean(axis=-1)
            out = out + (0.5 if det > 0 else 0.5 * sign) * vals
        return out

    return LineFn(REAL, evaluator=ev, radius=radius)


def kappa_average(f: GlobalTestFn, kappa: QuadraticCharacter, minus: bool = False,
                  n_theta: int = 96) -> dict:
    """Per-place line functions f^kappa_K at the real place, S(f), and the ramified primes of kappa."""
    places = set(f.local) | set(kappa.ramified_primes())
    return {v: kappa_average_local(f.at(v), f.tau, kappa, minus, n_theta) for v in sorted(places)}


def kappa_average_bruteforce(fn: LocalTestFn, tau: int, kappa: QuadraticCharacter, b, N: int,
                             minus: bool = False):
    """Average over all of GL2(Z/p^N), for testing the bottom-row reduction."""
    p = fn.place
    u, s = _line_scale(tau, minus)
    mod = p ** N
    b = frac(b)
    acc = Fraction(0)
    count = 0
    for a in range(mod):
        for bb in range(mod):
            for c in range(mod):
                for d in range(mod):
                    det = (a * d - bb * c) % mod
                    if det % p == 0:
                        continue
                    k = Mat2(Fraction(a), Fraction(bb), Fraction(c), Fraction(d))
                    v, b2, c2 = conj_traceless(k, (Fraction(0), s * b, Fraction(0)))
                    acc += frac(fn(XPoint(tau, Fraction(u), v, b2, c2))) * kappa.local(p, det)
                    count += 1
    return acc / count


# ---------------------------------------------------------------------------
# Poisson summation

def lattice_sum(g: Callable, tol: float = 1e-17, start: int = 0, max_terms: int = 10 ** 6) -> complex:
    """sum_{n in Z} g(n), truncated once consecutive terms drop below tol."""
    total = complex(g(0)) if start == 0 else 0j
    small = 0
    for n in range(1, max_terms):
        t = complex(g(n)) + complex(g(-n))
        total += t
        small = small + 1 if abs(t) < tol else 0
        if small >= 3:
            return total
    raise AccuracyError("lattice sum did not converge")


def poisson_check(g: LineFn, tol: float = 1e-13) -> tuple[complex, complex]:
    """(sum_n g(n), sum_n hat g(n)) for a real-place line function."""
    gh = fourier_line(g)
    return lattice_sum(lambda n: g.evaluator(float(n)), tol), lattice_sum(lambda n: gh.evaluator(float(n)), tol)


def cayley_composite(fn: LocalTestFn, x: Mat2, a, tau: int, eps: int = 1) -> LineFn:
    """N -> f(x^{-1} kappa_eps(sqrt(tau) [[a, N], [0, -a]]) x) at the real place.

    With q = tau a^2 the Cayley image has u = -eps (1 + q)/(1 - q), slice part
    (-2 eps a, -2 eps N, 0)/(1 - q), so the composite is f along an affine line.
    """
    if fn.place != REAL:
        raise DomainError("the composite is an archimedean line function")
    a = float(a)
    q = tau * a * a
    D = 1 - q
    if D == 0:
        raise DomainError("det(1 - Y) = 0 on this line")
    u = -eps * (1 + q) / D
    xf = x.map(float)
    base = np.array([float(e) for e in conj_traceless(xf, (-2 * eps * a / D, 0.0, 0.0))])
    step = np.array([float(e) for e in conj_traceless(xf, (0.0, -2 * eps / D, 0.0))])
    center, half = fn.support_box()
    radius = INF
    if abs(u - center[0]) > half[0]:
        radius = 0.0
    else:
        for i in range(3):
            if step[i] != 0:
                radius = min(radius, (abs(center[i + 1]) + half[i + 1] + abs(base[i])) / abs(step[i]))

    def ev(N):
        N = np.asarray(N, dtype=float)
        coords = np.stack([np.full(N.shape, u)] + [base[i] + step[i] * N for i in range(3)])
        return fn.evaluate_array(coords)

    return LineFn(REAL, evaluator=ev, radius=radius)
