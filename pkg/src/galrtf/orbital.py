"""Local relative orbital integrals, their v-weighted versions, and the Levi descent f -> f_M.

Measures: vol SL2(Z_p) = 1 and vol SO(2) = 1.  A compact stabilizer torus gets
volume 1.  A split stabilizer is conjugated to the diagonal torus A and
A \\ SL2 is parametrized as N x K with du dk.  At the real place the compact
case uses K A N coordinates with Haar measure e^{2t} dk dt ds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .arith import INF, DomainError, is_padic_square, padic_sqrt, frac, vp
from .symspace import Mat2, XPoint, conj_traceless
from .testfns import REAL, GlobalTestFn, LocalTestFn

SPLIT_PRECISION = 40


@dataclass
class OrbitalResult:
    value: object
    place: int
    kind: str
    depth: int | None = None
    deeper: object = None
    stabilized: bool = True
    error: float = 0.0
    vertices: int = 0

    def as_dict(self) -> dict:
        return {
            "place": self.place,
            "kind": self.kind,
            "value": str(self.value) if isinstance(self.value, Fraction) else self.value,
            "depth": self.depth,
            "stabilized": self.stabilized,
            "error": self.error,
            "vertices": self.vertices,
        }


class StabilizationWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# finite K-averages

@lru_cache(maxsize=None)
def sl2_mod(p: int, N: int) -> tuple:
    """Representatives (a, b, c, d) of SL2(Z / p^N) with integer entries."""
    mod = p ** N
    out = []
    for c in range(mod):
        for d in range(mod):
            if c % p == 0 and d % p == 0:
                continue
            # particular solution of a d - b c = 1
            if d % p:
                a0, b0 = pow(d, -1, mod), 0
            else:
                a0, b0 = 0, (-pow(c, -1, mod)) % mod
            for t in range(mod):
                out.append(((a0 + t * c) % mod, (b0 + t * d) % mod, c, d))
    return tuple(out)


def _min_val(Y, p: int):
    return min((vp(e, p) for e in Y if e != 0), default=INF)


def _modular_balls(fn: LocalTestFn, u):
    """Balls of f compatible with u, as integer congruences on p^R * (v, b, c) modulo p^e."""
    p, R = fn.place, fn.radius_exp
    balls = fn.ball_list()
    if balls is None:
        return None
    e = max(max(levels) for _, levels, _ in balls) + R
    mod = p ** e
    out = []
    scale = Fraction(p) ** R
    for center, levels, value in balls:
        if vp(frac(u) - center[0], p) < levels[0]:
            continue
        cs = []
        for i in range(1, 4):
            q = center[i] * scale
            m = p ** (levels[i] + R)
            cs.append((q.numerator * pow(q.denominator, -1, m) % m, m))
        out.append((tuple(cs), value))
    return out, e, mod


def _to_residue(q: Fraction, scale: Fraction, mod: int) -> int:
    q = q * scale
    return q.numerator * pow(q.denominator, -1, mod) % mod


def k_average_finite(fn: LocalTestFn, tau: int, u, Y: tuple):
    """int_{SL2(Z_p)} f(k^{-1} (u, Y) k) dk, exactly."""
    p = fn.place
    if fn.k_invariant:
        return fn(XPoint(tau, u, *Y))
    mv = _min_val(Y, p)
    if mv < -fn.radius_exp:
        return 0
    N = max(fn.level - (mv if mv != INF else fn.level), 1)
    reps = sl2_mod(p, N)
    fast = _modular_balls(fn, u)
    if fast is not None:
        balls, e, mod = fast
        if not balls:
            return Fraction(0)
        scale = Fraction(p) ** fn.radius_exp
        v, b, c = (_to_residue(frac(t), scale, mod) for t in Y)
        acc = Fraction(0)
        for a, bb, cc, d in reps:
            inv = pow((a * d - bb * cc) % mod, -1, mod)
            # adj(k) Y k / det, entries (1,1), (1,2), (2,1)
            y11 = ((d * v - bb * c) * a + (d * b + bb * v) * cc) * inv % mod
            y12 = ((d * v - bb * c) * bb + (d * b + bb * v) * d) * inv % mod
            y21 = ((-cc * v + a * c) * a + (-cc * b - a * v) * cc) * inv % mod
            key = (y11, y12, y21)
            for cs, value in balls:
                if all((key[i] - cs[i][0]) % cs[i][1] == 0 for i in range(3)):
                    acc += value
        return acc / len(reps)
    acc = Fraction(0)
    for a, b, c, d in reps:
        k = Mat2(Fraction(a), Fraction(b), Fraction(c), Fraction(d))
        acc += frac(fn(XPoint(tau, u, *conj_traceless(k, Y))))
    return acc / len(reps)


# ---------------------------------------------------------------------------
# tree enumeration for compact tori

def tree_vertices(p: int, depth: int, window=None):
    """Even vertices n(u) a(p^k) . o within tree distance ``depth`` of o.

    ``window`` = (kmin, kmax, umin) restricts to k in [kmin, kmax] and
    v(u) >= umin; vertices outside it are known to contribute zero.
    """
    half = depth // 2
    kmin, kmax, umin = window if window else (-half, half, -INF)
    for k in range(max(-half, kmin), min(half, kmax) + 1):
        ulo = max(k - half, umin)
        if ulo >= 2 * k:
            yield k, Fraction(0)
            continue
        step = Fraction(p) ** ulo
        for j in range(p ** (2 * k - ulo)):
            yield k, step * j


def vertex_count(p: int, depth: int) -> int:
    """1 + (p + 1) sum_{j=1}^{depth/2} p^{2j-1}: the even ball of radius depth."""
    return 1 + (p + 1) * sum(p ** (2 * j - 1) for j in range(1, depth // 2 + 1))


def _compact_window(Y: tuple, p: int, R: int):
    """(kmin, kmax, umin) outside which g^{-1} Y g has an entry of valuation < -R.

    For g = n(u) a(p^k): c' = c p^{2k}, v' = v - u c, and
    b' = (b + 2uv - c u^2) p^{-2k}; the quadratic has no root in Q_p when
    v^2 + bc is not a square, which bounds its valuation from above.
    """
    v, b, c = Y
    delta = v * v + b * c
    vc = vp(c, p)
    kmin = math.ceil((-R - vc) / 2)
    bmax = vp(delta, p) - vc + (3 if p == 2 else 0)
    kmax = math.floor((R + bmax) / 2)
    umin = min(-R - vc, (vp(v, p) - vc) if v != 0 else INF)
    return kmin, kmax, umin


def _vertex_matrix(k: int, u: Fraction, p: int) -> Mat2:
    t = Fraction(p) ** k
    return Mat2(t, u / t, Fraction(0), 1 / t)


def _compact_sum(fn: LocalTestFn, eta: XPoint, depth: int, window) -> tuple:
    p = fn.place
    total = Fraction(0)
    count = 0
    for k, u in tree_vertices(p, depth, window):
        count += 1
        g = _vertex_matrix(k, u, p)
        Y = conj_traceless(g, eta.slice)
        if _min_val(Y, p) < -fn.radius_exp:
            continue
        total += frac(k_average_finite(fn, eta.tau, eta.u, Y))
    return total, count


def _classify_local(eta: XPoint, place: int) -> tuple[str, Fraction]:
    v, b, c = (frac(e) for e in eta.slice)
    delta = v * v + b * c
    if v == 0 and b == 0 and c == 0:
        return "central", delta
    if delta == 0:
        raise DomainError("eta is not semisimple")
    if place == REAL:
        return ("split" if delta > 0 else "compact"), delta
    return ("split" if is_padic_square(delta, place) else "compact"), delta


def orbital_local(fn: LocalTestFn, eta: XPoint, depth: int = 4, weighted: bool = False) -> OrbitalResult:
    """int_{T \\ SL2(F_v)} f(x^{-1} eta x) dx at the place of ``fn``.

    Compact stabilizers at a prime: tree enumeration to ``depth`` and to
    ``depth + 2``; ``stabilized`` reports whether the two agree.
    """
    place = fn.place
    kind, delta = _classify_local(eta, place)
    if kind == "central":
        return OrbitalResult(fn(eta), place, "central")
    if weighted and kind != "split":
        raise DomainError("weighted orbital integrals are defined for split stabilizers")
    if place == REAL:
        if kind == "split":
            val, err = orbital_split_real(fn, eta.u, math.sqrt(float(delta)), weighted)
        else:
            val, err = orbital_compact_real(fn, eta)
        return OrbitalResult(val, place, kind, error=err)
    if kind == "split":
        r = padic_sqrt(delta, place, SPLIT_PRECISION)
        return OrbitalResult(orbital_split_finite(fn, eta.tau, eta.u, r, weighted), place, kind)
    window = _compact_window(tuple(frac(e) for e in eta.slice), place, fn.radius_exp)
    value, count = _compact_sum(fn, eta, depth, window)
    deeper, _ = _compact_sum(fn, eta, depth + 2, window)
    return OrbitalResult(value, place, kind, depth=depth, deeper=deeper, stabilized=(value == deeper),
                         vertices=count)


def orbital_compact_unpruned(fn: LocalTestFn, eta: XPoint, depth: int) -> Fraction:
    """The same tree sum without the valuation window (slow; for testing the pruning)."""
    return _compact_sum(fn, eta, depth, None)[0]


# ---------------------------------------------------------------------------
# split stabilizers

def split_profile_finite(fn: LocalTestFn, tau: int, t0, r, refine: bool = False) -> list:
    """[(u, g(u), cell volume)] for g(u) = int_K f(k^{-1} (t0, [[r, 2 r u], [0, -r]]) k) dk, nonzero cells only.

    With ``refine`` the cells are at least as fine as Z_p, so that min(0, v(u))
    is constant on each.
    """
    p = fn.place
    t0, r = frac(t0), frac(r)
    v2r = vp(2 * r, p)
    lo = -fn.radius_exp - v2r
    hi = max(fn.level - v2r, lo)
    if refine:
        hi = max(hi, 0)
        lo = min(lo, hi)
    step = Fraction(p) ** lo
    vol = Fraction(p) ** (-hi)
    out = []
    for j in range(p ** (hi - lo)):
        u = step * j
        val = k_average_finite(fn, tau, t0, (r, 2 * r * u, Fraction(0)))
        if val:
            out.append((u, frac(val), vol))
    return out


def orbital_split_finite(fn: LocalTestFn, tau: int, t0, r, weighted: bool = False):
    """int_{Q_p} int_K f(k^{-1} (t0, [[r, 2 r u], [0, -r]]) k) dk du, times min(0, v(u)) log p if weighted."""
    p = fn.place
    cells = split_profile_finite(fn, tau, t0, r, refine=weighted)
    if weighted:
        return sum(float(val * vol) * (min(0, vp(u, p)) if u != 0 else 0) * math.log(p) for u, val, vol in cells)
    return sum((val * vol for _, val, vol in cells), Fraction(0))


def _gauss_legendre(a: float, b: float, n: int, panels: int = 1):
    x, w = np.polynomial.legendre.leggauss(n)
    edges = np.linspace(a, b, panels + 1)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * w)
    return np.concatenate(xs), np.concatenate(ws)


def _rot_conj(v, b, c, th):
    """k^{-1} [[v, b], [c, -v]] k for k the rotation by th (arrays broadcast)."""
    kc, ks = np.cos(th), np.sin(th)
    v2 = v * (kc * kc - ks * ks) + (b + c) * ks * kc
    b2 = -2 * v * ks * kc - c * ks * ks + b * kc * kc
    c2 = -2 * v * ks * kc + c * kc * kc - b * ks * ks
    return v2, b2, c2


def _bounds(fn: LocalTestFn):
    center, half = fn.support_box()
    B = np.abs(center) + half
    return center, half, B


def _adaptive_1d(integrand, a: float, b: float, tol: float = 1e-11, n: int = 48, panels: int = 8):
    """Composite Gauss-Legendre, doubling the panel count until two passes agree."""
    prev = None
    for _ in range(8):
        x, w = _gauss_legendre(a, b, n, panels)
        val = float(np.sum(w * integrand(x)))
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return val, abs(val - prev)
        prev = val
        panels *= 2
    return val, abs(val - prev)


def split_profile_real(fn: LocalTestFn, t0, r: float, n_theta: int = 64):
    """(U, g) with g(u) = int_{SO(2)} f(k^{-1} (t0, [[r, 2 r u], [0, -r]]) k) dk vectorized, zero for |u| > U."""
    center, half, B = _bounds(fn)
    t0 = float(t0)
    if abs(t0 - center[0]) > half[0]:
        return 0.0, None
    room = 2 * B[1] ** 2 + B[2] ** 2 + B[3] ** 2 - 2 * r * r
    if room <= 0:
        return 0.0, None
    U = math.sqrt(room) / (2 * abs(r))
    th = 2 * math.pi * np.arange(n_theta) / n_theta

    def g(u):
        uu = np.asarray(u, dtype=float)[:, None]
        v2, b2, c2 = _rot_conj(r, 2 * r * uu, 0.0 * uu, th[None, :])
        coords = np.stack([np.full(v2.shape, t0), v2, b2, c2])
        return fn.evaluate_array(coords).mean(axis=1)

    return U, g


def orbital_split_real(fn: LocalTestFn, t0, r: float, weighted: bool = False, n_theta: int = 64,
                       tol: float = 1e-11):
    """int_R int_{SO(2)} f(k^{-1} (t0, [[r, 2 r u], [0, -r]]) k) dk du, weighted by -log(1 + u^2)/2."""
    U, g = split_profile_real(fn, t0, r, n_theta)
    if g is None:
        return 0.0, 0.0
    if weighted:
        return _adaptive_1d(lambda u: g(u) * (-0.5 * np.log1p(u * u)), -U, U, tol)
    return _adaptive_1d(g, -U, U, tol)


def orbital_compact_real(fn: LocalTestFn, eta: XPoint, tol: float = 1e-10):
    """Compact stabilizer at the real place, in K A N coordinates.

    Y0 is SL2(R)-conjugate to lam J with J = [[0, 1], [-1, 0]] and sign(lam) = sign(b).
    With sigma = s e^{2t} the integrand is f(t0, lam [[sigma, e^{-2t}(1 + sigma^2)], [-e^{2t}, -sigma]])
    against d sigma dt.
    """
    v, b, c = (float(e) for e in eta.slice)
    delta = v * v + b * c
    lam = math.copysign(math.sqrt(-delta), b)
    center, half, B = _bounds(fn)
    t0 = float(eta.u)
    if abs(t0 - center[0]) > half[0]:
        return 0.0, 0.0
    al = abs(lam)
    smax = B[1] / al
    tmax = 0.5 * math.log(B[3] / al) if B[3] > 0 else -INF
    tmin = 0.5 * math.log(al / B[2]) if B[2] > 0 else INF
    if tmax <= tmin or smax <= 0:
        return 0.0, 0.0

    def inner(t):
        def f_sigma(sig):
            T, S = np.meshgrid(t, sig, indexing="ij")
            e2 = np.exp(2 * T)
            coords = np.stack([np.full(T.shape, t0), lam * S, lam * (1 + S * S) / e2, -lam * e2])
            return fn.evaluate_array(coords)
        x, w = _gauss_legendre(-smax, smax, 48, 16)
        return f_sigma(x) @ w

    return _adaptive_1d(inner, tmin, tmax, tol, n=32, panels=8)


def orbital_compact_real_hyperboloid(fn: LocalTestFn, eta: XPoint, n: int = 64, panels: int = 24):
    """Second route: (1 / 2|lam|) int int f(t0, v, b, (delta - v^2)/b) dv db / |b| over the sheet sign(b) = sign(lam)."""
    v0, b0, c0 = (float(e) for e in eta.slice)
    delta = v0 * v0 + b0 * c0
    lam = math.copysign(math.sqrt(-delta), b0)
    center, half, B = _bounds(fn)
    t0 = float(eta.u)
    xv, wv = _gauss_legendre(-B[1], B[1], n, panels)
    # |c| <= B_c forces |b| >= |delta| / B_c
    bmin = abs(delta) / B[3]
    xb, wb = _gauss_legendre(math.log(bmin), math.log(max(B[2], bmin * 1.0001)), n, panels)
    bb = math.copysign(1.0, lam) * np.exp(xb)  # db / |b| = d log|b|
    V, Bm = np.meshgrid(xv, bb, indexing="ij")
    coords = np.stack([np.full(V.shape, t0), V, Bm, (delta - V * V) / Bm])
    vals = fn.evaluate_array(coords)
    return float(wv @ vals @ wb) / (2 * abs(lam))


# ---------------------------------------------------------------------------
# Levi descent

def levi_local(fn: LocalTestFn, t0, y, tau: int):
    """f_{M,v}(diag(x, conj x)) = int_K int_{F_v} f(k^{-1} (t0, [[y, alpha], [0, -y]]) k) d alpha dk, x = t0 + y sqrt(tau)."""
    if fn.place == REAL:
        return _levi_real(fn, float(t0), float(y))
    p = fn.place
    t0, y = frac(t0), frac(y)
    lo = -fn.radius_exp
    hi = max(fn.level, lo)
    step = Fraction(p) ** lo
    total = Fraction(0)
    for j in range(p ** (hi - lo)):
        alpha = step * j
        total += frac(k_average_finite(fn, tau, t0, (y, alpha, Fraction(0))))
    return total * Fraction(p) ** (-hi)


def _levi_real(fn: LocalTestFn, t0: float, y: float, n_theta: int = 64, tol: float = 1e-11) -> float:
    center, half, B = _bounds(fn)
    if abs(t0 - center[0]) > half[0]:
        return 0.0
    room = 2 * B[1] ** 2 + B[2] ** 2 + B[3] ** 2 - 2 * y * y
    if room <= 0:
        return 0.0
    A = math.sqrt(room)
    th = 2 * math.pi * np.arange(n_theta) / n_theta

    def integrand(alpha):
        al = alpha[:, None]
        v2, b2, c2 = _rot_conj(y + 0 * al, al, 0 * al, th[None, :])
        coords = np.stack([np.full(v2.shape, t0), v2, b2, c2])
        return fn.evaluate_array(coords).mean(axis=1)

    return _adaptive_1d(integrand, -A, A, tol)[0]


def levi_local_gamma(fn: LocalTestFn, t0, y, tau: int, ynorm) -> float:
    """The same local factor written through a twisted representative gamma = diag(z, 1/z).

    With n = n(sqrt(tau) a) the point gamma n theta(gamma n)^{-1} has upper-right
    entry 2 N(z) sqrt(tau) a (N(z) = ``ynorm``), and the rho-factor is |N(z)|_v^{-1}.
    Locally this differs from ``levi_local`` by |2|_v^{-1} |N(z)|_v^{-2}; the
    product over all places does not depend on z.
    """
    s = 2 * frac(ynorm)
    if fn.place == REAL:
        s = float(s)
        return levi_local(fn, t0, y, tau) / abs(s) / abs(float(ynorm))
    p = fn.place
    # a -> alpha = s a rescales the line; the a-integral is |s|_p^{-1} times the alpha-integral
    scale = Fraction(p) ** vp(s, p)
    rho = Fraction(p) ** vp(frac(ynorm), p)
    return levi_local(fn, t0, y, tau) * scale * rho


# ---------------------------------------------------------------------------
# global products

def relevant_places(f: GlobalTestFn, eta: XPoint, extra=()) -> list[int]:
    from .arith import factorize
    primes = set(f.S) | {2} | set(extra)
    for e in eta.coords:
        q = frac(e)
        for n in (q.numerator, q.denominator):
            if n not in (0, 1, -1):
                primes |= {p for p, _ in factorize(n)}
    return [REAL] + sorted(primes)


@dataclass
class GlobalOrbital:
    value: float
    local: dict = field(default_factory=dict)
    weighted: float | None = None
    local_weights: dict = field(default_factory=dict)
    stabilized: bool = True


def global_orbital(f: GlobalTestFn, eta: XPoint, depth: int = 4, extra=()) -> GlobalOrbital:
    value = 1.0
    local = {}
    stable = True
    for v in relevant_places(f, eta, extra):
        res = orbital_local(f.at(v), eta, depth)
        local[v] = res
        stable = stable and res.stabilized
        value *= float(res.value)
        if value == 0:
            break
    return GlobalOrbital(value, local, stabilized=stable)


def weighted_orbital(f: GlobalTestFn, eta: XPoint, extra=()) -> GlobalOrbital:
    """sum_v W_v prod_{w != v} O_w for diagonal eta, with O the unweighted local integrals."""
    if eta.b != 0 or eta.c != 0 or eta.v == 0:
        raise DomainError("weighted_orbital needs a diagonal regular point")
    places = relevant_places(f, eta, extra)
    O, Wt = {}, {}
    for v in places:
        O[v] = float(orbital_local(f.at(v), eta).value)
        Wt[v] = float(orbital_local(f.at(v), eta, weighted=True).value)
    unweighted = math.prod(O.values())
    weighted = 0.0
    for v in places:
        weighted += Wt[v] * math.prod(O[w] for w in places if w != v)
    return GlobalOrbital(unweighted, O, weighted, Wt)
