"""Factorizable test functions on X(A).

Finite places carry either the basic function (indicator of the integral
points) or a finite combination of coordinate balls of a fixed level.
The real place carries a smooth profile of a weighted distance to a center.

Integral points: u, v in Z_p and b, c in 2 Z_p. At odd p the factor 2 is a
unit; at p = 2 it is what makes the line functions of the basic function equal
to the indicator of Z_2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .arith import DomainError, factorize, frac, vp
from .symspace import XPoint

REAL = 0


def _coords(pt) -> tuple:
    if isinstance(pt, XPoint):
        return pt.coords
    return tuple(pt)


class LocalTestFn:
    place: int = REAL
    #: finite places: f vanishes unless every coordinate has valuation >= -radius_exp
    radius_exp: int = 0
    #: finite places: f is constant on cosets of p^level in each coordinate
    level: int = 0
    #: True when f(k^{-1} y k) = f(y) for k in GL2(Z_p) (or O(2) at the real place)
    k_invariant: bool = False

    def __call__(self, pt):
        raise NotImplementedError

    def ball_list(self):
        """[(center, per-coordinate levels, value)] when f is a sum of coordinate boxes, else None."""
        return None

    def describe(self) -> dict:
        raise NotImplementedError


class BasicFn(LocalTestFn):
    """Indicator of X(Z_p)."""

    k_invariant = True
    radius_exp = 0

    def __init__(self, p: int):
        self.place = p
        self.level = 1 if p == 2 else 0

    def __call__(self, pt) -> int:
        u, v, b, c = _coords(pt)
        p = self.place
        if vp(frac(u), p) < 0 or vp(frac(v), p) < 0:
            return 0
        need = 1 if p == 2 else 0
        return int(vp(frac(b), p) >= need and vp(frac(c), p) >= need)

    def ball_list(self):
        need = 1 if self.place == 2 else 0
        return [((Fraction(0),) * 4, (0, 0, need, need), Fraction(1))]

    def describe(self) -> dict:
        return {"place": self.place, "kind": "basic"}

    def __repr__(self):
        return f"BasicFn({self.place})"


class BallFn(LocalTestFn):
    """sum of value * [y in center + p^level Z_p^4] over a list of balls."""

    def __init__(self, p: int, level: int, balls: Sequence[tuple[Sequence, object]]):
        if level < 0:
            raise DomainError("level must be nonnegative")
        self.place = p
        self.level = level
        self.balls = [(tuple(frac(c) for c in center), frac(value)) for center, value in balls]
        for center, _ in self.balls:
            if len(center) != 4:
                raise DomainError("ball centers are (u, v, b, c) tuples")
        worst = 0
        for center, _ in self.balls:
            for c in center:
                worst = max(worst, -min(vp(c, p), level))
        self.radius_exp = worst

    def __call__(self, pt):
        y = tuple(frac(c) for c in _coords(pt))
        p, m = self.place, self.level
        total = Fraction(0)
        for center, value in self.balls:
            if all(vp(a - c, p) >= m for a, c in zip(y, center)):
                total += value
        return total

    def ball_list(self):
        return [(center, (self.level,) * 4, value) for center, value in self.balls]

    def describe(self) -> dict:
        return {
            "place": self.place,
            "kind": "balls",
            "level": self.level,
            "balls": [{"center": [str(c) for c in ctr], "value": str(v)} for ctr, v in self.balls],
        }


def conjugated_fn(fn: LocalTestFn, g) -> LocalTestFn:
    """y -> f(g y g^{-1}) for g in GL2(Z_p); balls go to balls of the same level."""
    from .symspace import conj_traceless
    p = fn.place
    if any(vp(frac(e), p) < 0 for e in g.entries()) or vp(frac(g.det()), p) != 0:
        raise DomainError("g must lie in GL2(Z_p)")
    if fn.k_invariant:
        return fn
    if isinstance(fn, BallFn):
        balls = []
        for center, value in fn.balls:
            balls.append(((center[0],) + conj_traceless(g, center[1:]), value))
        return BallFn(p, fn.level, balls)
    if isinstance(fn, CombinationFn):
        return CombinationFn([(c, conjugated_fn(t, g)) for c, t in fn.terms])
    raise DomainError(f"cannot conjugate {fn!r}")


class CombinationFn(LocalTestFn):
    """A finite linear combination of finite-place test functions at one prime."""

    def __init__(self, terms: Sequence[tuple[object, LocalTestFn]]):
        places = {fn.place for _, fn in terms}
        if len(places) != 1:
            raise DomainError("all terms must live at the same place")
        self.terms = [(c, fn) for c, fn in terms]
        self.place = places.pop()
        self.level = max(fn.level for _, fn in terms)
        self.radius_exp = max(fn.radius_exp for _, fn in terms)
        self.k_invariant = all(fn.k_invariant for _, fn in terms)

    def __call__(self, pt):
        return sum((c * fn(pt) for c, fn in self.terms), 0)

    def ball_list(self):
        out = []
        for coef, fn in self.terms:
            sub = fn.ball_list()
            if sub is None:
                return None
            out += [(center, levels, frac(coef) * value) for center, levels, value in sub]
        return out

    def describe(self) -> dict:
        return {"place": self.place, "kind": "combination",
                "terms": [{"coef": str(c), "fn": fn.describe()} for c, fn in self.terms]}


PROFILES = ("gauss", "bump")
GAUSS_CUTOFF_Q = 14.0  # poly(q) e^{-pi q} is below 1e-17 past this for the supported polynomials


class ArchFn(LocalTestFn):
    """profile(q) with q = sum_i ((coord_i - center_i) / scale_i)^2.

    'gauss': (sum_k poly_k q^k) e^{-pi q};  'bump': exp(-1/(1 - q)) for q < 1.
    Different scales per coordinate break O(2)-invariance, which is what the
    compact averages are meant to see.
    """

    place = REAL

    def __init__(self, center=(1.0, 0.0, 0.0, 0.0), scales=(1.0, 1.0, 1.0, 1.0), profile="gauss",
                 poly=(1.0,), amplitude=1.0):
        if profile not in PROFILES:
            raise DomainError(f"profile must be one of {PROFILES}")
        self.center = np.array([float(c) for c in center])
        self.scales = np.array([float(s) for s in scales])
        if np.any(self.scales <= 0):
            raise DomainError("scales must be positive")
        self.profile = profile
        self.poly = tuple(float(a) for a in poly)
        self.amplitude = float(amplitude)
        self.k_invariant = False

    def _profile(self, q):
        q = np.asarray(q, dtype=float)
        if self.profile == "gauss":
            poly = np.zeros_like(q)
            for a in reversed(self.poly):
                poly = poly * q + a
            return self.amplitude * poly * np.exp(-math.pi * q)
        out = np.zeros_like(q)
        inside = q < 1
        out[inside] = np.exp(-1.0 / (1.0 - q[inside]))
        return self.amplitude * out

    def q_of(self, coords) -> np.ndarray:
        y = np.asarray(coords, dtype=float)
        d = (y - self.center.reshape((4,) + (1,) * (y.ndim - 1))) / self.scales.reshape((4,) + (1,) * (y.ndim - 1))
        return np.sum(d * d, axis=0)

    def evaluate_array(self, coords) -> np.ndarray:
        """coords: array of shape (4, ...) holding u, v, b, c."""
        return self._profile(self.q_of(coords))

    def __call__(self, pt) -> float:
        return float(self.evaluate_array(np.array([float(c) for c in _coords(pt)])))

    @property
    def q_cutoff(self) -> float:
        return 1.0 if self.profile == "bump" else GAUSS_CUTOFF_Q

    def support_box(self):
        """(center, half-widths) of a box outside which f is below 1e-17."""
        return self.center, self.scales * math.sqrt(self.q_cutoff)

    def scaled(self, factor: float) -> "ArchFn":
        return ArchFn(self.center, self.scales, self.profile, self.poly, self.amplitude * factor)

    def describe(self) -> dict:
        return {
            "place": 0,
            "kind": "arch",
            "profile": self.profile,
            "center": self.center.tolist(),
            "scales": self.scales.tolist(),
            "poly": list(self.poly),
            "amplitude": self.amplitude,
        }


class ArchCombination(LocalTestFn):
    place = REAL

    def __init__(self, terms: Sequence[tuple[float, ArchFn]]):
        self.terms = [(float(c), fn) for c, fn in terms]

    def evaluate_array(self, coords):
        return sum(c * fn.evaluate_array(coords) for c, fn in self.terms)

    def __call__(self, pt) -> float:
        return float(self.evaluate_array(np.array([float(c) for c in _coords(pt)])))

    def support_box(self):
        lo = np.min([fn.support_box()[0] - fn.support_box()[1] for _, fn in self.terms], axis=0)
        hi = np.max([fn.support_box()[0] + fn.support_box()[1] for _, fn in self.terms], axis=0)
        return (lo + hi) / 2, (hi - lo) / 2

    def describe(self) -> dict:
        return {"place": 0, "kind": "arch-combination",
                "terms": [{"coef": c, "fn": fn.describe()} for c, fn in self.terms]}


def arch_sum(f: LocalTestFn, g: LocalTestFn) -> ArchCombination:
    return ArchCombination([(1.0, f), (1.0, g)])


@dataclass
class GlobalTestFn:
    """Factorizable f = f_inf (x) prod_{p in S} f_p (x) prod_{p not in S} basic."""

    tau: int
    local: dict = field(default_factory=dict)

    def __post_init__(self):
        if REAL not in self.local:
            raise DomainError("the real place must carry a test function")
        for v, fn in self.local.items():
            if fn.place != v:
                raise DomainError(f"local function at {v} reports place {fn.place}")

    @property
    def S(self) -> list[int]:
        """Finite places where f is not basic."""
        return sorted(v for v, fn in self.local.items() if v != REAL and not isinstance(fn, BasicFn))

    def at(self, place: int) -> LocalTestFn:
        fn = self.local.get(place)
        return fn if fn is not None else BasicFn(place)

    def relevant_places(self, extra: Iterable[int] = ()) -> list[int]:
        return sorted(set(self.local) | set(extra) | {2})

    def evaluate_rational(self, pt: XPoint):
        """f at a rational point: real value times finite values (basic outside S)."""
        value = self.at(REAL)(pt)
        coords = [frac(c) for c in pt.coords]
        dens = 1
        for c in coords:
            dens *= c.denominator
        primes = set(self.S)
        primes |= {p for p, _ in factorize(dens)} if dens > 1 else set()
        primes.add(2)
        for p in sorted(primes):
            value = value * self.at(p)(pt)
            if value == 0:
                return 0
        return value

    def replace(self, place: int, fn: LocalTestFn) -> "GlobalTestFn":
        out = dict(self.local)
        out[place] = fn
        return GlobalTestFn(self.tau, out)

    def scaled(self, factor: float) -> "GlobalTestFn":
        return self.replace(REAL, _scaled_arch(self.at(REAL), factor))

    def describe(self) -> dict:
        return {"tau": self.tau, "places": {str(v): fn.describe() for v, fn in sorted(self.local.items())}}


def _scaled_arch(fn: LocalTestFn, factor: float) -> LocalTestFn:
    if isinstance(fn, ArchFn):
        return fn.scaled(factor)
    return ArchCombination([(factor, fn)])


def gaussian_fn(tau: int, center=(1.0, 0.0, 0.0, 0.0), scales=(1.0, 1.0, 1.0, 1.0), finite=None) -> GlobalTestFn:
    local = {REAL: ArchFn(center, scales, "gauss")}
    local.update(finite or {})
    return GlobalTestFn(tau, local)
