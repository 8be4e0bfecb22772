"""Exact elements of cyclotomic fields Q(zeta_n), reduced modulo the n-th cyclotomic polynomial."""

from __future__ import annotations

import cmath
from fractions import Fraction
from functools import lru_cache
from math import gcd


def _poly_divmod(num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    # coefficient lists, lowest degree first; den monic
    num = list(num)
    q = [0] * max(len(num) - len(den) + 1, 1)
    for i in range(len(num) - len(den), -1, -1):
        c = num[i + len(den) - 1]
        if c:
            q[i] = c
            for j, d in enumerate(den):
                num[i + j] -= c * d
    rem = num[: len(den) - 1]
    return q, rem


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            poly, rem = _poly_divmod(poly, list(cyclotomic_poly(d)))
            assert not any(rem)
    while poly and poly[-1] == 0:
        poly.pop()
    return tuple(poly)


class Cyclo:
    """sum_k c_k zeta_n^k with zeta_n = exp(2 pi i / n), in canonical reduced form."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs=None):
        self.n = n
        deg = len(cyclotomic_poly(n)) - 1
        raw = [Fraction(0)] * n
        if coeffs:
            items = coeffs.items() if isinstance(coeffs, dict) else enumerate(coeffs)
            for k, c in items:
                raw[k % n] += Fraction(c)
        self.coeffs = tuple(self._reduce(raw, deg))

    def _reduce(self, raw: list[Fraction], deg: int) -> list[Fraction]:
        phi = cyclotomic_poly(self.n)
        raw = list(raw)
        for i in range(len(raw) - 1, deg - 1, -1):
            c = raw[i]
            if c:
                shift = i - deg
                for j, d in enumerate(phi):
                    raw[shift + j] -= c * d
        return raw[:deg]

    @classmethod
    def zeta(cls, n: int, k: int = 1) -> "Cyclo":
        return cls(n, {k % n: 1})

    @classmethod
    def rational(cls, n: int, q) -> "Cyclo":
        return cls(n, {0: q})

    def _lift(self, other) -> "Cyclo":
        if isinstance(other, Cyclo):
            if other.n == self.n:
                return other
            raise ValueError("mixing cyclotomic fields of different orders")
        return Cyclo.rational(self.n, other)

    def __add__(self, other):
        o = self._lift(other)
        return Cyclo(self.n, [a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return Cyclo(self.n, [-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __mul__(self, other):
        if not isinstance(other, Cyclo):
            q = Fraction(other)
            return Cyclo(self.n, [a * q for a in self.coeffs])
        o = self._lift(other)
        prod = [Fraction(0)] * self.n
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    if b:
                        prod[(i + j) % self.n] += a * b
        return Cyclo(self.n, prod)

    __rmul__ = __mul__

    def conj(self) -> "Cyclo":
        """Complex conjugation zeta -> zeta^{-1}."""
        return Cyclo(self.n, {(-k) % self.n: c for k, c in enumerate(self.coeffs) if c})

    def embed(self, m: int) -> "Cyclo":
        """The same number inside Q(zeta_m), n | m."""
        if m % self.n:
            raise ValueError("target order must be a multiple")
        step = m // self.n
        return Cyclo(m, {k * step: c for k, c in enumerate(self.coeffs) if c})

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not a rational element")
        return self.coeffs[0] if self.coeffs else Fraction(0)

    def to_complex(self) -> complex:
        z = cmath.exp(2j * cmath.pi / self.n)
        return sum(complex(c) * z ** k for k, c in enumerate(self.coeffs))

    def __eq__(self, other):
        try:
            o = self._lift(other)
        except (ValueError, TypeError):
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        return hash((self.n, self.coeffs))

    def __repr__(self):
        terms = [f"{c}*z^{k}" for k, c in enumerate(self.coeffs) if c]
        return f"Cyclo[{self.n}](" + (" + ".join(terms) or "0") + ")"


def common_order(*ns: int) -> int:
    out = 1
    for n in ns:
        out = out * n // gcd(out, n)
    return out
