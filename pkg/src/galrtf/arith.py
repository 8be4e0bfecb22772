"""Exact arithmetic substrate: rationals, quadratic algebras, p-adic numbers,
quadratic characters.

Everything here is immutable. Rationals are ``fractions.Fraction``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational as _RationalABC

INF = math.inf


class DomainError(ValueError):
    """Input outside the domain of an operation."""


class PrecisionError(ArithmeticError):
    """Not enough p-adic precision to decide a question."""


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, _RationalABC)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot coerce {x!r} to an exact rational")


# ---------------------------------------------------------------------------
# integers

@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of |n| by trial division, as ((p, e), ...)."""
    n = abs(int(n))
    if n == 0:
        raise DomainError("cannot factor 0")
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def is_prime(n: int) -> bool:
    return n >= 2 and factorize(n) == ((n, 1),)


def primes_up_to(n: int) -> list[int]:
    sieve = bytearray([1]) * (n + 1)
    for i in range(min(2, n + 1)):
        sieve[i] = 0
    for i in range(2, int(n ** 0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i, flag in enumerate(sieve) if flag]


def squarefree_part(n) -> int:
    """Signed squarefree s with n = s * m^2. Rationals are accepted: a/b ~ a*b."""
    q = frac(n)
    if q == 0:
        raise DomainError("squarefree_part(0) is undefined")
    s = 1
    for part in (q.numerator, q.denominator):
        for p, e in factorize(part):
            if e % 2:
                s *= p
    return s if q > 0 else -s


def vp(x, p: int):
    """p-adic valuation of a rational; +inf at 0."""
    q = frac(x)
    if q == 0:
        return INF
    v = 0
    num, den = q.numerator, q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def abs_p(x, p: int) -> Fraction:
    """Normalized p-adic absolute value of a rational."""
    v = vp(x, p)
    if v == INF:
        return Fraction(0)
    return Fraction(p) ** (-v)


def unit_part(x, p: int) -> Fraction:
    q = frac(x)
    return q / Fraction(p) ** vp(q, p)


def sqrt_mod_prime_power(a: int, p: int, prec: int) -> int:
    """A square root of the unit a modulo p^prec (Hensel lifting)."""
    mod = p ** prec
    a %= mod
    if p == 2:
        if a % 8 != 1:
            raise DomainError("not a 2-adic square")
        r = 1
        for k in range(3, prec):
            if (r * r - a) % (2 ** (k + 1)) != 0:
                r += 2 ** (k - 1)
        return r % mod
    if legendre(a, p) != 1:
        raise DomainError("not a p-adic square")
    r = next(r for r in range(1, p) if (r * r - a) % p == 0)
    for _ in range(prec.bit_length() + 1):
        r = (r - (r * r - a) * pow(2 * r, -1, mod)) % mod
    return r


def is_padic_square(q, p: int) -> bool:
    q = frac(q)
    if q == 0:
        return True
    v = vp(q, p)
    if v % 2:
        return False
    w = unit_part(q, p)
    n = w.numerator * pow(w.denominator, -1, 8 if p == 2 else p)
    return n % 8 == 1 if p == 2 else legendre(n, p) == 1


def padic_sqrt(q, p: int, prec: int = 40) -> Fraction:
    """Rational r with r^2 = q to relative precision p^prec, or DomainError if q is not a square."""
    q = frac(q)
    if q == 0:
        return Fraction(0)
    if not is_padic_square(q, p):
        raise DomainError(f"{q} is not a square in Q_{p}")
    v = vp(q, p)
    w = unit_part(q, p)
    mod = p ** (prec + 3)
    n = w.numerator * pow(w.denominator, -1, mod) % mod
    return Fraction(p) ** (v // 2) * sqrt_mod_prime_power(n, p, prec + 3)


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D|n)."""
    D, n = int(D), int(n)
    if n == 0:
        return 1 if abs(D) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if D < 0:
            result = -result
    v2 = 0
    while n % 2 == 0:
        n //= 2
        v2 += 1
    if v2:
        if D % 2 == 0:
            return 0
        if v2 % 2 and D % 8 in (3, 5):
            result = -result
    # Jacobi symbol (D|n) for odd n > 0
    a = D % n if n > 1 else 0
    if n == 1:
        return result
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def hilbert_symbol(a, b, p) -> int:
    """Hilbert symbol (a, b)_p for nonzero rationals; p = 0 means the real place."""
    a, b = frac(a), frac(b)
    if a == 0 or b == 0:
        raise DomainError("Hilbert symbol needs nonzero arguments")
    if p == 0:
        return -1 if (a < 0 and b < 0) else 1
    # rationals are equivalent to integers modulo squares
    ai = a.numerator * a.denominator
    bi = b.numerator * b.denominator
    alpha, beta = vp(ai, p), vp(bi, p)
    u, v = ai // p ** alpha, bi // p ** beta
    if p != 2:
        eps = (p - 1) // 2
        sign = (-1) ** ((alpha * beta * eps) % 2)
        return sign * legendre(u, p) ** (beta % 2) * legendre(v, p) ** (alpha % 2)
    e_u, e_v = ((u - 1) // 2) % 2, ((v - 1) // 2) % 2
    w_u, w_v = ((u * u - 1) // 8) % 2, ((v * v - 1) // 8) % 2
    return (-1) ** ((e_u * e_v + alpha * w_v + beta * w_u) % 2)


def is_fundamental_discriminant(D: int) -> bool:
    if D == 1:
        return True
    if D in (0,):
        return False
    if D % 4 == 1:
        return squarefree_part(D) == D
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and squarefree_part(m) == m
    return False


def fundamental_discriminant(core: int) -> int:
    """Discriminant of Q(sqrt(core)) for squarefree core != 1."""
    return core if core % 4 == 1 else 4 * core


# ---------------------------------------------------------------------------
# quadratic etale algebras

class QuadAlg:
    """Quadratic etale Q-algebra Q[t]/(t^2 - core); core = 1 is the split algebra."""

    __slots__ = ("core",)

    def __init__(self, core: int):
        core = int(core)
        if core == 0:
            raise DomainError("core must be nonzero")
        if squarefree_part(core) != core:
            raise DomainError(f"core {core} is not squarefree")
        object.__setattr__(self, "core", core)

    def __setattr__(self, *_):
        raise AttributeError("QuadAlg is immutable")

    @classmethod
    def from_value(cls, d) -> "QuadAlg":
        """Algebra Q(sqrt(d)) for any nonzero rational d."""
        return cls(squarefree_part(d))

    @property
    def is_split(self) -> bool:
        return self.core == 1

    @property
    def discriminant(self) -> int:
        return 1 if self.is_split else fundamental_discriminant(self.core)

    def sqrt(self) -> "QuadElem":
        return QuadElem(self, 0, 1)

    def __call__(self, x, y=0) -> "QuadElem":
        return QuadElem(self, x, y)

    def __eq__(self, other):
        return isinstance(other, QuadAlg) and other.core == self.core

    def __hash__(self):
        return hash(("QuadAlg", self.core))

    def __repr__(self):
        return "QuadAlg(split)" if self.is_split else f"QuadAlg({self.core})"


def local_splitting(E: QuadAlg, p: int) -> str:
    """'split', 'inert' or 'ramified' for the prime p in E."""
    if E.is_split:
        return "split"
    k = kronecker(E.discriminant, p)
    return {1: "split", -1: "inert", 0: "ramified"}[k]


class QuadElem:
    """x + y*sqrt(core) in a QuadAlg, with exact rational coordinates."""

    __slots__ = ("alg", "x", "y")

    def __init__(self, alg: QuadAlg, x, y=0):
        object.__setattr__(self, "alg", alg)
        object.__setattr__(self, "x", frac(x))
        object.__setattr__(self, "y", frac(y))

    def __setattr__(self, *_):
        raise AttributeError("QuadElem is immutable")

    def _coerce(self, other):
        if isinstance(other, QuadElem):
            if other.alg != self.alg:
                raise DomainError("elements of different algebras")
            return other
        return QuadElem(self.alg, frac(other), 0)

    def __add__(self, other):
        o = self._coerce(other)
        return QuadElem(self.alg, self.x + o.x, self.y + o.y)

    __radd__ = __add__

    def __neg__(self):
        return QuadElem(self.alg, -self.x, -self.y)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        d = self.alg.core
        return QuadElem(self.alg, self.x * o.x + d * self.y * o.y, self.x * o.y + self.y * o.x)

    __rmul__ = __mul__

    def conj(self) -> "QuadElem":
        return QuadElem(self.alg, self.x, -self.y)

    def norm(self) -> Fraction:
        return self.x * self.x - self.alg.core * self.y * self.y

    def trace(self) -> Fraction:
        return 2 * self.x

    def inverse(self) -> "QuadElem":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError(f"{self} is not invertible")
        c = self.conj()
        return QuadElem(self.alg, c.x / n, c.y / n)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = QuadElem(self.alg, 1, 0)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def is_rational(self) -> bool:
        return self.y == 0

    def components(self) -> tuple[Fraction, Fraction]:
        """Idempotent coordinates (x + y, x - y) of an element of the split algebra."""
        if not self.alg.is_split:
            raise DomainError("components are defined for the split algebra only")
        return self.x + self.y, self.x - self.y

    def to_complex(self, sign: int = 1) -> complex:
        """Image under the embedding sending sqrt(core) to sign * principal root."""
        d = self.alg.core
        r = math.sqrt(abs(d))
        if d > 0:
            return complex(float(self.x) + sign * r * float(self.y))
        return complex(float(self.x), sign * r * float(self.y))

    def __eq__(self, other):
        if isinstance(other, QuadElem):
            return self.alg == other.alg and self.x == other.x and self.y == other.y
        try:
            q = frac(other)
        except TypeError:
            return NotImplemented
        return self.y == 0 and self.x == q

    def __hash__(self):
        return hash((self.alg.core, self.x, self.y))

    def __repr__(self):
        if self.y == 0:
            return f"{self.x}"
        return f"({self.x} + {self.y}*sqrt({self.alg.core}))"


# ---------------------------------------------------------------------------
# p-adic numbers with fixed relative precision

class PadicElem:
    """p^valuation * unit, the unit known modulo p^precision.

    A zero is represented with ``unit == 0``; ``valuation`` then holds the
    absolute precision (``INF`` for an exact zero).
    """

    __slots__ = ("prime", "valuation", "unit", "precision")

    DEFAULT_PRECISION = 20

    def __init__(self, prime: int, valuation, unit: int, precision: int):
        if precision <= 0 and unit != 0:
            raise PrecisionError("relative precision must be positive")
        if unit != 0:
            unit %= prime ** precision
            if unit % prime == 0:
                raise DomainError("leading digit must be nonzero")
        object.__setattr__(self, "prime", prime)
        object.__setattr__(self, "valuation", valuation)
        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "precision", precision if unit else 0)

    def __setattr__(self, *_):
        raise AttributeError("PadicElem is immutable")

    @classmethod
    def from_rational(cls, x, p: int, precision: int = DEFAULT_PRECISION) -> "PadicElem":
        q = frac(x)
        if q == 0:
            return cls(p, INF, 0, 0)
        v = vp(q, p)
        u = unit_part(q, p)
        mod = p ** precision
        unit = (u.numerator * pow(u.denominator, -1, mod)) % mod
        return cls(p, v, unit, precision)

    @classmethod
    def zero(cls, p: int, absolute_precision=INF) -> "PadicElem":
        return cls(p, absolute_precision, 0, 0)

    @property
    def is_zero(self) -> bool:
        return self.unit == 0

    @property
    def absolute_precision(self):
        return self.valuation if self.is_zero else self.valuation + self.precision

    def digits(self) -> list[int]:
        """Base-p digits of the unit, least significant first."""
        out, u = [], self.unit
        for _ in range(self.precision):
            out.append(u % self.prime)
            u //= self.prime
        return out

    def _check(self, other) -> "PadicElem":
        if not isinstance(other, PadicElem):
            other = PadicElem.from_rational(other, self.prime, max(self.precision, 1) + 64)
        if other.prime != self.prime:
            raise DomainError("mixing different primes")
        return other

    def __add__(self, other):
        o = self._check(other)
        p = self.prime
        if self.is_zero and self.valuation == INF:
            return o
        if o.is_zero and o.valuation == INF:
            return self
        A = min(self.absolute_precision, o.absolute_precision)
        terms = [t for t in (self, o) if not t.is_zero]
        if not terms:
            return PadicElem.zero(p, A)
        v = min(t.valuation for t in terms)
        if A <= v:
            return PadicElem.zero(p, A)
        mod = p ** (A - v)
        total = sum(t.unit * p ** (t.valuation - v) for t in terms) % mod
        if total == 0:
            return PadicElem.zero(p, A)
        k = 0
        while total % p == 0:
            total //= p
            k += 1
        return PadicElem(p, v + k, total, A - v - k)

    __radd__ = __add__

    def __neg__(self):
        if self.is_zero:
            return self
        return PadicElem(self.prime, self.valuation, -self.unit, self.precision)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        o = self._check(other)
        p = self.prime
        if self.is_zero or o.is_zero:
            # absolute precision of a product with an inexact zero
            if (self.is_zero and self.valuation == INF) or (o.is_zero and o.valuation == INF):
                return PadicElem.zero(p)
            if self.is_zero and o.is_zero:
                return PadicElem.zero(p, self.valuation + o.valuation)
            z, nz = (self, o) if self.is_zero else (o, self)
            return PadicElem.zero(p, z.valuation + nz.valuation)
        prec = min(self.precision, o.precision)
        return PadicElem(p, self.valuation + o.valuation, (self.unit * o.unit) % p ** prec, prec)

    __rmul__ = __mul__

    def inverse(self) -> "PadicElem":
        if self.is_zero:
            raise ZeroDivisionError("inverse of a p-adic zero")
        mod = self.prime ** self.precision
        return PadicElem(self.prime, -self.valuation, pow(self.unit, -1, mod), self.precision)

    def __truediv__(self, other):
        return self * self._check(other).inverse()

    def __rtruediv__(self, other):
        return self._check(other) * self.inverse()

    def to_rational(self) -> Fraction:
        """The integer-unit representative times p^valuation."""
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.prime) ** self.valuation

    def __eq__(self, other):
        try:
            o = self._check(other)
        except (DomainError, TypeError):
            return NotImplemented
        return (self - o).is_zero

    def __hash__(self):
        raise TypeError("PadicElem equality is only up to precision; not hashable")

    def __repr__(self):
        if self.is_zero:
            return f"O({self.prime}^{self.valuation})" if self.valuation != INF else "0"
        return f"{self.prime}^{self.valuation}*{self.unit} + O({self.prime}^{self.absolute_precision})"


def padic_abs(x: PadicElem) -> Fraction:
    """Normalized absolute value p^(-valuation); a zero has absolute value 0."""
    if x.is_zero:
        return Fraction(0)
    return Fraction(x.prime) ** (-x.valuation)


def padic_valuation(x) -> float | int:
    if isinstance(x, PadicElem):
        return x.valuation
    raise TypeError("expected PadicElem")


# ---------------------------------------------------------------------------
# quadratic characters of the idele class group

class QuadraticCharacter:
    """The quadratic Hecke character attached to Q(sqrt(D)).

    Local components are Hilbert symbols ``t -> (t, D)_v``; the trivial
    character has ``D = 1``.
    """

    __slots__ = ("D",)

    def __init__(self, D: int):
        D = int(D)
        if not is_fundamental_discriminant(D):
            raise DomainError(f"{D} is not a fundamental discriminant")
        object.__setattr__(self, "D", D)

    def __setattr__(self, *_):
        raise AttributeError("QuadraticCharacter is immutable")

    @classmethod
    def of_algebra(cls, L: QuadAlg) -> "QuadraticCharacter":
        return cls(L.discriminant)

    @property
    def is_trivial(self) -> bool:
        return self.D == 1

    def ramified_primes(self) -> list[int]:
        return [] if self.is_trivial else [p for p, _ in factorize(self.D)]

    def is_ramified(self, p: int) -> bool:
        return (not self.is_trivial) and self.D % p == 0

    def conductor_exponent(self, p: int) -> int:
        if not self.is_ramified(p):
            return 0
        if p != 2:
            return 1
        return 3 if self.D % 8 == 0 else 2

    def local(self, v, t) -> int:
        """kappa_v(t) at the place v (a prime, or 0 for the real place)."""
        if self.is_trivial:
            return 1
        return hilbert_symbol(t, self.D, v)

    def at_prime(self, p: int) -> int:
        """kappa_p(p) when unramified; this is the Kronecker symbol (D|p)."""
        return kronecker(self.D, p) if not self.is_trivial else 1

    def is_odd(self) -> bool:
        return self.D < 0

    def __call__(self, v, t) -> int:
        return self.local(v, t)

    def __eq__(self, other):
        return isinstance(other, QuadraticCharacter) and other.D == self.D

    def __hash__(self):
        return hash(("kappa", self.D))

    def __repr__(self):
        return f"QuadraticCharacter({self.D})"


def quadratic_characters_unramified_outside(primes, include_trivial=True) -> list[QuadraticCharacter]:
    """All quadratic characters with conductor supported on ``primes`` (plus infinity)."""
    primes = sorted(set(int(p) for p in primes))
    out = []
    odd = [p for p in primes if p != 2]
    cores = set()
    from itertools import product
    for signs in (1, -1):
        for mask in product((0, 1), repeat=len(odd)):
            base = signs
            for p, m in zip(odd, mask):
                if m:
                    base *= p
            cores.add(base)
            if 2 in primes:
                cores.add(2 * base)
    for c in sorted(cores):
        if c == 1:
            if include_trivial:
                out.append(QuadraticCharacter(1))
            continue
        D = fundamental_discriminant(c)
        if all(q in primes for q, _ in factorize(D)):
            out.append(QuadraticCharacter(D))
    return out
