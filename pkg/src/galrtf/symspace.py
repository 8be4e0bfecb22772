"""The symmetric space X = {h in SL2(E) : h conj(h) = 1} in explicit coordinates.

A point of X is written u + sqrt(tau) * Y0 with u in F and Y0 = [[v, b], [c, -v]]
a traceless F-matrix, subject to u^2 - tau (v^2 + bc) = 1. In matrix form this is
[[a, sqrt(tau) b], [sqrt(tau) c, conj(a)]] with a = u + v sqrt(tau).

Conjugation by GL2(F) fixes u and acts on Y0 by the adjoint action, so all the
F-rational bookkeeping happens on (u, Y0). Matrices over E are only needed for
the twisted action of G = SL2(E) and for the Cayley transform's matrix route.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .arith import (
    DomainError,
    QuadAlg,
    QuadElem,
    abs_p,
    factorize,
    frac,
    squarefree_part,
)


class SingularError(DomainError):
    """Raised when a Cayley transform is evaluated on its singular locus."""


# ---------------------------------------------------------------------------
# 2x2 matrices over any commutative ring with + - * and (for inverses) /

class Mat2:
    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        self.a, self.b, self.c, self.d = a, b, c, d

    @classmethod
    def identity(cls, one=Fraction(1)) -> "Mat2":
        return cls(one, one * 0, one * 0, one)

    @classmethod
    def diag(cls, x, y) -> "Mat2":
        return cls(x, x * 0, x * 0, y)

    @classmethod
    def upper(cls, u, one=Fraction(1)) -> "Mat2":
        return cls(one, u, u * 0, one)

    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def __mul__(self, o):
        if isinstance(o, Mat2):
            return Mat2(
                self.a * o.a + self.b * o.c,
                self.a * o.b + self.b * o.d,
                self.c * o.a + self.d * o.c,
                self.c * o.b + self.d * o.d,
            )
        return Mat2(self.a * o, self.b * o, self.c * o, self.d * o)

    def __rmul__(self, s):
        return Mat2(s * self.a, s * self.b, s * self.c, s * self.d)

    def __add__(self, o: "Mat2"):
        return Mat2(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)

    def __sub__(self, o: "Mat2"):
        return Mat2(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)

    def __neg__(self):
        return Mat2(-self.a, -self.b, -self.c, -self.d)

    def det(self):
        return self.a * self.d - self.b * self.c

    def trace(self):
        return self.a + self.d

    def adjugate(self) -> "Mat2":
        return Mat2(self.d, -self.b, -self.c, self.a)

    def inverse(self) -> "Mat2":
        det = self.det()
        if det == 0:
            raise ZeroDivisionError("singular matrix")
        inv = 1 / det
        return self.adjugate() * inv

    def conj(self) -> "Mat2":
        """Entrywise Galois conjugation (the involution theta on G)."""
        return Mat2(*(_conj(e) for e in self.entries()))

    def map(self, fn) -> "Mat2":
        return Mat2(*(fn(e) for e in self.entries()))

    def __eq__(self, o):
        return isinstance(o, Mat2) and all(x == y for x, y in zip(self.entries(), o.entries()))

    def __hash__(self):
        return hash(self.entries())

    def __repr__(self):
        return f"[[{self.a}, {self.b}], [{self.c}, {self.d}]]"


def _conj(e):
    return e.conj() if isinstance(e, QuadElem) else e


W = Mat2(Fraction(0), Fraction(1), Fraction(-1), Fraction(0))


def n_matrix(u) -> Mat2:
    return Mat2(frac(1), frac(u), frac(0), frac(1))


def a_matrix(t) -> Mat2:
    t = frac(t)
    return Mat2(t, frac(0), frac(0), 1 / t)


def conj_traceless(g: Mat2, Y0: tuple) -> tuple:
    """(v, b, c) of g^{-1} [[v, b], [c, -v]] g for any invertible g (GL2 allowed)."""
    v, b, c = Y0
    M = Mat2(v, b, c, -v)
    det = g.det()
    R = g.adjugate() * M * g
    return (R.a / det, R.b / det, R.c / det)


# ---------------------------------------------------------------------------
# points of X

@dataclass(frozen=True)
class XPoint:
    """u + sqrt(tau) [[v, b], [c, -v]] with u^2 - tau (v^2 + bc) = 1.

    Coordinates may be exact rationals or floats; the exact constructors check
    the defining equation.
    """

    tau: int
    u: Any
    v: Any
    b: Any
    c: Any

    @classmethod
    def make(cls, tau: int, u, v, b, c, check: bool = True) -> "XPoint":
        pt = cls(tau, frac(u), frac(v), frac(b), frac(c))
        if check and not pt.is_valid():
            raise DomainError(f"{pt} does not satisfy a*conj(a) - tau*b*c = 1")
        return pt

    @classmethod
    def from_abc(cls, a: QuadElem, b, c) -> "XPoint":
        return cls.make(a.alg.core, a.x, a.y, b, c)

    @classmethod
    def identity(cls, tau: int) -> "XPoint":
        return cls.make(tau, 1, 0, 0, 0)

    @classmethod
    def from_matrix(cls, m: Mat2) -> "XPoint":
        """Read off coordinates from [[a, sqrt(tau) b], [sqrt(tau) c, conj(a)]] over E."""
        E = _algebra_of(m)
        if m.d != m.a.conj():
            raise DomainError("lower-right entry is not the conjugate of the upper-left")
        s = E.sqrt()
        b, c = m.b / s, m.c / s
        if not (b.is_rational() and c.is_rational()):
            raise DomainError("off-diagonal entries are not in sqrt(tau) * F")
        return cls.make(E.core, m.a.x, m.a.y, b.x, c.x)

    @property
    def a(self) -> QuadElem:
        return QuadElem(QuadAlg(self.tau), self.u, self.v)

    @property
    def slice(self) -> tuple:
        return (self.v, self.b, self.c)

    @property
    def coords(self) -> tuple:
        return (self.u, self.v, self.b, self.c)

    def matrix(self) -> Mat2:
        E = QuadAlg(self.tau)
        s = E.sqrt()
        return Mat2(self.a, s * self.b, s * self.c, self.a.conj())

    def is_valid(self) -> bool:
        return self.u * self.u - self.tau * (self.v * self.v + self.b * self.c) == 1

    def chi(self):
        return self.u

    def conjugate(self, g: Mat2) -> "XPoint":
        """g^{-1} x g for g in GL2(F)."""
        v, b, c = conj_traceless(g, self.slice)
        return XPoint(self.tau, self.u, v, b, c)

    def twisted(self, gamma: Mat2) -> "XPoint":
        """gamma * x * theta(gamma)^{-1} for gamma in SL2(E)."""
        return XPoint.from_matrix(gamma * self.matrix() * gamma.conj().inverse())

    def __neg__(self):
        return XPoint(self.tau, -self.u, -self.v, -self.b, -self.c)


def _algebra_of(m: Mat2) -> QuadAlg:
    for e in m.entries():
        if isinstance(e, QuadElem):
            return e.alg
    raise DomainError("matrix has no entries in a quadratic algebra")


def chi(x: XPoint):
    """The GIT invariant: half the trace."""
    return x.chi()


def to_e_matrix(g: Mat2, E: QuadAlg) -> Mat2:
    return g.map(lambda e: e if isinstance(e, QuadElem) else QuadElem(E, e))


def theta_twist(gamma: Mat2, x: XPoint) -> XPoint:
    return x.twisted(gamma)


def gamma0(E: QuadAlg) -> Mat2:
    """diag(sqrt(tau), 1/sqrt(tau)); its twisted action carries o+ onto o-."""
    s = E.sqrt()
    return Mat2(s, QuadElem(E, 0), QuadElem(E, 0), s.inverse())


def gamma0_action(x: XPoint) -> XPoint:
    """Closed form of gamma0 * x * theta(gamma0)^{-1}, valid for float coordinates too."""
    return XPoint(x.tau, -x.u, -x.v, -x.tau * x.b, -x.c / x.tau)


# ---------------------------------------------------------------------------
# slice and Cayley transform

@dataclass(frozen=True)
class SlicePoint:
    """sqrt(tau) * [[a, b], [c, -a]] with a, b, c in F."""

    tau: int
    a: Any
    b: Any
    c: Any

    @classmethod
    def make(cls, tau, a, b, c) -> "SlicePoint":
        return cls(tau, frac(a), frac(b), frac(c))

    def matrix(self) -> Mat2:
        E = QuadAlg(self.tau)
        s = E.sqrt()
        return Mat2(s * self.a, s * self.b, s * self.c, s * (-self.a))

    def minus_det(self):
        return self.tau * (self.a * self.a + self.b * self.c)

    def adjoint(self, g: Mat2) -> "SlicePoint":
        """Ad(g) Y = g Y g^{-1}."""
        v, b, c = conj_traceless(g.inverse(), (self.a, self.b, self.c))
        return SlicePoint(self.tau, v, b, c)


def scalar_cayley(eps: int, q):
    """The Cayley formula on the affine line: -eps (1 + q) / (1 - q)."""
    q = frac(q)
    if q == 1:
        raise SingularError("q = 1 is singular")
    return -eps * (1 + q) / (1 - q)


def cayley(eps: int, Y: SlicePoint) -> XPoint:
    """-eps (1 + Y)(1 - Y)^{-1}, from the closed-form entries."""
    q = Y.minus_det()
    D = 1 - q
    if D == 0:
        raise SingularError("det(1 - Y) = 0")
    return XPoint.make(
        Y.tau,
        -eps * (1 + q) / D,
        -2 * eps * Y.a / D,
        -2 * eps * Y.b / D,
        -2 * eps * Y.c / D,
    )


def cayley_matrix(eps: int, Y: SlicePoint) -> XPoint:
    """Same map computed by matrix arithmetic over E."""
    E = QuadAlg(Y.tau)
    one = Mat2.identity(QuadElem(E, 1))
    M = Y.matrix()
    if (one - M).det() == 0:
        raise SingularError("det(1 - Y) = 0")
    return XPoint.from_matrix(((one + M) * (one - M).inverse()) * QuadElem(E, -eps))


def cayley_inv(eps: int, x: XPoint) -> SlicePoint:
    """-(eps + x)(eps - x)^{-1}, divided by sqrt(tau)."""
    E = QuadAlg(x.tau)
    e = Mat2.identity(QuadElem(E, eps))
    m = x.matrix()
    if (e - m).det() == 0:
        raise SingularError("det(eps - x) = 0")
    R = -((e + m) * (e - m).inverse())
    s = E.sqrt()
    a, b, c, d = (R.a / s, R.b / s, R.c / s, R.d / s)
    if not all(z.is_rational() for z in (a, b, c, d)) or d != -a:
        raise DomainError("inverse Cayley image is not in the slice")
    return SlicePoint(x.tau, a.x, b.x, c.x)


def cayley_line_scale(eps: int, x: QuadElem) -> Fraction:
    """Coefficient of the affine map a -> N for eta = diag(x, conj x).

    Points [[x, sqrt(tau) a], [0, conj x]] go to zeta + N with
    N = -2 eps a / ((eps - x)(eps - conj x)); this returns the rational
    coefficient -2 eps / Nm(eps - x).
    """
    n = (QuadElem(x.alg, eps) - x).norm()
    if n == 0:
        raise SingularError("eta lies on the singular locus")
    return Fraction(-2 * eps) / n


def cayley_line_coordinate(eps: int, x: QuadElem, a) -> Fraction:
    """N(a) computed through the matrix inverse Cayley map (no closed form)."""
    tau = x.alg.core
    base = cayley_inv(eps, XPoint.make(tau, x.x, x.y, 0, 0))
    moved = cayley_inv(eps, XPoint.make(tau, x.x, x.y, a, 0))
    if (moved.a, moved.c) != (base.a, base.c):
        raise DomainError("image left the affine line through zeta")
    return moved.b - base.b


def image_ball_measure(eps: int, x: QuadElem, p: int, center, r: int) -> Fraction:
    """Additive measure of the image of center + p^r Z_p under a -> N(a).

    The map is affine (checked at three points of the ball), so the image is the
    ball around N(center) of radius |N(center + p^r) - N(center)|_p.
    """
    center = frac(center)
    step = Fraction(p) ** r
    n0, n1, n2 = (cayley_line_coordinate(eps, x, center + k * step) for k in range(3))
    if n2 - n1 != n1 - n0:
        raise DomainError("map is not affine on the ball")
    return abs_p(n1 - n0, p)


def adelic_abs(q) -> Fraction:
    """|q|_inf * prod_p |q|_p for nonzero rational q (1 by the product formula)."""
    q = frac(q)
    if q == 0:
        raise DomainError("zero has no adelic absolute value")
    out = abs(q)
    for p, _ in factorize(abs(q.numerator) * q.denominator):
        out *= abs_p(q, p)
    return out


# ---------------------------------------------------------------------------
# classification of geometric data

ELLIPTIC = "elliptic"
RSS = "rss-nonelliptic"
UNIP_PLUS = "unipotent-plus"
UNIP_MINUS = "unipotent-minus"


@dataclass(frozen=True)
class GeomDatum:
    t0: Fraction
    cls: str
    spl: QuadAlg

    def as_dict(self) -> dict:
        return {
            "t0": str(self.t0),
            "class": self.cls,
            "splitting_type_core": self.spl.core,
        }


def splitting_type(t0) -> QuadAlg:
    """The algebra F[T]/(T^2 - 2 t0 T + 1); split when t0^2 - 1 is a square (or zero)."""
    t0 = frac(t0)
    d = t0 * t0 - 1
    if d == 0:
        return QuadAlg(1)
    return QuadAlg(squarefree_part(d))


def classify(t0, E: QuadAlg) -> GeomDatum:
    t0 = frac(t0)
    spl = splitting_type(t0)
    if t0 == 1:
        cls = UNIP_PLUS
    elif t0 == -1:
        cls = UNIP_MINUS
    elif spl == E:
        cls = RSS
    else:
        cls = ELLIPTIC
    return GeomDatum(t0, cls, spl)


def reflect(L: QuadAlg, E: QuadAlg) -> QuadAlg:
    """The third quadratic subalgebra of L (x) E."""
    return QuadAlg(squarefree_part(L.core * E.core))


def descendant(d: GeomDatum, E: QuadAlg) -> QuadAlg:
    if d.cls in (UNIP_PLUS, UNIP_MINUS):
        raise DomainError("unipotent data have no descendant pair")
    return reflect(d.spl, E)


def cayley_sign(t0) -> int:
    """eps = -1 at t0 = 1 and +1 otherwise."""
    return -1 if frac(t0) == 1 else 1


def slice_discriminant(t0, tau: int) -> Fraction:
    """delta = (t0^2 - 1)/tau: the value of v^2 + bc on the fiber over t0."""
    t0 = frac(t0)
    return (t0 * t0 - 1) / tau


def elliptic_rep(t0, tau: int, xi) -> XPoint:
    """u = t0, Y0 = [[0, xi], [delta/xi, 0]]."""
    xi = frac(xi)
    if xi == 0:
        raise DomainError("xi must be nonzero")
    return XPoint.make(tau, t0, 0, xi, slice_discriminant(t0, tau) / xi)


def diagonal_point(x: QuadElem) -> XPoint:
    if x.norm() != 1:
        raise DomainError("diagonal entry must have norm one")
    return XPoint.make(x.alg.core, x.x, x.y, 0, 0)


# ---------------------------------------------------------------------------
# Levi retraction

def hilbert90(x: QuadElem) -> QuadElem:
    """Some y with y / conj(y) = x, for x of norm one."""
    if x.norm() != 1:
        raise DomainError("x must have norm one")
    if x == -1:
        return x.alg.sqrt()
    return 1 + x


@dataclass(frozen=True)
class Retraction:
    eta_M: XPoint
    eta_N: Mat2
    n1: Mat2
    gamma: Mat2


def levi_retract(eta: XPoint) -> Retraction:
    """eta = eta_M eta_N with eta_M diagonal, and gamma n1 a twisted representative."""
    if eta.c != 0:
        raise DomainError("levi_retract needs a point with c = 0")
    E = QuadAlg(eta.tau)
    x = eta.a
    zero, one = QuadElem(E, 0), QuadElem(E, 1)
    s = E.sqrt()
    eta_M = XPoint.make(eta.tau, eta.u, eta.v, 0, 0)
    eta_N = Mat2(one, s * eta.b / x, zero, one)
    y = hilbert90(x)
    gamma = Mat2(y, zero, zero, y.inverse())
    n1 = Mat2(one, s * eta.b / (2 * y * y.conj()), zero, one)
    return Retraction(eta_M, eta_N, n1, gamma)


def retraction_rebuild(r: Retraction) -> XPoint:
    g = r.gamma * r.n1
    return XPoint.from_matrix(g * g.conj().inverse())


# ---------------------------------------------------------------------------
# unipotent orbits

def unipotent_rep(tau: int, b) -> XPoint:
    """[[1, sqrt(tau) b], [0, 1]] in o+."""
    b = frac(b)
    if b == 0:
        raise DomainError("b must be nonzero")
    return XPoint.make(tau, 1, 0, b, 0)


def square_class(b) -> int:
    return squarefree_part(b)


def line_point(tau: int, b, x: Mat2 | None = None, twisted_minus: bool = False) -> XPoint:
    """x^{-1} n(sqrt(tau) b) theta(n(sqrt(tau) b))^{-1} x, optionally moved to o- by gamma0."""
    pt = XPoint(tau, 1, 0 * b, 2 * b, 0 * b)
    if twisted_minus:
        pt = gamma0_action(pt)
    return pt if x is None else pt.conjugate(x)
