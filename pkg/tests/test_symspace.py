from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from galrtf.arith import DomainError, QuadAlg, QuadElem, squarefree_part
from galrtf.symspace import (ELLIPTIC, RSS, UNIP_MINUS, UNIP_PLUS, Mat2, SingularError, SlicePoint, XPoint,
                             adelic_abs, cayley, cayley_inv, cayley_line_coordinate, cayley_line_scale,
                             cayley_matrix, classify, conj_traceless, descendant, elliptic_rep, gamma0,
                             gamma0_action, levi_retract, line_point, reflect, retraction_rebuild,
                             slice_discriminant, unipotent_rep)

rationals = st.builds(Fraction, st.integers(-40, 40), st.integers(1, 9))
nonzero = rationals.filter(bool)
taus = st.sampled_from([-1, 2, 3, -5, 7])


@st.composite
def sl2_rational(draw):
    a, b, c = draw(nonzero), draw(rationals), draw(rationals)
    # d solves ad - bc = 1
    return Mat2(a, b, c, (1 + b * c) / a)


@st.composite
def slice_points(draw):
    tau = draw(taus)
    Y = SlicePoint.make(tau, draw(rationals), draw(rationals), draw(rationals))
    assume(Y.minus_det() != 1)
    return Y


@given(slice_points(), st.sampled_from([1, -1]))
def test_cayley_lands_in_X_and_inverts(Y, eps):
    x = cayley(eps, Y)
    assert x.is_valid()
    assert cayley_inv(eps, x) == Y


@given(slice_points(), st.sampled_from([1, -1]))
def test_cayley_closed_form_matches_matrix_route(Y, eps):
    assert cayley(eps, Y) == cayley_matrix(eps, Y)


@given(slice_points(), sl2_rational(), st.sampled_from([1, -1]))
def test_cayley_is_equivariant(Y, g, eps):
    # g kappa(Y) g^{-1} = kappa(g Y g^{-1})
    assert cayley(eps, Y).conjugate(g.inverse()) == cayley(eps, Y.adjoint(g))


@given(slice_points())
def test_cayley_trace(Y):
    q = Y.minus_det()
    assert cayley(1, Y).u == -(1 + q) / (1 - q)


def test_cayley_singular_locus():
    with pytest.raises(SingularError):
        cayley(1, SlicePoint.make(-1, 0, 1, -1))


@given(taus, sl2_rational(), nonzero, nonzero.filter(lambda t: t * t != 1))
def test_conjugation_preserves_the_invariant(tau, g, xi, t0):
    x = elliptic_rep(t0, tau, xi)
    y = x.conjugate(g)
    assert y.is_valid() and y.chi() == x.chi()
    assert y.conjugate(g.inverse()) == x


def test_conj_traceless_allows_gl2():
    g = Mat2(Fraction(2), Fraction(0), Fraction(0), Fraction(1))
    assert conj_traceless(g, (Fraction(0), Fraction(1), Fraction(0))) == (0, Fraction(1, 2), 0)


@given(taus, sl2_rational(), nonzero)
def test_twisted_action_of_rational_points_is_conjugation(tau, g, xi):
    E = QuadAlg(tau)
    x = elliptic_rep(3, tau, xi)
    y = x.twisted(g.map(lambda e: QuadElem(E, e)))
    # rational g is fixed by the Galois involution
    assert y == x.conjugate(g.inverse())


def test_gamma0_moves_identity_to_minus_identity():
    E = QuadAlg(3)
    one = XPoint.identity(3)
    assert one.twisted(gamma0(E)) == -one
    p = unipotent_rep(3, 2)
    assert p.twisted(gamma0(E)) == gamma0_action(p)


@pytest.mark.parametrize("t0, disc, cls", [
    (3, -4, ELLIPTIC),
    (0, -4, RSS),
    (Fraction(3, 5), -4, RSS),
    (1, -4, UNIP_PLUS),
    (-1, 5, UNIP_MINUS),
    (2, 12, RSS),
    (2, -4, ELLIPTIC),
])
def test_classification(t0, disc, cls):
    assert classify(t0, QuadAlg(squarefree_part(disc))).cls == cls


@given(st.sampled_from([-1, 2, 3, -5, 6, -7, 10]), st.sampled_from([-1, 2, 3, -5, 6, -7, 10]))
def test_reflection_is_an_involution(L, E):
    assert reflect(reflect(QuadAlg(L), QuadAlg(E)), QuadAlg(E)) == QuadAlg(L)


def test_descendant_of_unipotent_raises():
    with pytest.raises(DomainError):
        descendant(classify(1, QuadAlg(-1)), QuadAlg(-1))


@given(taus, nonzero.filter(lambda t: t * t != 1), nonzero)
def test_elliptic_representatives_lie_on_their_fiber(tau, t0, xi):
    x = elliptic_rep(t0, tau, xi)
    assert x.is_valid() and x.u == t0
    assert x.v ** 2 + x.b * x.c == slice_discriminant(t0, tau)


@given(st.sampled_from([-1, 2, 3, -5]), st.integers(-6, 6), st.integers(-6, 6).filter(bool), rationals)
def test_levi_retraction_rebuilds(tau, m, n, b):
    E = QuadAlg(tau)
    z = QuadElem(E, m, n)
    x = z / z.conj()
    eta = XPoint.make(tau, x.x, x.y, b, 0)
    assert retraction_rebuild(levi_retract(eta)) == eta


def test_line_points():
    pt = line_point(2, Fraction(3))
    assert pt.coords == (1, 0, 6, 0)
    assert line_point(2, Fraction(3), twisted_minus=True).is_valid()


@given(st.sampled_from([-1, 2, 3]), st.integers(-5, 5), st.integers(-5, 5).filter(bool), rationals)
def test_cayley_line_is_affine_with_closed_scale(tau, m, n, a):
    E = QuadAlg(tau)
    z = QuadElem(E, m, n)
    x = z / z.conj()
    assume((QuadElem(E, 1) - x).norm() != 0)
    assert cayley_line_coordinate(1, x, a) == cayley_line_scale(1, x) * a


@given(nonzero)
def test_adelic_absolute_value_is_one(q):
    assert adelic_abs(q) == 1
