import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from galrtf.arith import QuadAlg, QuadElem, vp
from galrtf.heights import (AdelicPoint, height_E, iwasawa_padic, iwasawa_real, local_height, psi_T,
                            psi_T_integral, psi_T_quadrature, weight_local, weight_unipotent, weight_v, wx)
from galrtf.symspace import Mat2

rationals = st.builds(Fraction, st.integers(-30, 30), st.integers(1, 12))
nonzero = rationals.filter(bool)


@st.composite
def sl2_rational(draw):
    a, b, c = draw(nonzero), draw(rationals), draw(rationals)
    return Mat2(a, b, c, (1 + b * c) / a)


def _n(u):
    return Mat2(1.0, u, 0.0, 1.0)


def _a(t):
    return Mat2(t, 0.0, 0.0, 1 / t)


def _k(th):
    return Mat2(math.cos(th), -math.sin(th), math.sin(th), math.cos(th))


@given(st.floats(-5, 5), st.floats(0.1, 10), st.floats(-3, 3))
def test_real_iwasawa_recovers_its_factors(u, t, th):
    g = _n(u) * _a(t) * _k(th)
    d = iwasawa_real(g)
    assert d.u == pytest.approx(u, abs=1e-9)
    assert d.t == pytest.approx(t, rel=1e-12)
    assert d.height == pytest.approx(math.log(t), abs=1e-12)


@given(sl2_rational(), st.sampled_from([2, 3, 5, 7]))
def test_padic_iwasawa_reconstructs(g, p):
    d = iwasawa_padic(g, p)
    rebuilt = Mat2(Fraction(1), d.u, Fraction(0), Fraction(1)) * Mat2(d.t, Fraction(0), Fraction(0), 1 / d.t) * d.k
    assert rebuilt == g
    # k is integral with unit determinant
    assert all(vp(e, p) >= 0 for e in d.k.entries() if e) and vp(d.k.det(), p) == 0


@pytest.mark.parametrize("p, k", [(3, 2), (5, -1), (2, 3)])
def test_padic_height_of_diagonal(p, k):
    g = Mat2(Fraction(p) ** k, Fraction(0), Fraction(0), Fraction(p) ** (-k))
    # log |p^k|_p
    assert local_height(g, p) == pytest.approx(-k * math.log(p))


@given(st.sampled_from([-1, 2, 3, -5, 7]), sl2_rational(), st.sampled_from([0, 2, 3, 5, 7]))
def test_base_change_height_doubles_on_rational_points(tau, g, v):
    E = QuadAlg(tau)
    gE = g.map(lambda e: QuadElem(E, e))
    if v == 0:
        g = g.map(float)
    assert height_E(gE, v) == pytest.approx(2 * local_height(g, v), abs=1e-9)


@given(st.floats(-20, 20))
def test_unipotent_weight_closed_form_real(u):
    assert weight_unipotent(u, 0) == pytest.approx(weight_local(_n(u), 0), abs=1e-12)


@given(rationals, st.sampled_from([2, 3, 5]))
def test_unipotent_weight_closed_form_padic(u, p):
    g = Mat2(Fraction(1), u, Fraction(0), Fraction(1))
    assert weight_unipotent(u, p) == pytest.approx(weight_local(g, p), abs=1e-12)


def test_psi_T_is_an_indicator_combination():
    x = AdelicPoint({0: _n(0.3)})
    assert psi_T(x, 5.0) == 1
    assert psi_T(AdelicPoint({0: _a(1e4)}), 1.0) == 0


@given(st.floats(-2, 2), st.floats(-0.5, 0.5), st.sampled_from([3.0, 4.5, 6.0]))
def test_psi_T_quadrature_matches_closed_form(u, th, T):
    x = AdelicPoint({0: _n(u) * _k(th)})
    assert psi_T_quadrature(x, T) == pytest.approx(psi_T_integral(x, T), abs=1e-6)


def test_psi_T_with_a_finite_place():
    x = AdelicPoint({0: _n(0.7), 3: Mat2(Fraction(1), Fraction(1, 9), Fraction(0), Fraction(1))})
    assert psi_T_quadrature(x, 4.0) == pytest.approx(psi_T_integral(x, 4.0), abs=1e-6)
    assert weight_v(x) == pytest.approx(weight_unipotent(0.7, 0) + weight_unipotent(Fraction(1, 9), 3))


def test_w_twice_is_minus_one():
    x = AdelicPoint({0: _n(0.5)})
    assert local_height(wx(wx(x)).at(0), 0) == pytest.approx(local_height(x.at(0), 0))
