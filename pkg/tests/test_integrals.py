import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from galrtf.arith import QuadraticCharacter, abs_p
from galrtf.cyclo import Cyclo
from galrtf.integrals import (LineFn, derive_fx, fourier_line, kappa_average_bruteforce, kappa_average_local, plancherel_finite,
                              poisson_check, richardson_even, tate_zeta_global, tate_zeta_local, zeta_sderivative)
from galrtf.symspace import Mat2
from galrtf.testfns import ArchFn, BallFn, BasicFn

REAL = 0


def indicator(p, k=0):
    """1 on p^k Z_p."""
    return LineFn.tabulate(p, k, k, lambda b: 1)


def gaussian():
    return LineFn(REAL, evaluator=lambda t: np.exp(-math.pi * np.asarray(t, dtype=float) ** 2), radius=8.0)


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11])
def test_basic_function_is_self_dual(p):
    g = indicator(p)
    gh = fourier_line(g)
    for y in [Fraction(0), Fraction(1), Fraction(1, p), Fraction(3, p ** 2), Fraction(p)]:
        assert gh(y) == g(y)


@pytest.mark.parametrize("p, k", [(3, -1), (5, 2), (2, 1)])
def test_fourier_of_scaled_balls(p, k):
    # hat 1_{p^k Z_p} = p^{-k} 1_{p^{-k} Z_p}
    gh = fourier_line(indicator(p, k))
    for y in [Fraction(0), Fraction(1, p), Fraction(1, p ** 2), Fraction(p), Fraction(p ** 3)]:
        expected = Fraction(p) ** (-k) * indicator(p, -k)(y)
        assert gh(y) == expected


@settings(max_examples=15)
@given(st.sampled_from([3, 5]), st.lists(st.integers(-3, 3), min_size=9, max_size=9))
def test_plancherel_exact(p, values):
    g = LineFn(p, -1, 1, [Fraction(v) for v in values[:p * p]] + [Fraction(0)] * max(0, p * p - len(values)))
    lhs, rhs = plancherel_finite(g)
    assert lhs == rhs


def test_fourier_inversion_on_a_table():
    g = LineFn(5, 0, 1, [Fraction(v) for v in (1, 0, 2, -1, 3)])
    back = fourier_line(fourier_line(g))
    for b in g.points():
        # hat hat g(b) = g(-b)
        assert back(b) == g(-b)


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
@pytest.mark.parametrize("D", [1, -4, 8])
def test_local_zeta_geometric_series(p, D):
    kap = QuadraticCharacter(D)
    z = tate_zeta_local(indicator(p), kap, 2).value
    chi = kap.local(p, p)
    assert z == 1 / (1 - chi * Fraction(1, p * p))


def test_local_zeta_of_a_shifted_ball():
    # 1_{p^{-1} Z_p} against |.|^s: sum_{k >= -1} p^{-ks}
    z = tate_zeta_local(indicator(3, -1), QuadraticCharacter(1), 2).value
    assert z == Fraction(9) / (1 - Fraction(1, 9))


def test_local_zeta_ramified_character_kills_the_basic_function():
    assert tate_zeta_local(indicator(3), QuadraticCharacter(-3), 2).value == 0


def test_real_gaussian_value_at_one():
    z = tate_zeta_local(gaussian(), QuadraticCharacter(1), 1)
    assert float(z.value) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("s", [1.5, 2.0, 3.0])
def test_real_gaussian_against_gamma_function(s):
    # int e^{-pi t^2} |t|^s dt/|t| = pi^{-s/2} Gamma(s/2)
    z = tate_zeta_local(gaussian(), QuadraticCharacter(1), s).value
    assert float(z) == pytest.approx(math.pi ** (-s / 2) * math.gamma(s / 2), rel=1e-10)


def test_global_zeta_of_basic_data_is_completed_zeta():
    for s in (2.0, 3.0):
        z = tate_zeta_global({REAL: gaussian()}, QuadraticCharacter(1), s).value
        expected = math.pi ** (-s / 2) * math.gamma(s / 2) * float(mpmath.zeta(s))
        assert z == pytest.approx(expected, rel=1e-9)


def test_global_zeta_pole_reports_residue():
    z = tate_zeta_global({REAL: gaussian()}, QuadraticCharacter(1), 1, vol=2.5)
    assert z.pole and z.residue == pytest.approx(2.5, rel=1e-10)


def test_global_zeta_at_one_for_an_odd_character():
    # odd real part t e^{-pi t^2} gives 1/pi; 1_{1 + 4 Z_2} gives 1/2; L(1, chi_-4) = pi/4
    odd = LineFn(REAL, evaluator=lambda t: np.asarray(t, dtype=float) * np.exp(-math.pi * np.asarray(t, float) ** 2),
                 radius=8.0)
    two = LineFn.tabulate(2, 0, 2, lambda b: 1 if b % 4 == 1 else 0)
    z = tate_zeta_global({REAL: odd, 2: two}, QuadraticCharacter(-4), 1).value
    assert float(z) == pytest.approx(1 / 8, rel=1e-9)


def test_global_zeta_with_a_ramified_character_outside_the_support():
    assert tate_zeta_global({REAL: gaussian()}, QuadraticCharacter(5), 2).value == 0


def test_sderivative_of_riemann_zeta_is_euler_gamma():
    value, err = zeta_sderivative(lambda s: float(mpmath.zeta(s)))
    assert value == pytest.approx(float(mpmath.euler), abs=1e-8)
    assert err < 1e-6


def test_richardson_even_on_a_smooth_even_function():
    value, err = richardson_even(lambda s: math.cos(s) + s * s * math.exp(-s * s))
    assert value == pytest.approx(1.0, abs=1e-10)


def test_poisson_for_the_gaussian():
    lhs, rhs = poisson_check(gaussian())
    assert abs(lhs - rhs) < 1e-12


def test_poisson_for_a_stretched_gaussian():
    g = LineFn(REAL, evaluator=lambda t: np.exp(-math.pi * (np.asarray(t, float) / 1.7) ** 2), radius=14.0)
    lhs, rhs = poisson_check(g)
    assert abs(lhs - rhs) < 1e-10


def test_cyclotomic_arithmetic():
    z = Cyclo.zeta(6, 1)
    assert (z * z * z).rational_value() == -1
    total = Cyclo(5)
    for k in range(5):
        total = total + Cyclo.zeta(5, k)
    assert total.rational_value() == 0


@pytest.mark.parametrize("D", [1, -4, -3])
def test_kappa_average_bottom_row_reduction(D):
    fn = BallFn(3, 1, [((1, 0, 0, 0), 1), ((1, Fraction(1, 3), Fraction(2, 3), 0), 2), ((1, 1, 1, -1), -1)])
    kap = QuadraticCharacter(D)
    g = kappa_average_local(fn, 2, kap)
    for b in [Fraction(0), Fraction(1, 3), Fraction(2), Fraction(1, 9), Fraction(2, 3)]:
        assert g(b) == kappa_average_bruteforce(fn, 2, kap, b, 2)


def test_kappa_average_of_basic_function_is_basic():
    g = kappa_average_local(BasicFn(3), 2, QuadraticCharacter(1))
    for b in [Fraction(0), Fraction(1), Fraction(1, 3), Fraction(7)]:
        assert g(b) == (1 if b.denominator % 3 else 0)


def _tk(t, k):
    return Mat2(t, 0 * t, 0 * t, 1 + 0 * t) * k


@pytest.mark.parametrize("t", [Fraction(3), Fraction(1, 3), Fraction(2), Fraction(9, 2)])
def test_line_function_rescales_under_the_torus(t):
    # f_{tk}(b) = f_k(b / t) and hat f_{tk}(b) = hat f_k(b t) |t|, exactly at p = 3
    fn = BallFn(3, 1, [((1, 0, 0, 0), 1), ((1, Fraction(1, 3), Fraction(2, 3), 0), 2), ((1, 1, 1, -1), -1)])
    k = Mat2(Fraction(2), Fraction(1), Fraction(1), Fraction(1))
    gx, gk = derive_fx(fn, _tk(t, k), 2), derive_fx(fn, k, 2)
    pts = [Fraction(j, 9) for j in range(-20, 21)] + [Fraction(5, 27), Fraction(3)]
    assert all(gx(b) == gk(b / t) for b in pts)
    hx, hk = fourier_line(gx), fourier_line(gk)
    assert all(hx(y) == hk(y * t) * abs_p(t, 3) for y in pts)


def test_printed_variant_with_a_fixed_letter_fails():
    # the alternative reading hat f_{tk}(b) = hat f_k(a t)|t| would make hat f_{tk} constant in b
    fn = BallFn(3, 1, [((1, 0, 0, 0), 1), ((1, Fraction(1, 3), Fraction(2, 3), 0), 2)])
    k = Mat2(Fraction(1), Fraction(0), Fraction(0), Fraction(1))
    hx = fourier_line(derive_fx(fn, _tk(Fraction(3), k), 2))
    assert len({hx(Fraction(3) ** j) for j in range(-3, 4)}) > 1


def test_real_line_function_rescales_under_the_torus():
    fn = ArchFn((1.0, 0.2, 0.3, -0.1), (1.0, 1.0, 1.5, 1.0))
    k = Mat2(math.cos(0.4), -math.sin(0.4), math.sin(0.4), math.cos(0.4))
    t = 1.7
    gx, gk = derive_fx(fn, _tk(t, k), 3), derive_fx(fn, k, 3)
    bs = np.linspace(-2, 2, 9)
    assert np.allclose(gx(bs), gk(bs / t), atol=1e-14)
    hx, hk = fourier_line(gx), fourier_line(gk)
    for y in (0.0, 0.3, -0.8):
        assert complex(hx(y)) == pytest.approx(complex(hk(y * t)) * t, abs=1e-8)
