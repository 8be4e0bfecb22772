import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from galrtf.arith import (DomainError, PadicElem, QuadAlg, QuadElem, QuadraticCharacter, abs_p, factorize,
                          fundamental_discriminant, hilbert_symbol, is_fundamental_discriminant, is_padic_square,
                          kronecker, legendre, local_splitting, padic_sqrt, primes_up_to, quadratic_characters_unramified_outside,
                          squarefree_part, vp)

nonzero_rationals = st.builds(Fraction, st.integers(-500, 500).filter(bool), st.integers(1, 300))
PRIMES = [2, 3, 5, 7, 11, 13]


def _places(*qs):
    primes = {2}
    for q in qs:
        for n in (q.numerator, q.denominator):
            primes |= {p for p, _ in factorize(abs(n))} if abs(n) > 1 else set()
    return [0] + sorted(primes)


@given(st.integers(2, 10 ** 6))
def test_factorize_multiplies_back(n):
    assert math.prod(p ** e for p, e in factorize(n)) == n


def test_primes_up_to_small():
    assert primes_up_to(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


@pytest.mark.parametrize("n, core", [(12, 3), (-8, -2), (1, 1), (-1, -1), (50, 2), (Fraction(-9, 2), -2)])
def test_squarefree_part(n, core):
    assert squarefree_part(n) == core


@given(nonzero_rationals)
def test_product_formula_for_absolute_values(q):
    total = abs(q)
    for p in _places(q)[1:]:
        total *= abs_p(q, p)
    assert total == 1


@given(nonzero_rationals, nonzero_rationals, st.sampled_from(PRIMES))
def test_valuation_is_additive(a, b, p):
    assert vp(a * b, p) == vp(a, p) + vp(b, p)


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
def test_legendre_matches_euler_criterion(p):
    for a in range(1, p):
        assert legendre(a, p) == (1 if pow(a, (p - 1) // 2, p) == 1 else -1)


def test_kronecker_minus_four_is_the_mod_four_character():
    for n in range(1, 40):
        expected = 0 if n % 2 == 0 else (1 if n % 4 == 1 else -1)
        assert kronecker(-4, n) == expected


@given(nonzero_rationals, nonzero_rationals)
def test_hilbert_symbols_satisfy_the_product_formula(a, b):
    assert math.prod(hilbert_symbol(a, b, v) for v in _places(a, b)) == 1


def test_hilbert_symbol_known_values():
    assert hilbert_symbol(-1, -1, 0) == -1
    assert hilbert_symbol(-1, -1, 2) == -1
    assert hilbert_symbol(-1, -1, 3) == 1
    assert hilbert_symbol(2, 3, 3) == -1
    assert hilbert_symbol(5, 7, 11) == 1


@pytest.mark.parametrize("p", [3, 5, 7])
def test_padic_squares_against_residues(p):
    squares = {x * x % p for x in range(1, p)}
    for a in range(1, p):
        assert is_padic_square(a, p) == (a in squares)
        assert is_padic_square(a * p * p, p) == (a in squares)
        assert not is_padic_square(a * p, p)


def test_two_adic_squares_are_one_mod_eight():
    for a in range(1, 64, 2):
        assert is_padic_square(a, 2) == (a % 8 == 1)


@pytest.mark.parametrize("q, p", [(-1, 5), (2, 7), (Fraction(4, 9), 3), (17, 2), (-7, 2)])
def test_padic_sqrt_squares_back(q, p):
    r = padic_sqrt(q, p, 20)
    assert vp(r * r - q, p) >= 18


@given(nonzero_rationals, nonzero_rationals, st.sampled_from(PRIMES))
def test_padic_arithmetic_matches_rationals(a, b, p):
    A, B = PadicElem.from_rational(a, p, 12), PadicElem.from_rational(b, p, 12)
    assert A * B == PadicElem.from_rational(a * b, p, 12)
    assert (A / B) == PadicElem.from_rational(a / b, p, 12)


def test_padic_cancellation_loses_precision():
    a = PadicElem.from_rational(1, 5, 6)
    b = PadicElem.from_rational(1 + 5 ** 4, 5, 6)
    d = b - a
    assert d.valuation == 4
    assert d.absolute_precision == 6


@given(st.sampled_from([-1, 2, -3, 5, -7]), st.tuples(nonzero_rationals, nonzero_rationals),
       st.tuples(nonzero_rationals, nonzero_rationals))
def test_norm_is_multiplicative(core, x, y):
    E = QuadAlg(core)
    a, b = QuadElem(E, *x), QuadElem(E, *y)
    assert (a * b).norm() == a.norm() * b.norm()
    assert a * a.inverse() == QuadElem(E, 1)
    assert a.conj().conj() == a


def test_local_splitting_of_gaussian_field():
    E = QuadAlg(-1)
    assert [local_splitting(E, p) for p in (2, 3, 5, 7, 13)] == ["ramified", "inert", "split", "inert", "split"]


def test_quadratic_algebra_rejects_zero():
    with pytest.raises(DomainError):
        QuadAlg(0)


def test_fundamental_discriminants():
    assert fundamental_discriminant(-1) == -4
    assert fundamental_discriminant(3) == 12
    assert fundamental_discriminant(5) == 5
    assert is_fundamental_discriminant(-8) and not is_fundamental_discriminant(-16)


def test_characters_unramified_outside_two_and_three():
    assert sorted(k.D for k in quadratic_characters_unramified_outside({2, 3})) == [-24, -8, -4, -3, 1, 8, 12, 24]


@given(st.sampled_from([-4, 5, -3, 8, -8, 12, -15, 21]), nonzero_rationals)
def test_quadratic_characters_are_trivial_on_rationals(D, t):
    kap = QuadraticCharacter(D)
    places = sorted(set(_places(t)) | set(kap.ramified_primes()))
    assert math.prod(kap.local(v, t) for v in places) == 1


@given(st.sampled_from([-4, 5, -3, 8, -8, 12]), st.sampled_from([0] + PRIMES), nonzero_rationals, nonzero_rationals)
def test_local_characters_are_multiplicative(D, v, a, b):
    kap = QuadraticCharacter(D)
    assert kap.local(v, a * b) == kap.local(v, a) * kap.local(v, b)


def test_character_of_norms_is_trivial():
    E = QuadAlg(-1)
    kap = QuadraticCharacter.of_algebra(E)
    for x, y in [(1, 2), (3, 5), (Fraction(2, 3), 7)]:
        n = QuadElem(E, x, y).norm()
        for v in [0, 2, 3, 5, 7, 13]:
            assert kap.local(v, n) == 1
