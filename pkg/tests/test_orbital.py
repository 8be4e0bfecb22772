import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from galrtf.arith import abs_p
from galrtf.orbital import (global_orbital, levi_local, levi_local_gamma, orbital_compact_real,
                            orbital_compact_real_hyperboloid, orbital_compact_unpruned, orbital_local,
                            orbital_split_finite, sl2_mod, tree_vertices, vertex_count)
from galrtf.symspace import Mat2, XPoint, elliptic_rep
from galrtf.testfns import ArchFn, BallFn, BasicFn, gaussian_fn


@pytest.mark.parametrize("p, N", [(2, 1), (3, 1), (2, 2), (5, 1)])
def test_sl2_mod_has_the_right_order(p, N):
    reps = sl2_mod(p, N)
    mod = p ** N
    assert len(reps) == p ** (3 * N) - p ** (3 * N - 2)
    assert all((a * d - b * c) % mod == 1 for a, b, c, d in reps)


@pytest.mark.parametrize("p, depth", [(2, 4), (3, 4), (3, 6), (5, 2)])
def test_tree_ball_sizes(p, depth):
    assert len(list(tree_vertices(p, depth))) == vertex_count(p, depth)


@pytest.mark.parametrize("t0, tau, p, expected", [(8, -1, 3, 4), (26, -1, 5, 6), (2, -1, 3, 1)])
def test_basic_elliptic_orbitals(t0, tau, p, expected):
    eta = elliptic_rep(t0, tau, 1)
    res = orbital_local(BasicFn(p), eta, 4)
    assert res.value == expected and res.stabilized


@pytest.mark.parametrize("t0, tau, p", [(8, -1, 3), (4, 2, 3), (10, -2, 3)])
def test_pruning_matches_the_full_tree(t0, tau, p):
    eta = elliptic_rep(t0, tau, 1)
    assert orbital_local(BasicFn(p), eta, 4).value == orbital_compact_unpruned(BasicFn(p), eta, 4)


def test_pruning_with_balls():
    fn = BallFn(3, 1, [((8, 0, 1, -63), 1), ((8, 3, 1, -72), 2), ((8, 0, 3, -21), -1)])
    eta = elliptic_rep(8, -1, 1)
    assert orbital_local(fn, eta, 4).value == orbital_compact_unpruned(fn, eta, 4)


@settings(max_examples=15)
@given(st.integers(-3, 3), st.integers(-3, 3).filter(bool), st.integers(-2, 2))
def test_conjugation_invariance(b, a, c):
    g = Mat2(Fraction(a), Fraction(b), Fraction(c), (1 + Fraction(b * c)) / a)
    eta = elliptic_rep(8, -1, 1)
    assert orbital_local(BasicFn(3), eta.conjugate(g), 4).value == orbital_local(BasicFn(3), eta, 4).value


def test_real_compact_orbital_two_routes():
    fn = ArchFn((0.5, 0.3, 0.4, -0.2), (1.5, 1.0, 1.3, 0.9))
    for xi in (1, Fraction(1, 2), -2):
        # delta = (t0^2 - 1) / tau < 0: compact stabilizer at the real place
        eta = elliptic_rep(Fraction(3, 5), 3, xi).conjugate(Mat2(1.0, 0.3, 0.0, 1.0))
        eta = XPoint(eta.tau, float(eta.u), float(eta.v), float(eta.b), float(eta.c))
        a, _ = orbital_compact_real(fn, eta)
        b = orbital_compact_real_hyperboloid(fn, eta)
        assert a == pytest.approx(b, rel=1e-9)
        assert a > 0


@pytest.mark.parametrize("p, rs", [(3, (1, 3, Fraction(1, 3))), (5, (1, 5))])
def test_split_orbital_is_a_rescaled_levi_integral(p, rs):
    fn = BallFn(p, 1, [((1, 0, 0, 0), 1), ((1, 1, Fraction(1, p), 0), 3)])
    for r in map(Fraction, rs):
        lhs = orbital_split_finite(fn, 2, 1, r)
        assert lhs == levi_local(fn, 1, r, 2) / abs_p(2 * r, p)


def test_levi_factor_of_the_basic_function_at_a_unit():
    assert levi_local(BasicFn(3), Fraction(3, 5), Fraction(4, 5), -1) == 1


def test_levi_factor_gamma_independence():
    # the per-place discrepancy |2|^-1 |N(z)|^-2 multiplies to 1 over all places
    ynorm = Fraction(10, 3)
    arch = ArchFn((0.0, 1.0, 0.0, 0.0), (1.0, 1.0, 1.0, 1.0))
    places = {0: arch, 2: BasicFn(2), 3: BasicFn(3), 5: BasicFn(5)}
    ratio = 1.0
    for v, fn in places.items():
        plain = float(levi_local(fn, 0, 1, -1))
        twisted = float(levi_local_gamma(fn, 0, 1, -1, ynorm))
        ratio *= twisted / plain
    assert ratio == pytest.approx(1.0, rel=1e-12)


def test_global_orbital_is_a_product():
    f = gaussian_fn(-1, center=(2.0, 0.0, 0.5, -0.5), scales=(1.0, 1.0, 2.0, 2.0))
    eta = elliptic_rep(2, -1, 1)
    glob = global_orbital(f, eta)
    assert glob.value == pytest.approx(math.prod(float(r.value) for r in glob.local.values()))
    assert glob.stabilized
