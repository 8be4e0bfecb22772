import random
from fractions import Fraction

import pytest

from galrtf.arith import DomainError, QuadAlg
from galrtf.expansion import (Volumes, assemble, assemble_elliptic, assemble_rss, assemble_unipotent,
                              eval_truncated_kernel, iota_fiber, rss_JT_direct, slope_crosscheck,
                              unipotent_JT_direct)
from galrtf.symspace import ELLIPTIC, RSS, UNIP_MINUS, UNIP_PLUS, Mat2, classify
from galrtf.verify import elliptic_test_functions, rss_test_functions, unipotent_test_functions


@pytest.fixture(scope="module")
def rss_data():
    tau, t0, fns = rss_test_functions()
    return classify(t0, QuadAlg(tau)), fns


@pytest.fixture(scope="module")
def unip_data():
    tau, fns = unipotent_test_functions()
    return tau, fns


def test_dispatch_follows_the_class(rss_data, unip_data):
    d, fns = rss_data
    assert assemble(d, fns[0]).datum.cls == RSS
    tau, ufns = unip_data
    assert assemble(classify(1, QuadAlg(tau)), ufns[0]).datum.cls == UNIP_PLUS
    assert assemble(classify(-1, QuadAlg(tau)), ufns[0]).datum.cls == UNIP_MINUS
    tau_e, t0, efns = elliptic_test_functions()
    rep = assemble(classify(t0, QuadAlg(tau_e)), efns[0])
    assert rep.datum.cls == ELLIPTIC and rep.record.slope == 0


def test_wrong_class_is_rejected(unip_data):
    tau, fns = unip_data
    with pytest.raises(DomainError):
        assemble_rss(classify(1, QuadAlg(tau)), fns[0])


def test_fiber_points_lie_over_the_datum(rss_data):
    d, _ = rss_data
    for eta in iota_fiber(d, QuadAlg(2)):
        assert eta.is_valid() and eta.u == d.t0


@pytest.mark.parametrize("i", [0, 4])
def test_rss_direct_truncation_is_affine(rss_data, i):
    d, fns = rss_data
    rep = assemble_rss(d, fns[i])
    eta = iota_fiber(d, QuadAlg(fns[i].tau))[0]
    for T in (2.0, 3.5):
        assert rss_JT_direct(fns[i], eta, T) == pytest.approx(rep.record(T), rel=1e-6, abs=1e-10)


@pytest.mark.parametrize("minus", [False, True])
def test_unipotent_direct_limit_matches_the_assembly(unip_data, minus):
    _, fns = unip_data
    rep = assemble_unipotent(minus, fns[0])
    for T in (1.0, 2.5):
        direct, err = unipotent_JT_direct(minus, fns[0], T)
        assert direct == pytest.approx(rep.record(T), abs=1e-6)
        assert err < 1e-5


def test_unipotent_total_is_the_constant_part(unip_data):
    _, fns = unip_data
    rep = assemble_unipotent(False, fns[3])
    assert rep.total == pytest.approx(rep.record.constant)
    assert rep.diagnostics["derivative_error"] < 1e-6


def test_volumes_scale_the_terms(rss_data):
    d, fns = rss_data
    one = assemble_rss(d, fns[1])
    three = assemble_rss(d, fns[1], Volumes(mb1=3.0))
    assert three.record.slope == pytest.approx(3 * one.record.slope)
    assert three.total == pytest.approx(3 * one.total)
    assert three.as_dict()["terms"][0]["volume"] == "vol[M_B']^1"


def test_slope_constants(rss_data, unip_data):
    d, fns = rss_data
    for f in fns[:3]:
        assert slope_crosscheck(d, f).ratio == pytest.approx(2.0, rel=1e-4)
    tau, ufns = unip_data
    for f in ufns[:2]:
        assert slope_crosscheck(classify(1, QuadAlg(tau)), f).ratio == pytest.approx(1.0, rel=1e-4)


def test_elliptic_slope_is_zero():
    tau, t0, fns = elliptic_test_functions()
    chk = slope_crosscheck(classify(t0, QuadAlg(tau)), fns[0])
    assert chk.slope == 0 and chk.conclusive


def test_elliptic_terms_carry_the_torus_volume():
    tau, t0, fns = elliptic_test_functions()
    d = classify(t0, QuadAlg(tau))
    base = assemble_elliptic(d, fns[0])
    double = assemble_elliptic(d, fns[0], Volumes(torus=2.0))
    assert double.total == pytest.approx(2 * base.total)
    assert base.total != 0


def test_truncated_kernel_two_forms_agree(unip_data):
    tau, fns = unip_data
    d = classify(1, QuadAlg(tau))
    rng = random.Random(7)
    for _ in range(3):
        a = rng.uniform(0.7, 1.4)
        x = Mat2(a, rng.uniform(-0.5, 0.5), 0.0, 1 / a)
        k = eval_truncated_kernel(fns[3], d, x, rng.uniform(-1.0, 0.5))
        assert k.difference < 1e-9


def test_kernel_comparison_needs_unipotent_plus(unip_data):
    tau, fns = unip_data
    with pytest.raises(DomainError):
        eval_truncated_kernel(fns[0], classify(-1, QuadAlg(tau)), Mat2(1.0, 0.0, 0.0, 1.0), 0.0)
