import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from galrtf.arith import DomainError, QuadAlg
from galrtf.cyclo import Cyclo
from galrtf.tori import (BiquadraticData, FiniteAbelian, FiniteTorusModel, classification_sweep,
                         classify_structures, finite_poisson, poisson_sweep, random_model, symmetric_space_of)


def cyclic(n):
    return FiniteAbelian(list(range(n)), lambda a, b: (a + b) % n, 0)


@pytest.mark.parametrize("n", [1, 2, 6, 12])
def test_cyclic_group_has_n_characters(n):
    e, chars = cyclic(n).characters()
    assert e == n and len(chars) == n
    assert len({tuple(sorted(c.items())) for c in chars}) == n


@pytest.mark.parametrize("N, d", [(8, 3), (12, 5), (9, 2), (15, 7)])
def test_characters_of_a_model_are_homomorphisms(N, d):
    model = FiniteTorusModel(N, d)
    e, chars = model.characters()
    G = model.group
    assert len(chars) == len(G)
    rng = random.Random(N * d)
    for chi in chars[:6]:
        for _ in range(20):
            a, b = rng.choice(G.elements), rng.choice(G.elements)
            assert chi[G.mul(a, b)] == (chi[a] + chi[b]) % e


def test_character_orthogonality():
    model = FiniteTorusModel(10, 3)
    e, chars = model.characters()
    for chi in chars[:5]:
        total = Cyclo(e)
        for a in model.group.elements:
            total = total + Cyclo.zeta(e, chi[a])
        expected = len(model.group) if all(v == 0 for v in chi.values()) else 0
        assert total.rational_value() == expected


def test_symmetrized_points_have_norm_one():
    model = FiniteTorusModel(12, 5)
    model.check()
    for s in model.space:
        assert model.group.mul(s, model.conj(s)) == model.group.one


@settings(max_examples=25)
@given(st.integers(0, 10 ** 6))
def test_finite_poisson_on_random_models(seed):
    rng = random.Random(seed)
    model = random_model(rng)
    f = {s: Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for s in model.space}
    res = finite_poisson(model, f, rng.choice([None, "min", "max"]))
    assert res.agrees
    assert res.characters == model.cokernel_size()


def test_poisson_with_only_the_fixed_subgroup():
    model = FiniteTorusModel(7, 3)
    f = {s: Fraction(1) for s in model.space}
    res = finite_poisson(model, f)
    assert res.geom == 1 and res.agrees


def test_section_outside_the_fiber_is_rejected():
    model = FiniteTorusModel(7, 3)
    s = sorted(model.space)[1]
    wrong = next(a for a in model.group.elements if model.symmetrize(a) != s)
    with pytest.raises(DomainError):
        finite_poisson(model, {s: 1}, {s: wrong})


def test_poisson_sweep_passes():
    assert poisson_sweep(8, seed=3)["passed"]


def test_non_unit_generators_are_rejected():
    with pytest.raises(DomainError):
        FiniteTorusModel(6, 1, ((2, 0),))


@pytest.mark.parametrize("e, l", [(-1, 2), (3, -5), (-7, 1), (5, 5)])
def test_structures_swap_their_spaces(e, l):
    M = BiquadraticData.from_pair(QuadAlg(e), QuadAlg(l))
    first, second = classify_structures(M)
    assert symmetric_space_of(first) == M.Lp
    assert symmetric_space_of(second) == M.L


def test_classification_sweep():
    out = classification_sweep(100, seed=11)
    assert out["passed"] and out["count"] == 100
