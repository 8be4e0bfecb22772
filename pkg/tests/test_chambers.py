from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from galrtf.arith import DomainError
from galrtf.chambers import (Cone, absorption_sides, angle_cone, contraction_sides, rational_grid, sign_between,
                             sl2_chambers)
from galrtf.verify import SL2_CLOSED_FORMS

rationals = st.builds(Fraction, st.integers(-60, 60), st.integers(1, 12))
small_vectors = st.tuples(st.integers(-3, 3), st.integers(-3, 3))


def quadrant():
    return Cone([(1, 0), (0, 1)], 2)


def test_quadrant_is_self_dual():
    assert quadrant().dual() == quadrant()


def test_quadrant_faces():
    faces = quadrant().faces()
    assert sorted(f.dim for f in faces) == [0, 1, 1, 2]
    assert Cone.zero(2) in faces


def test_relative_interior_of_a_ray():
    ray = Cone([(1, 1)], 2)
    assert ray.rint_contains((2, 2))
    assert not ray.rint_contains((0, 0))
    assert not ray.rint_contains((1, 2))
    assert Cone.zero(2).rint_contains((0, 0))


def test_angle_cone_of_a_face():
    C = quadrant()
    F = Cone([(1, 0)], 2)
    A = angle_cone(F, C)
    assert A.contains((-5, 1)) and not A.contains((0, -1))


def test_sign_between_counts_dimension():
    assert sign_between(Cone.zero(2), quadrant()) == 1
    assert sign_between(Cone([(1, 0)], 2), quadrant()) == -1


@given(st.lists(small_vectors, min_size=1, max_size=4), small_vectors)
def test_dual_membership_matches_generator_membership(gens, v):
    gens = [g for g in gens if any(g)]
    assume(gens)
    C = Cone(gens, 2)
    assert C.contains(v) == C.contains_by_generators(v)


@given(st.lists(small_vectors, min_size=1, max_size=4))
def test_double_dual(gens):
    gens = [g for g in gens if any(g)]
    assume(gens)
    C = Cone(gens, 2)
    assert C.dual().dual() == C


@given(st.lists(small_vectors, min_size=1, max_size=3))
def test_faces_are_faces(gens):
    gens = [g for g in gens if any(g)]
    assume(gens)
    C = Cone(gens, 2)
    for F in C.faces():
        assert F.is_face_of(C)
        assert F.issubset(C)


def test_membership_in_three_dimensions():
    C = Cone([(1, 0, 0), (0, 1, 0), (1, 1, 1)], 3)
    assert C.contains((2, 3, 1)) and not C.contains((0, 0, 1))
    with pytest.raises(DomainError):
        C.dual()


def test_rank_one_signs():
    S = sl2_chambers()
    assert S.epsilon("G", "G") == 1
    assert S.epsilon("B", "G") == -1
    assert S.epsilon("B", "B") == 1


def test_unknown_label_raises():
    with pytest.raises(DomainError):
        sl2_chambers().closure("P")
    with pytest.raises(DomainError):
        sl2_chambers().epsilon("G", "B")


@given(rationals, rationals)
def test_rank_one_closed_forms(H, X):
    S = sl2_chambers()
    for (kind, P, Q), form in SL2_CLOSED_FORMS.items():
        fn = getattr(S, kind)(P, Q)
        if kind == "gamma":
            assert fn((H,), (X,)) == form(H, X)
        else:
            assert fn((H,)) == form(H)


@given(rationals, rationals, st.sampled_from(["B", "G"]))
def test_absorption_identity(H, X, P):
    lhs, rhs = absorption_sides(sl2_chambers(), P, (H,), (X,))
    assert lhs == rhs


@given(rationals)
def test_contraction_identity(H):
    S = sl2_chambers()
    for P1 in S.labels():
        for P in S.labels():
            if S.contains(P1, P):
                lhs, rhs = contraction_sides(S, P1, P, (H,))
                assert lhs == rhs


def test_rational_grid_contains_zero_and_endpoints():
    g = rational_grid(-5, 5, 1000)
    assert len(g) == 1000 and g[0] == -5 and g[-1] == 5 and Fraction(0) in g
