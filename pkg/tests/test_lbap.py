import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mmcoord.lbap import (FeasibilityCoefficients, LbapError, build_feasibility_lbap, check_feasibility,
                          perfect_matching, solve_lbap)


def brute_bottleneck(c):
    k = len(c)
    return min(max(c[p[l]][l] for l in range(k)) for p in itertools.permutations(range(k)))


def satisfying_perms(a, b):
    k = a.shape[1]
    return [p for p in itertools.permutations(range(k))
            if all(a[n, p[l], l] <= b[n, l] for n in range(a.shape[0]) for l in range(k))]


def test_worked_example():
    c = np.array([[4, 1, 3], [2, 0, 5], [3, 2, 2]], dtype=float)
    assert brute_bottleneck(c) == 2
    res = solve_lbap(c)
    assert res.bottleneck == 2
    # Column-wise: FRB 0 <- row 1, FRB 1 <- row 0, FRB 2 <- row 2.
    assert res.perm.tolist() == [1, 0, 2]


def test_constant_matrix():
    res = solve_lbap(np.full((4, 4), 3.5))
    assert res.bottleneck == 3.5
    assert sorted(res.perm.tolist()) == [0, 1, 2, 3]


def test_zero_diagonal_picks_identity():
    c = np.full((5, 5), 100.0)
    np.fill_diagonal(c, 0.0)
    res = solve_lbap(c)
    assert res.bottleneck == 0.0
    assert res.perm.tolist() == list(range(5))


def test_one_by_one():
    res = solve_lbap([[7.0]])
    assert res.bottleneck == 7.0 and res.perm.tolist() == [0]


def test_rejects_bad_input():
    with pytest.raises(LbapError):
        solve_lbap(np.ones((2, 3)))
    with pytest.raises(LbapError):
        solve_lbap([[1.0, np.inf], [0.0, 1.0]])


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
def test_matches_brute_force(k):
    rng = np.random.default_rng(k)
    for _ in range(60):
        c = rng.integers(0, 6, size=(k, k)).astype(float)  # many ties
        res = solve_lbap(c)
        assert res.bottleneck == brute_bottleneck(c)
        assert sorted(res.perm.tolist()) == list(range(k))
        assert res.bottleneck == c[res.perm, np.arange(k)].max()


def test_perfect_matching_detects_hall_violation():
    mask = np.array([[1, 0, 0], [1, 0, 0], [1, 1, 1]], dtype=bool)
    assert perfect_matching(mask) is None
    mask[1, 1] = True
    match = perfect_matching(mask)
    assert match is not None and all(mask[match[c], c] for c in range(3))


square = st.integers(2, 6).flatmap(
    lambda k: arrays(np.float64, (k, k), elements=st.floats(-50, 50, allow_nan=False)))


@settings(max_examples=150, deadline=None)
@given(square, st.randoms())
def test_bottleneck_invariant_under_row_col_permutation(c, rnd):
    k = c.shape[0]
    rows = list(range(k)); cols = list(range(k))
    rnd.shuffle(rows); rnd.shuffle(cols)
    assert solve_lbap(c[np.ix_(rows, cols)]).bottleneck == solve_lbap(c).bottleneck


@settings(max_examples=100, deadline=None)
@given(square)
def test_threshold_feasibility_is_monotone(c):
    values = np.unique(c)
    verdicts = [perfect_matching(c <= v) is not None for v in values]
    first = verdicts.index(True)
    assert all(verdicts[first:])
    assert values[first] == solve_lbap(c).bottleneck


# -------------------------------------------------------- feasibility reduction

def test_shift_chosen_automatically():
    a = np.array([[[-3.0, 0.0], [1.0, 2.0]]])
    b = np.array([[0.5, -1.0]])
    coeffs = FeasibilityCoefficients(a, b)
    assert coeffs.shift == pytest.approx(1.0 + 3.0 + 1e-6)
    assert np.all(build_feasibility_lbap(coeffs) > 0)


def test_invalid_shift_rejected():
    with pytest.raises(LbapError):
        FeasibilityCoefficients(np.full((1, 2, 2), -5.0), np.zeros((1, 2)), shift=4.0)


def test_trivial_reduction_is_all_ones():
    c = build_feasibility_lbap(FeasibilityCoefficients(np.zeros((1, 3, 3)), np.zeros((1, 3)), shift=1.0))
    assert np.array_equal(c, np.ones((3, 3)))


def test_reduction_hand_instance():
    a = np.array([[[1.0, 1.5], [2.0, 2.0]],
                  [[-4.0, 2.0], [-1.0, -7.0]]])
    b = np.array([[3.0, 4.0], [-1.0, -1.0]])
    c = build_feasibility_lbap(FeasibilityCoefficients(a, b, shift=10.0))
    expected = np.array([[11 / 13, 4 / 3], [1.0, 6 / 7]])
    np.testing.assert_allclose(c, expected, rtol=1e-15)


def test_reduction_translation_identity():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(3, 4, 4))
    b = rng.normal(size=(3, 4))
    base = build_feasibility_lbap(FeasibilityCoefficients(a, b, shift=5.0))
    moved = build_feasibility_lbap(FeasibilityCoefficients(a + 1.25, b + 1.25, shift=5.0 - 1.25))
    np.testing.assert_allclose(moved, base, rtol=1e-14)


def test_slack_constraints_always_feasible():
    feasible, witness = check_feasibility(FeasibilityCoefficients(np.full((2, 4, 4), -1e3), np.zeros((2, 4))))
    assert feasible and sorted(witness.tolist()) == [0, 1, 2, 3]


@pytest.mark.parametrize("k", [2, 3, 4])
def test_feasibility_agrees_with_enumeration(k):
    rng = np.random.default_rng(100 + k)
    for _ in range(80):
        c = int(rng.integers(1, 4))
        a = rng.normal(size=(c, k, k))
        b = rng.normal(size=(c, k)) + 0.3
        feasible, witness = check_feasibility(FeasibilityCoefficients(a, b))
        sols = satisfying_perms(a, b)
        assert feasible == bool(sols)
        if feasible:
            assert tuple(witness.tolist()) in sols


def test_unique_solution_is_found():
    # Build constraints admitting exactly one permutation, then confirm by enumeration.
    k = 4
    target = (2, 0, 3, 1)
    a = np.ones((1, k, k))
    for l, row in enumerate(target):
        a[0, row, l] = -1.0
    b = np.zeros((1, k))
    assert satisfying_perms(a, b) == [target]
    feasible, witness = check_feasibility(FeasibilityCoefficients(a, b))
    assert feasible and tuple(witness.tolist()) == target
