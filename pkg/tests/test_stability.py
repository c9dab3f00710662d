import numpy as np
import pytest

from fuseflow.errors import UndefinedMetricError
from fuseflow.stability import (
    StabilityInput,
    estimation_stability,
    multiset_dice,
    supports_of,
)


def test_es_zero_for_identical_folds():
    rng = np.random.default_rng(61)
    X = rng.standard_normal((4, 9))
    beta = rng.standard_normal(4)
    inp = StabilityInput(X=X, betas=np.vstack([beta, beta, beta]))
    assert estimation_stability(inp) == 0.0


def test_es_hand_computed():
    inp = StabilityInput(X=np.array([[1.0]]), betas=np.array([[2.0], [0.0]]))
    assert estimation_stability(inp) == pytest.approx(1.0)


def test_es_undefined_for_zero_mean():
    inp = StabilityInput(X=np.eye(2), betas=np.zeros((2, 2)))
    with pytest.raises(UndefinedMetricError):
        estimation_stability(inp)
    # nonzero folds with zero mean are equally undefined
    inp = StabilityInput(X=np.eye(2), betas=np.array([[1.0, 0.0], [-1.0, 0.0]]))
    with pytest.raises(UndefinedMetricError):
        estimation_stability(inp)


def test_es_nonnegative_and_permutation_invariant():
    rng = np.random.default_rng(62)
    X = rng.standard_normal((5, 11))
    betas = rng.standard_normal((4, 5))
    inp = estimation_stability(StabilityInput(X=X, betas=betas))
    assert inp >= 0.0
    perm = estimation_stability(StabilityInput(X=X, betas=betas[[2, 0, 3, 1]]))
    assert inp == pytest.approx(perm)


def test_mdc_identical_supports():
    assert multiset_dice([{1, 2, 5}, {1, 2, 5}, {1, 2, 5}]) == 1.0


def test_mdc_half_overlap():
    assert multiset_dice([{1, 2}, {2, 3}]) == pytest.approx(0.5)


def test_mdc_disjoint():
    assert multiset_dice([{0}, {1}, {2}]) == 0.0


def test_mdc_all_empty_undefined():
    with pytest.raises(UndefinedMetricError):
        multiset_dice([set(), set()])


def test_mdc_some_empty_is_zero():
    assert multiset_dice([set(), {1, 2}]) == 0.0


def test_mdc_bounds_and_permutation_invariance():
    rng = np.random.default_rng(63)
    for _ in range(20):
        k = int(rng.integers(2, 6))
        sets = [
            set(rng.choice(10, size=rng.integers(1, 8), replace=False).tolist())
            for _ in range(k)
        ]
        val = multiset_dice(sets)
        assert 0.0 <= val <= 1.0
        order = rng.permutation(k)
        assert multiset_dice([sets[i] for i in order]) == pytest.approx(val)


def test_mdc_one_iff_equal_supports():
    rng = np.random.default_rng(64)
    for _ in range(20):
        base = set(rng.choice(12, size=5, replace=False).tolist())
        sets = [set(base) for _ in range(3)]
        if rng.integers(0, 2):
            # perturb one set; mDC must drop below 1
            extra = int(rng.integers(0, 12))
            sets[1] = base | {extra} if extra not in base else base - {extra}
            assert multiset_dice(sets) < 1.0
        else:
            assert multiset_dice(sets) == 1.0


def test_supports_of_exact_zeros():
    betas = np.array([[0.0, 1.0, -2.0], [1e-300, 0.0, 3.0]])
    assert supports_of(betas) == [{1, 2}, {0, 2}]


def test_stability_input_validation():
    with pytest.raises(ValueError):
        StabilityInput(X=np.eye(2), betas=np.zeros((1, 2)))
    with pytest.raises(ValueError):
        StabilityInput(X=np.eye(3), betas=np.zeros((2, 2)))
