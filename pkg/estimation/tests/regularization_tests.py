import itertools

import numpy as np
import pytest

from estimation.regularization import (
    RegularizationMethod,
    RegularizationThresholds,
    identify,
    regularize_e,
    regularize_fs,
    regularize_go,
    regularize_svd,
)
from estimation.responses import ResponseSpec
from estimation.sensitivity import SensitivityMatrix
from nrtlstudy.exceptions import DomainError

UNIT = ResponseSpec(("y",), (1.0,))


def brute_force_go(Sbar):
    """Largest det(S_J^T S_J) by enumeration, preferring larger subsets."""
    n = Sbar.shape[1]
    scored = []
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            columns = Sbar[:, list(subset)]
            eigenvalues = np.linalg.eigvalsh(columns.T @ columns)
            scored.append((float(np.prod(eigenvalues)), size, subset))
    return max(scored, key=lambda item: (item[0], item[1]))[2]


def test_e_identity():
    result = regularize_e(np.eye(5))
    assert result.identifiable == (0, 1, 2, 3, 4)
    assert result.fixed == ()
    assert result.diagnostics == pytest.approx(np.ones(5))


def test_e_duplicate_columns():
    Sbar = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
    result = regularize_e(Sbar)
    assert len(set(result.identifiable) & {0, 1}) == 1
    assert 2 in result.identifiable
    assert len(result.fixed) == 1
    assert result.ranking[-1] == result.fixed[0]


def test_e_weak_column():
    result = regularize_e(np.diag([1.0, 1.0, 1e-4]))
    assert result.identifiable == (0, 1)
    assert result.fixed == (2,)
    assert result.method == "E"


def test_svd_identity():
    assert regularize_svd(np.eye(5)).identifiable == (0, 1, 2, 3, 4)


def test_svd_ill_conditioned():
    result = regularize_svd(np.diag([1.0, 1e-4]))
    assert result.identifiable == (0,)
    assert result.fixed == (1,)
    assert result.ranking == (0, 1)
    assert result.diagnostics == pytest.approx([1.0, 1e-4])


def test_svd_moderately_conditioned():
    assert regularize_svd(np.diag([1.0, 0.01])).identifiable == (0, 1)


def test_svd_threshold():
    assert regularize_svd(np.diag([1.0, 0.01]), eps_cond=50.0).identifiable == (0,)


def test_fs_below_threshold():
    result = regularize_fs(np.full((3, 2), 0.01))
    assert result.identifiable == ()
    assert result.fixed == (0, 1)


def test_fs_orthogonal_columns():
    result = regularize_fs(np.array([[1.0, 0.0], [0.0, 0.5]]))
    assert result.identifiable == (0, 1)
    assert result.diagnostics == pytest.approx([1.0, 0.5])


def test_fs_orders_by_magnitude():
    result = regularize_fs(np.array([[0.5, 0.0], [0.0, 1.0]]))
    assert result.identifiable == (1, 0)
    assert result.ranking == (1, 0)


def test_fs_identical_columns():
    result = regularize_fs(np.array([[1.0, 1.0], [0.0, 0.0]]))
    assert result.identifiable == (0,)
    assert result.diagnostics[1] == pytest.approx(0.0, abs=1e-15)


def test_go_identity_prefers_full_set():
    result = regularize_go(np.eye(5))
    assert result.identifiable == (0, 1, 2, 3, 4)
    assert result.diagnostics == pytest.approx([1.0])


def test_go_collinear_pair():
    result = regularize_go(np.array([[2.0, 2.0], [0.0, 0.0]]))
    assert result.identifiable == (0,)
    assert result.diagnostics == pytest.approx([4.0])


def test_go_matches_enumeration():
    rng = np.random.default_rng(200)
    for _ in range(200):
        Sbar = rng.normal(size=(4, 3)) * rng.uniform(0.01, 2.0, size=3)
        assert regularize_go(Sbar).identifiable == brute_force_go(Sbar)


def test_go_column_limit():
    with pytest.raises(DomainError):
        regularize_go(np.ones((2, 21)))


REGULARIZERS = [regularize_e, regularize_svd, regularize_fs, regularize_go]


def generic_columns(rng):
    Sbar = rng.normal(size=(6, 4)) * rng.uniform(0.005, 2.0, size=4)
    Sbar[:, 3] = Sbar[:, 0] + rng.uniform(1e-4, 1e-2) * rng.normal(size=6)
    return Sbar


@pytest.mark.parametrize("regularize", REGULARIZERS, ids=lambda fn: fn.__name__)
def test_selection_is_deterministic(regularize):
    Sbar = generic_columns(np.random.default_rng(300))
    first, second = regularize(Sbar), regularize(Sbar.copy())
    assert first == second
    np.testing.assert_array_equal(first.diagnostics, second.diagnostics)


@pytest.mark.parametrize("regularize", REGULARIZERS, ids=lambda fn: fn.__name__)
def test_selection_follows_column_order(regularize):
    rng = np.random.default_rng(301)
    for _ in range(50):
        Sbar = generic_columns(rng)
        order = rng.permutation(4)
        expected = set(regularize(Sbar).identifiable)
        permuted = regularize(Sbar[:, order])
        assert {int(order[index]) for index in permuted.identifiable} == expected


def test_e_keeps_everything_above_threshold():
    rng = np.random.default_rng(302)
    for _ in range(50):
        Sbar = rng.normal(size=(8, 4))
        if np.linalg.eigvalsh(Sbar.T @ Sbar)[0] < 1e-3:
            continue
        result = regularize_e(Sbar)
        assert result.identifiable == (0, 1, 2, 3)
        assert result.fixed == ()

def test_thresholds_must_be_positive():
    with pytest.raises(DomainError) as excinfo:
        RegularizationThresholds(fs_eps=0.0)
    assert str(excinfo.value) == "fs_eps=0.0 is invalid, expected a threshold > 0."


def test_identify_maps_full_indices():
    S = SensitivityMatrix(
        np.array([[1.0, 1.0], [0.0, 0.0], [0.0, 0.0]]), ("a", "c"), ("y",)
    )
    result = identify(
        RegularizationMethod.GO, S, [2.0, 5.0, 2.0], (True, False, True), UNIT
    )
    assert result.identifiable == (0,)
    assert result.fixed == (2,)
    assert result.ranking == (0, 2)
    assert result.identifiable_mask(3) == (True, False, False)


def test_identify_noise_scaling():
    S = SensitivityMatrix(np.array([[1.0, 0.0], [0.0, 1.0]]), ("a", "b"), ("y",))
    spec = ResponseSpec(("y",), (100.0,))
    result = identify(RegularizationMethod.E, S, [1.0, 1.0], (True, True), spec)
    assert result.identifiable == ()
    assert result.fixed == (0, 1)
    relaxed = identify(
        RegularizationMethod.E,
        S,
        [1.0, 1.0],
        (True, True),
        spec,
        thresholds=RegularizationThresholds(e_eps=1e-5),
    )
    assert relaxed.identifiable == (0, 1)


def test_identify_fs_needs_predictions():
    S = SensitivityMatrix(np.eye(2), ("a", "b"), ("y",))
    with pytest.raises(DomainError):
        identify(RegularizationMethod.FS, S, [1.0, 1.0], (True, True), UNIT)
    result = identify(
        RegularizationMethod.FS, S, [1.0, 1.0], (True, True), UNIT, y_pred=np.array([1.0, 1.0])
    )
    assert result.identifiable == (0, 1)
