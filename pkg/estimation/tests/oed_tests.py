import math
from unittest.mock import patch

import numpy as np
import pytest

from estimation.oed import (
    Criterion,
    criterion_value,
    design_next,
    seed_lattice,
)
from estimation.responses import LinearSurrogate, NrtlVleModel, ResponseSpec
from estimation.sensitivity import sensitivity_matrix
from nrtlstudy.exceptions import DesignError, DomainError
from thermo.fixtures import ETHBENZ_LIKE

UNIT = ResponseSpec(("y",), (1.0,))
SURROGATE = LinearSurrogate()
THETA = (1.0, 2.0)
BOTH = (True, True)


@pytest.mark.parametrize(
    "diagonal,criterion,expected",
    [
        ([1.0, 2.0, 3.0], Criterion.A, 6.0),
        ([1.0, 1.0, 1.0], Criterion.D, 1.0),
        ([1.0, 5.0], Criterion.E, 5.0),
    ],
)
def test_criterion_value(diagonal, criterion, expected):
    S = np.diag(1.0 / np.sqrt(diagonal))
    sigma = np.ones(len(diagonal))
    assert criterion_value(S, sigma, criterion) == pytest.approx(expected)


def test_criterion_value_singular():
    S = np.array([[1.0, 1.0], [2.0, 2.0]])
    assert criterion_value(S, UNIT, Criterion.A) == math.inf


def test_seed_lattice_two_controls():
    lattice = seed_lattice(((0.01, 0.99), (0.5e5, 1.5e5)), 21)
    assert lattice.shape == (21, 2)
    assert lattice[0].tolist() == [0.01, 0.5e5]
    assert lattice[6].tolist() == [0.99, 0.5e5]
    assert lattice[7].tolist() == [0.01, 1.0e5]
    assert lattice[20].tolist() == [0.99, 1.5e5]


def test_seed_lattice_single_level():
    lattice = seed_lattice(((0.0, 1.0), (0.0, 2.0)), 4)
    assert lattice[:, 1].tolist() == [1.0] * 4


def test_seed_lattice_one_control():
    assert seed_lattice(((0.0, 1.0),), 5)[:, 0].tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]


@pytest.mark.parametrize("criterion", list(Criterion))
def test_criterion_never_increases_when_rows_are_added(criterion):
    rng = np.random.default_rng(11)
    S = rng.normal(size=(4, 3))
    value = criterion_value(S, UNIT, criterion)
    for _ in range(100):
        S = np.vstack([S, rng.normal(size=(1, 3))])
        grown = criterion_value(S, UNIT, criterion)
        assert grown <= value * (1 + 1e-10)
        value = grown


@pytest.mark.parametrize("criterion", list(Criterion))
def test_criterion_ignores_row_order(criterion):
    rng = np.random.default_rng(12)
    S = rng.normal(size=(9, 3))
    value = criterion_value(S, UNIT, criterion)
    for _ in range(5):
        shuffled = S[rng.permutation(9)]
        assert criterion_value(shuffled, UNIT, criterion) == pytest.approx(value, rel=1e-10)


def dense_grid_optimum(U_exp, criterion):
    grid = np.linspace(0.0, 1.0, 1001)
    values = [
        criterion_value(
            sensitivity_matrix(
                np.vstack([U_exp, [[u]]]), THETA, BOTH, UNIT, SURROGATE
            ),
            UNIT,
            criterion,
        )
        for u in grid
    ]
    best = int(np.argmin(values))
    return grid[best], values[best]


def test_surrogate_a_optimal_point_is_on_the_boundary():
    U_exp = np.array([[0.5]])
    candidate = design_next(U_exp, THETA, BOTH, UNIT, SURROGATE)
    u_oracle, value_oracle = dense_grid_optimum(U_exp, Criterion.A)
    assert u_oracle == 0.0
    assert candidate.u_new.shape == (1, 1)
    assert candidate.u_new[0, 0] == pytest.approx(u_oracle, abs=1e-3)
    assert candidate.value == pytest.approx(value_oracle, rel=1e-6)
    assert candidate.value == pytest.approx(9.0, rel=1e-6)
    assert candidate.criterion == Criterion.A


@pytest.mark.parametrize("criterion", [Criterion.D, Criterion.E])
def test_surrogate_matches_dense_grid(criterion):
    U_exp = np.array([[0.3], [0.4]])
    candidate = design_next(U_exp, THETA, BOTH, UNIT, SURROGATE, criterion=criterion)
    _, value_oracle = dense_grid_optimum(U_exp, criterion)
    assert candidate.value <= value_oracle * (1 + 1e-6)


def test_design_dominates_duplicates():
    U_exp = np.array([[0.2], [0.7]])
    candidate = design_next(U_exp, THETA, BOTH, UNIT, SURROGATE)
    for row in U_exp:
        S = sensitivity_matrix(np.vstack([U_exp, [row]]), THETA, BOTH, UNIT, SURROGATE)
        assert candidate.value <= criterion_value(S, UNIT, Criterion.A)


def test_design_is_deterministic():
    U_exp = np.array([[0.2], [0.7]])
    first = design_next(U_exp, THETA, BOTH, UNIT, SURROGATE, n_new=2)
    second = design_next(U_exp, THETA, BOTH, UNIT, SURROGATE, n_new=2)
    assert np.array_equal(first.u_new, second.u_new)
    assert first.start_index == second.start_index
    assert first.u_new.shape == (2, 1)


def test_design_threads_match_serial():
    U_exp = np.array([[0.2], [0.7]])
    serial = design_next(U_exp, THETA, BOTH, UNIT, SURROGATE)
    threaded = design_next(U_exp, THETA, BOTH, UNIT, SURROGATE, threads=3)
    assert np.array_equal(serial.u_new, threaded.u_new)
    assert serial.value == threaded.value


def test_design_all_starts_fail():
    with patch("estimation.oed.minimize", side_effect=ValueError("bad start")):
        with pytest.raises(DesignError) as excinfo:
            design_next(np.array([[0.5]]), THETA, BOTH, UNIT, SURROGATE, n_starts=3)
    assert str(excinfo.value) == "All 3 design starts failed."
    assert excinfo.value.diagnostics[0] == "start 0: ValueError('bad start')"


@pytest.mark.parametrize(
    "U_exp,mask,n_new",
    [(np.zeros((0, 1)), BOTH, 1), (np.array([[0.5]]), (False, False), 1), (np.array([[0.5]]), BOTH, 0)],
)
def test_design_domain(U_exp, mask, n_new):
    with pytest.raises(DomainError):
        design_next(U_exp, THETA, mask, UNIT, SURROGATE, n_new=n_new)


def test_nrtl_design_within_bounds():
    model = NrtlVleModel(ETHBENZ_LIKE)
    U_exp = np.array([[0.05, 0.5e5], [0.95, 1.5e5], [0.5, 1.0e5]])
    candidate = design_next(
        U_exp,
        ETHBENZ_LIKE.nrtl,
        (True, True, True, True, False),
        ResponseSpec.named("best"),
        model,
        n_starts=3,
    )
    (x1L, P), = candidate.u_new
    assert 0.01 <= x1L <= 0.99
    assert 0.5e5 <= P <= 1.5e5
    assert math.isfinite(candidate.value)
