import math

import numpy as np
import pytest

from estimation.responses import (
    LinearSurrogate,
    NrtlVleModel,
    ParameterBounds,
    ResponseSpec,
)
from estimation.sensitivity import responses_over_design
from estimation.wls import MeasurementSet, evaluate_fixed, fit_wls, wls_objective
from montecarlo.scenarios import case_study_one_grid
from nrtlstudy.exceptions import DomainError
from nrtlstudy.stats import RngStream, sample_normal
from thermo.fixtures import ETHBENZ_LIKE

SPEC = ResponseSpec(("y",), (0.1,), "noisy")
SURROGATE = LinearSurrogate()
UNBOUNDED = ParameterBounds.unbounded(2)
U_LINE = np.linspace(0.0, 1.0, 12)[:, np.newaxis]


def line_data(seed=0, sigma=0.1):
    y_true = 1.0 + 2.0 * U_LINE[:, 0]
    Ym = sample_normal(RngStream(seed, 0), y_true, sigma, len(y_true))
    return MeasurementSet(U_LINE, Ym[:, np.newaxis], SPEC)


def test_measurement_set_validation():
    with pytest.raises(DomainError):
        MeasurementSet(U_LINE[:2], np.array([[1.0], [np.nan]]), SPEC)
    with pytest.raises(DomainError):
        MeasurementSet(U_LINE[:2], np.ones((2, 2)), SPEC)


def test_measurement_set_growth():
    data = line_data()
    grown = data.with_experiments(np.array([[0.5]]), np.array([[2.0]]))
    assert grown.n_experiments == 13
    assert grown.subset([12]).Ym.tolist() == [[2.0]]


def test_objective_hand_value():
    data = MeasurementSet(np.array([[0.5]]), np.array([[-0.002]]), ResponseSpec(("y",), (0.001,)))
    assert wls_objective((0.0, 0.0), data, SURROGATE) == pytest.approx(4.0)


def test_objective_is_zero_at_generating_parameters():
    data = MeasurementSet(U_LINE, 1.0 + 2.0 * U_LINE, SPEC)
    assert wls_objective((1.0, 2.0), data, SURROGATE) == 0.0


def test_objective_is_additive():
    data = line_data()
    theta = (0.9, 2.2)
    first, second = data.subset(range(5)), data.subset(range(5, 12))
    assert wls_objective(theta, data, SURROGATE) == pytest.approx(
        wls_objective(theta, first, SURROGATE) + wls_objective(theta, second, SURROGATE)
    )


def test_fit_matches_normal_equations():
    data = line_data(seed=3)
    X = np.column_stack([np.ones(12), U_LINE[:, 0]])
    expected = np.linalg.solve(X.T @ X, X.T @ data.Ym[:, 0])
    result = fit_wls((0.0, 0.0), UNBOUNDED, (True, True), data, SURROGATE)
    assert result.theta_hat == pytest.approx(expected, abs=1e-8)
    assert result.converged
    assert result.dof == 10.0
    residuals = X @ expected - data.Ym[:, 0]
    assert result.phi == pytest.approx(np.sum((residuals / 0.1) ** 2), rel=1e-8)
    assert result.s_y == pytest.approx([np.sqrt(np.sum(residuals**2) / 10.0)])
    assert result.C == pytest.approx(0.01 * np.linalg.inv(X.T @ X))
    assert result.parameter_names == ("theta1", "theta2")


def test_fit_holds_fixed_parameters():
    data = line_data(seed=4)
    result = fit_wls((1.5, 0.0), UNBOUNDED, (False, True), data, SURROGATE)
    u = U_LINE[:, 0]
    slope = np.sum(u * (data.Ym[:, 0] - 1.5)) / np.sum(u * u)
    assert result.theta_hat[0] == 1.5
    assert result.theta_hat[1] == pytest.approx(slope, abs=1e-8)
    assert result.dof == 11.0
    assert result.C.shape == (1, 1)
    half_widths = result.ci_half_widths()
    assert math.isnan(half_widths[0])
    assert math.isfinite(half_widths[1])


def test_fit_pinned_at_bound_has_no_interval():
    data = line_data(seed=5)
    bounds = ParameterBounds(lower=(-10.0, -10.0), upper=(10.0, 1.0))
    result = fit_wls((0.0, 0.0), bounds, (True, True), data, SURROGATE)
    assert result.theta_hat[1] == pytest.approx(1.0)
    assert result.ci_mask == (True, False)
    assert result.C.shape == (1, 1)
    assert math.isnan(result.ci_half_widths()[1])


def test_fit_start_outside_bounds():
    bounds = ParameterBounds(lower=(-10.0, -10.0), upper=(10.0, 1.0))
    with pytest.raises(DomainError) as excinfo:
        fit_wls((0.0, 2.0), bounds, (True, True), line_data(), SURROGATE)
    assert excinfo.value.expected == "estimated values within bounds"


def test_fit_needs_an_active_parameter():
    with pytest.raises(DomainError):
        fit_wls((0.0, 0.0), UNBOUNDED, (False, False), line_data(), SURROGATE)


def test_evaluate_fixed():
    data = line_data(seed=6)
    result = evaluate_fixed((1.0, 2.0), UNBOUNDED, data, SURROGATE)
    assert result.mask == (False, False)
    assert result.phi == pytest.approx(wls_objective((1.0, 2.0), data, SURROGATE))
    assert result.dof == 12.0
    assert result.n_iter == 0
    assert np.all(np.isnan(result.ci_half_widths()))


def nrtl_data(spec):
    model = NrtlVleModel(ETHBENZ_LIKE)
    U = case_study_one_grid()
    theta = ETHBENZ_LIKE.nrtl.as_array()
    return model, theta, MeasurementSet(U, responses_over_design(U, theta, spec, model), spec)


def test_fit_at_truth_stays_at_truth():
    model, theta, data = nrtl_data(ResponseSpec.named("best"))
    result = fit_wls(theta, ParameterBounds.nrtl(), (True,) * 5, data, model)
    assert result.phi <= 1e-16
    assert result.theta_hat == pytest.approx(theta, rel=1e-8)


def test_fit_recovers_truth_from_perturbed_start():
    model, theta, data = nrtl_data(ResponseSpec.named("best"))
    result = fit_wls(1.1 * theta, ParameterBounds.nrtl(), (True,) * 5, data, model)
    assert result.theta_hat == pytest.approx(theta, rel=1e-6)
    assert result.converged
    C = result.C
    assert np.array_equal(C, C.T)
    eigenvalues = np.linalg.eigvalsh(C)
    assert eigenvalues.min() >= -1e-10 * eigenvalues.max()


@pytest.mark.parametrize("seed", [0, 3, 8])
def test_refit_from_estimate_is_idempotent(seed):
    data = line_data(seed=seed)
    first = fit_wls((0.0, 0.0), UNBOUNDED, (True, True), data, SURROGATE)
    again = fit_wls(first.theta_hat, UNBOUNDED, (True, True), data, SURROGATE)
    np.testing.assert_allclose(again.theta_hat, first.theta_hat, rtol=0, atol=1e-10)
    assert again.phi == pytest.approx(first.phi, rel=1e-12)
