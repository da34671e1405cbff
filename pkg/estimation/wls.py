"""
Weighted least squares parameter estimation.

    Phi(theta) = sum_mu e_mu^T C_M^-1 e_mu,   e = y(u_mu, theta) - y^m_mu

The bounded problem is solved by scipy's trust-region reflective
least_squares on the noise-scaled residuals, with the analytic sensitivity
Jacobian. Fixed parameters are held at their theta0 value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
from typing import Any, Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from .responses import (
    ModelLike,
    ParameterBounds,
    ParameterVector,
    ResponseSpec,
    as_model,
    as_vector,
    check_variables,
)
from .sensitivity import active_indices, responses_and_sensitivities, responses_over_design
from .uncertainty import covariance_matrix, dof, estimate_measurement_error, parameter_ci
from nrtlstudy.exceptions import DomainError, SingularMatrixError
from nrtlstudy.utils import time_if_enabled

logger = logging.getLogger("eventsinfo.estimation")

MAX_NFEV = 200
XTOL = 1e-10
GTOL = 1e-8
BOUND_ACTIVE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class MeasurementSet:
    """Measured responses Ym (N_mu x N_y) at design rows U, with noise spec."""

    U: np.ndarray
    Ym: np.ndarray
    spec: ResponseSpec

    def __post_init__(self) -> None:
        U = np.atleast_2d(np.asarray(self.U, dtype=float))
        Ym = np.asarray(self.Ym, dtype=float).reshape(U.shape[0], -1)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "Ym", Ym)
        if Ym.shape[1] != self.spec.n_y:
            raise DomainError("Ym", Ym.shape, f"{self.spec.n_y} response columns")
        if not np.all(np.isfinite(Ym)):
            raise DomainError("Ym", "non-finite values", "finite measurements")

    @property
    def n_experiments(self) -> int:
        return self.U.shape[0]

    def with_experiments(self, U_new: np.ndarray, Y_new: np.ndarray) -> MeasurementSet:
        return MeasurementSet(
            U=np.vstack([self.U, np.atleast_2d(U_new)]),
            Ym=np.vstack([self.Ym, np.atleast_2d(Y_new)]),
            spec=self.spec,
        )

    def subset(self, rows: Sequence[int]) -> MeasurementSet:
        return MeasurementSet(U=self.U[list(rows)], Ym=self.Ym[list(rows)], spec=self.spec)


@dataclass(frozen=True)
class FitResult:
    """
    Outcome of fit_wls.

    C covers the estimated parameters that are not pinned at a bound
    (ci_mask); it is None when the FIM is singular.
    """

    theta_hat: np.ndarray
    mask: tuple[bool, ...]
    ci_mask: tuple[bool, ...]
    phi: float
    C: Optional[np.ndarray]
    s_y: np.ndarray
    dof: float
    converged: bool
    n_iter: int
    residuals: np.ndarray
    parameter_names: tuple[str, ...]
    message: str = ""
    condition_number: float = field(default=float("nan"))

    def ci_half_widths(self, beta: float = 0.95) -> np.ndarray:
        """Half-width per parameter; NaN for fixed or bound-pinned parameters."""
        half_widths = np.full(len(self.theta_hat), np.nan)
        if self.C is None:
            return half_widths
        columns = active_indices(self.ci_mask)
        if columns:
            half_widths[columns] = parameter_ci(
                self.theta_hat[columns], self.C, self.dof, beta
            )
        return half_widths

    def log_context(self) -> dict[str, Any]:
        """Return a dict suitable for logging context."""
        return {
            "phi": round(self.phi, 6),
            "converged": self.converged,
            "n_iter": self.n_iter,
            "n_active": sum(self.mask),
            "dof": self.dof,
        }


def wls_objective(theta: ParameterVector, data: MeasurementSet, model: ModelLike) -> float:
    """Phi = sum of squared noise-scaled residuals."""
    Y = responses_over_design(data.U, theta, data.spec, model)
    scaled = (Y - data.Ym) / np.asarray(data.spec.sigma)[np.newaxis, :]
    return float(np.sum(scaled**2))


class _ResidualCache:
    """Shares one model pass between least_squares' fun and jac calls."""

    def __init__(self, model, data: MeasurementSet, theta_full: np.ndarray, mask):
        self.model = model
        self.data = data
        self.theta_full = theta_full.copy()
        self.columns = active_indices(mask)
        self.mask = tuple(mask)
        self.row_sigma = data.spec.row_sigma(data.n_experiments)
        self._key: Optional[bytes] = None
        self._value: tuple[np.ndarray, np.ndarray] = (np.zeros(0), np.zeros((0, 0)))

    def theta(self, x: np.ndarray) -> np.ndarray:
        theta = self.theta_full.copy()
        theta[self.columns] = x
        return theta

    def evaluate(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        key = x.tobytes()
        if key != self._key:
            Y, S = responses_and_sensitivities(
                self.data.U, self.theta(x), self.mask, self.data.spec, self.model
            )
            residuals = (Y - self.data.Ym).ravel() / self.row_sigma
            jacobian = S.values / self.row_sigma[:, np.newaxis]
            self._key = key
            self._value = (residuals, jacobian)
        return self._value

    def fun(self, x: np.ndarray) -> np.ndarray:
        return self.evaluate(x)[0]

    def jac(self, x: np.ndarray) -> np.ndarray:
        return self.evaluate(x)[1]


@time_if_enabled("fit_wls")
def fit_wls(
    theta0: ParameterVector,
    bounds: ParameterBounds,
    mask: Sequence[bool],
    data: MeasurementSet,
    model: ModelLike,
) -> FitResult:
    """Estimate the active parameters of theta0 by bounded weighted least squares."""
    response_model = as_model(model)
    check_variables(response_model, data.spec)
    start = as_vector(theta0)
    columns = active_indices(mask)
    if not columns:
        raise DomainError("mask", tuple(mask), "at least one active parameter")
    if len(mask) != len(start) or len(bounds.lower) != len(start):
        raise DomainError("mask", tuple(mask), f"{len(start)} flags and bounds")
    cache = _ResidualCache(response_model, data, start, mask)
    lower = np.asarray(bounds.lower)[columns]
    upper = np.asarray(bounds.upper)[columns]
    x0 = start[columns]
    if np.any(x0 < lower) or np.any(x0 > upper):
        raise DomainError("theta0", tuple(start), "estimated values within bounds")
    phi0 = float(np.sum(cache.fun(x0) ** 2))

    solver_options: dict[str, Any] = dict(
        jac=cache.jac,
        bounds=(lower, upper),
        method="trf",
        x_scale="jac",
        xtol=XTOL,
        gtol=GTOL,
        ftol=None,
        max_nfev=MAX_NFEV,
    )
    try:
        solution = least_squares(cache.fun, x0, **solver_options)
    except np.linalg.LinAlgError:
        # Damped retry: regularized LSMR trust-region subproblem
        logger.info("fit_wls damped retry", extra={"n_active": len(columns)})
        try:
            solution = least_squares(
                cache.fun,
                x0,
                tr_solver="lsmr",
                tr_options={"regularize": True},
                **solver_options,
            )
        except np.linalg.LinAlgError:
            raise SingularMatrixError(float("inf"))

    x_hat = solution.x
    phi = float(2.0 * solution.cost)
    at_bound = np.zeros(len(start), dtype=bool)
    at_bound[columns] = solution.active_mask != 0
    if phi > phi0:
        x_hat, phi = x0, phi0
        at_bound[:] = False
    theta_hat = cache.theta(x_hat)
    return _fit_result(
        response_model,
        data,
        theta_hat,
        tuple(bool(flag) for flag in mask),
        bounds,
        phi=phi,
        converged=bool(solution.status > 0),
        n_iter=int(solution.nfev),
        message=str(solution.message),
        at_bound=at_bound,
    )


def _fit_result(
    model,
    data: MeasurementSet,
    theta_hat: np.ndarray,
    mask: tuple[bool, ...],
    bounds: ParameterBounds,
    phi: float,
    converged: bool,
    n_iter: int,
    message: str,
    at_bound: Optional[np.ndarray] = None,
) -> FitResult:
    """
    Evaluate residuals, covariance and s_y at theta_hat.

    A parameter is pinned when the solver reports its bound active, or when
    it lies within BOUND_ACTIVE_TOLERANCE of a bound.
    """
    lower, upper = np.asarray(bounds.lower), np.asarray(bounds.upper)
    pinned = (np.abs(theta_hat - lower) <= BOUND_ACTIVE_TOLERANCE) | (
        np.abs(theta_hat - upper) <= BOUND_ACTIVE_TOLERANCE
    )
    if at_bound is not None:
        pinned |= at_bound
    ci_mask = tuple(bool(flag and not pinned[j]) for j, flag in enumerate(mask))
    Y, S = responses_and_sensitivities(data.U, theta_hat, ci_mask, data.spec, model)
    residuals = Y - data.Ym
    dof_value = dof(data.n_experiments, sum(mask), data.spec.n_y)
    C: Optional[np.ndarray]
    condition_number = float("nan")
    try:
        C = covariance_matrix(S, data.spec)
    except SingularMatrixError as e:
        C = None
        condition_number = e.condition_number
    return FitResult(
        theta_hat=theta_hat,
        mask=mask,
        ci_mask=ci_mask,
        phi=phi,
        C=C,
        s_y=estimate_measurement_error(residuals, dof_value),
        dof=dof_value,
        converged=converged,
        n_iter=n_iter,
        residuals=residuals,
        parameter_names=tuple(model.parameter_names),
        message=message,
        condition_number=condition_number,
    )


def evaluate_fixed(
    theta: ParameterVector,
    bounds: ParameterBounds,
    data: MeasurementSet,
    model: ModelLike,
) -> FitResult:
    """A FitResult with every parameter fixed (nothing to estimate)."""
    response_model = as_model(model)
    vector = as_vector(theta)
    mask = (False,) * len(vector)
    phi = wls_objective(vector, data, response_model)
    return _fit_result(
        response_model, data, vector, mask, bounds, phi, True, 0, "all fixed"
    )
