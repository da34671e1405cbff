"""
Linearized parameter and prediction uncertainty.

C = (S^T C_M^-1 S)^-1 is the Gauss approximation of the parameter covariance.
Confidence half-widths use sqrt(diag C) times a Student t quantile; C already
carries the measurement noise through C_M, so no extra noise factor is applied.
"""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Sequence, Union

import numpy as np

from .responses import ModelLike, ParameterVector, ResponseSpec
from .sensitivity import SensitivityMatrix, responses_and_sensitivities
from nrtlstudy.exceptions import DomainError, SingularMatrixError
from nrtlstudy.stats import t_quantile

MAX_CONDITION_NUMBER = 1e14

SensitivityLike = Union[SensitivityMatrix, np.ndarray]


def _values(S: SensitivityLike) -> np.ndarray:
    return S.values if isinstance(S, SensitivityMatrix) else np.atleast_2d(S)


def _row_sigma(values: np.ndarray, spec: Union[ResponseSpec, np.ndarray]) -> np.ndarray:
    if isinstance(spec, ResponseSpec):
        return spec.row_sigma(values.shape[0] // spec.n_y)
    sigma = np.asarray(spec, dtype=float).ravel()
    if sigma.size == 1:
        return np.full(values.shape[0], float(sigma[0]))
    return sigma


def fisher_information(
    S: SensitivityLike, spec: Union[ResponseSpec, np.ndarray]
) -> np.ndarray:
    """S^T C_M^-1 S with C_M diagonal."""
    values = _values(S)
    weights = 1.0 / _row_sigma(values, spec) ** 2
    return values.T @ (values * weights[:, np.newaxis])


def invert_fisher_information(fim: np.ndarray) -> np.ndarray:
    """
    Invert a FIM after diagonal equilibration, symmetrizing the result.

    The condition number is that of the equilibrated matrix, which does not
    change when a parameter is rescaled.
    """
    n = fim.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    diagonal = np.diag(fim).copy()
    if np.any(diagonal <= 0.0) or not np.all(np.isfinite(fim)):
        raise SingularMatrixError(math.inf)
    scale = 1.0 / np.sqrt(diagonal)
    equilibrated = fim * np.outer(scale, scale)
    condition = float(np.linalg.cond(equilibrated))
    if not condition <= MAX_CONDITION_NUMBER:
        raise SingularMatrixError(condition)
    inverse = np.linalg.inv(equilibrated) * np.outer(scale, scale)
    return (inverse + inverse.T) / 2.0


def covariance_matrix(
    S: SensitivityLike, spec: Union[ResponseSpec, np.ndarray]
) -> np.ndarray:
    """Return (S^T C_M^-1 S)^-1; spec gives the per-variable sigma (or per-row sigma)."""
    return invert_fisher_information(fisher_information(S, spec))


def dof(N_mu: int, N_theta_active: int, N_y: int) -> float:
    """Degrees of freedom N_mu - N_theta / N_y."""
    if N_mu <= 0 or N_y <= 0 or N_theta_active < 0:
        raise DomainError(
            "counts", (N_mu, N_theta_active, N_y), "N_mu > 0, N_theta >= 0, N_y > 0"
        )
    value = N_mu - N_theta_active / N_y
    if not value > 0:
        raise DomainError("DOF", value, "degrees of freedom > 0")
    return value


def estimate_measurement_error(residuals: np.ndarray, dof_value: float) -> np.ndarray:
    """Per-variable s_y = sqrt(sum of squared residuals / DOF); residuals are (N_mu, N_y)."""
    if not dof_value > 0:
        raise DomainError("DOF", dof_value, "degrees of freedom > 0")
    errors = np.atleast_2d(np.asarray(residuals, dtype=float))
    return np.sqrt(np.sum(errors**2, axis=0) / dof_value)


def parameter_ci(
    theta_hat: Sequence[float] | np.ndarray, C: np.ndarray, dof_value: float, beta: float
) -> np.ndarray:
    """Half-widths sqrt(C_jj) * t(DOF, (1 + beta) / 2) for each estimated parameter."""
    if not 0.0 < beta < 1.0:
        raise DomainError("beta", beta, "a confidence level in (0, 1)")
    variances = np.diag(np.atleast_2d(C))
    if len(variances) != len(theta_hat):
        raise DomainError("C", variances.shape, f"{len(theta_hat)} diagonal entries")
    quantile = t_quantile(dof_value, (1.0 + beta) / 2.0)
    return np.sqrt(np.clip(variances, 0.0, None)) * quantile


def correlation_matrix(C: np.ndarray) -> np.ndarray:
    """R_ij = C_ij / sqrt(C_ii C_jj)."""
    std = np.sqrt(np.diag(C))
    with np.errstate(divide="ignore", invalid="ignore"):
        return C / np.outer(std, std)


def prediction_std(s: np.ndarray, C: np.ndarray) -> np.ndarray:
    """sqrt(diag(s C s^T)) for a single-experiment sensitivity s (N_y x N_theta)."""
    s = np.atleast_2d(s)
    variances = np.einsum("ij,jk,ik->i", s, np.atleast_2d(C), s)
    return np.sqrt(np.clip(variances, 0.0, None))


@dataclass(frozen=True)
class PredictionBand:
    y: np.ndarray
    sigma_y: np.ndarray
    half_width: np.ndarray


def prediction_band(
    u: Sequence[float],
    theta_hat: ParameterVector,
    C: np.ndarray,
    dof_value: float,
    beta: float,
    spec: ResponseSpec,
    model: ModelLike,
    mask: Sequence[bool],
) -> PredictionBand:
    """Prediction, its linearized std, and the beta band half-width at controls u."""
    if not 0.0 < beta < 1.0:
        raise DomainError("beta", beta, "a confidence level in (0, 1)")
    y, S = responses_and_sensitivities(np.atleast_2d(u), theta_hat, mask, spec, model)
    sigma_y = prediction_std(S.values, C) if S.values.shape[1] else np.zeros(spec.n_y)
    quantile = t_quantile(dof_value, (1.0 + beta) / 2.0)
    return PredictionBand(y=y[0], sigma_y=sigma_y, half_width=sigma_y * quantile)
