"""Model responses and sensitivity matrices S = dY/dtheta over a design."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .responses import (
    ModelLike,
    ParameterVector,
    ResponseSpec,
    as_model,
    as_vector,
    check_variables,
)
from nrtlstudy.exceptions import (
    DomainError,
    ModelEvaluationError,
    NrtlStudyError,
    NumericalError,
)

Mask = tuple[bool, ...]


class Scaling(str, Enum):
    NOISE_SCALED = "NoiseScaled"
    YAO_SCALED = "YaoScaled"


@dataclass(frozen=True)
class SensitivityMatrix:
    """
    Sensitivities of an experiment-major response vector.

    Row r is experiment r // n_y, variable r % n_y. Columns follow the
    active parameters in canonical order.
    """

    values: np.ndarray
    columns: tuple[str, ...]
    variables: tuple[str, ...]

    @property
    def n_experiments(self) -> int:
        return self.values.shape[0] // len(self.variables)

    def row_label(self, row: int) -> str:
        n_y = len(self.variables)
        return f"experiment {row // n_y} {self.variables[row % n_y]}"


def active_indices(mask: Sequence[bool]) -> list[int]:
    return [index for index, active in enumerate(mask) if active]


def response_eval(
    u: Sequence[float], theta: ParameterVector, spec: ResponseSpec, model: ModelLike
) -> np.ndarray:
    """Return the selected responses of one experiment, in spec order."""
    response_model = as_model(model)
    check_variables(response_model, spec)
    return response_model.responses(u, as_vector(theta), spec)


def responses_over_design(
    U: np.ndarray, theta: ParameterVector, spec: ResponseSpec, model: ModelLike
) -> np.ndarray:
    """Responses for every design row, shape (N_mu, N_y)."""
    response_model = as_model(model)
    check_variables(response_model, spec)
    vector = as_vector(theta)
    rows = []
    for index, u in enumerate(np.atleast_2d(U)):
        try:
            rows.append(response_model.responses(u, vector, spec))
        except NrtlStudyError as e:
            raise ModelEvaluationError(index, e)
    return np.vstack(rows) if rows else np.zeros((0, spec.n_y))


def sensitivity_matrix(
    U: np.ndarray,
    theta: ParameterVector,
    mask: Sequence[bool],
    spec: ResponseSpec,
    model: ModelLike,
) -> SensitivityMatrix:
    """Return S with one column per active parameter."""
    _, S = responses_and_sensitivities(U, theta, mask, spec, model)
    return S


def responses_and_sensitivities(
    U: np.ndarray,
    theta: ParameterVector,
    mask: Sequence[bool],
    spec: ResponseSpec,
    model: ModelLike,
) -> tuple[np.ndarray, SensitivityMatrix]:
    """Return responses (N_mu, N_y) and S from one pass over the design."""
    response_model = as_model(model)
    check_variables(response_model, spec)
    if len(mask) != len(response_model.parameter_names):
        raise DomainError("mask", mask, f"{len(response_model.parameter_names)} flags")
    vector = as_vector(theta)
    columns = active_indices(mask)
    names = tuple(response_model.parameter_names[j] for j in columns)
    y_rows = []
    blocks = []
    for index, u in enumerate(np.atleast_2d(U)):
        try:
            y, jacobian = response_model.responses_and_jacobian(u, vector, spec)
        except NrtlStudyError as e:
            raise ModelEvaluationError(index, e)
        y_rows.append(y)
        blocks.append(jacobian[:, columns])
    n_y = spec.n_y
    values = np.vstack(blocks) if blocks else np.zeros((0, len(columns)))
    bad = np.argwhere(~np.isfinite(values))
    if bad.size:
        row, column = bad[0]
        raise NumericalError(int(row), names[column], float(values[row, column]))
    y_matrix = np.vstack(y_rows) if y_rows else np.zeros((0, n_y))
    return y_matrix, SensitivityMatrix(values, names, spec.variables)


def scale_sensitivity(
    S: SensitivityMatrix,
    theta_active: Sequence[float],
    scaling: Scaling,
    divisors: Sequence[float] | np.ndarray,
) -> SensitivityMatrix:
    """
    Scale S by the parameter values and a per-row divisor.

    NoiseScaled: divisors are the per-variable noise std, applied to each
    observation row of that variable (or a full per-row array).
    YaoScaled: divisors are the predicted responses, one per row (or an
    (N_mu, N_y) matrix).
    """
    values = S.values
    n_rows = values.shape[0]
    theta_values = np.asarray(theta_active, dtype=float)
    if theta_values.shape != (values.shape[1],):
        raise DomainError("theta", theta_active, f"{values.shape[1]} active values")
    row_divisor = np.asarray(divisors, dtype=float).ravel()
    if scaling == Scaling.NOISE_SCALED and row_divisor.size == len(S.variables):
        row_divisor = np.tile(row_divisor, S.n_experiments)
    if row_divisor.size != n_rows:
        raise DomainError("divisors", row_divisor.size, f"{n_rows} row divisors")
    if np.any(row_divisor == 0.0):
        raise DomainError("divisors", "zero", "nonzero row divisors")
    scaled = values * theta_values[np.newaxis, :] / row_divisor[:, np.newaxis]
    return SensitivityMatrix(scaled, S.columns, S.variables)

