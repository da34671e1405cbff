"""
Optimal experimental design: A/D/E criteria and a multistart search for
the next experiment(s).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .responses import ModelLike, ParameterVector, ResponseSpec, as_model, as_vector
from .sensitivity import SensitivityMatrix, active_indices, responses_and_sensitivities
from .uncertainty import fisher_information, invert_fisher_information
from nrtlstudy.exceptions import DesignError, DomainError, NrtlStudyError

logger = logging.getLogger("eventsinfo.estimation")

N_STARTS = 21
PENALTY = 1e6
FD_STEP = 1e-6
MAX_ITER = 200


class Criterion(str, Enum):
    A = "A"
    D = "D"
    E = "E"


@dataclass(frozen=True)
class DesignCandidate:
    u_new: np.ndarray
    criterion: Criterion
    value: float
    start_index: int


def _criterion_from_fim(fim: np.ndarray, criterion: Criterion) -> float:
    try:
        C = invert_fisher_information(fim)
    except NrtlStudyError:
        return math.inf
    if criterion == Criterion.A:
        value = float(np.trace(C))
    elif criterion == Criterion.D:
        value = float(np.linalg.det(C))
    else:
        value = float(np.linalg.eigvalsh(C)[-1])
    return value if np.isfinite(value) else math.inf


def criterion_value(
    S_total: SensitivityMatrix | np.ndarray, spec: ResponseSpec, criterion: Criterion
) -> float:
    """
    trace, det or largest eigenvalue of C = (S^T C_M^-1 S)^-1.

    A singular FIM gives +inf, which ranks worst.
    """
    return _criterion_from_fim(fisher_information(S_total, spec), Criterion(criterion))


def seed_lattice(
    bounds: Sequence[tuple[float, float]], n_starts: int = N_STARTS
) -> np.ndarray:
    """
    Uniform seed points, inclusive of the bounds.

    Two controls (x1L, P) use 3 pressure levels by n_starts / 3 compositions
    when n_starts is divisible by 3, pressure-major. One control uses a
    linspace.
    """
    if n_starts < 1:
        raise DomainError("n_starts", n_starts, "at least one start")
    if len(bounds) == 1:
        (low, high), = bounds
        return np.linspace(low, high, n_starts)[:, np.newaxis]
    if len(bounds) != 2:
        raise DomainError("bounds", bounds, "one or two controls")
    (x_low, x_high), (p_low, p_high) = bounds
    n_levels = 3 if n_starts % 3 == 0 else 1
    pressures = (
        np.linspace(p_low, p_high, n_levels) if n_levels > 1 else [(p_low + p_high) / 2]
    )
    compositions = np.linspace(x_low, x_high, n_starts // n_levels)
    return np.array([(x1L, P) for P in pressures for x1L in compositions])


class _DesignObjective:
    """log(criterion) of U_exp plus U_new, in unit-box coordinates."""

    def __init__(self, fim_exp, theta, mask, spec, model, criterion, n_new):
        self.fim_exp = fim_exp
        self.theta = theta
        self.mask = mask
        self.spec = spec
        self.model = model
        self.criterion = criterion
        self.n_new = n_new
        bounds = np.asarray(model.control_bounds, dtype=float)
        self.low = bounds[:, 0]
        self.span = bounds[:, 1] - bounds[:, 0]

    def to_controls(self, z: np.ndarray) -> np.ndarray:
        rows = np.clip(z, 0.0, 1.0).reshape(self.n_new, len(self.low))
        return self.low + rows * self.span

    def to_unit(self, U: np.ndarray) -> np.ndarray:
        return ((np.atleast_2d(U) - self.low) / self.span).ravel()

    def value(self, U_new: np.ndarray) -> float:
        try:
            _, S_new = responses_and_sensitivities(
                U_new, self.theta, self.mask, self.spec, self.model
            )
        except NrtlStudyError:
            return math.inf
        fim = self.fim_exp + fisher_information(S_new, self.spec)
        return _criterion_from_fim(fim, self.criterion)

    def __call__(self, z: np.ndarray) -> float:
        value = self.value(self.to_controls(z))
        if not (np.isfinite(value) and value > 0):
            return PENALTY
        return math.log(value)


def _run_start(
    objective: _DesignObjective, start_index: int, z0: np.ndarray
) -> tuple[int, Optional[np.ndarray], float, str]:
    try:
        solution = minimize(
            objective,
            z0,
            method="L-BFGS-B",
            bounds=[(0.0, 1.0)] * len(z0),
            options={"eps": FD_STEP, "maxiter": MAX_ITER},
        )
    except (ValueError, np.linalg.LinAlgError) as e:
        return start_index, None, math.inf, repr(e)
    U_new = objective.to_controls(solution.x)
    value = objective.value(U_new)
    seed_value = objective.value(objective.to_controls(z0))
    if seed_value < value:
        U_new, value = objective.to_controls(z0), seed_value
    return start_index, U_new, value, str(solution.message)


def design_next(
    U_exp: np.ndarray,
    theta_hat: ParameterVector,
    mask: Sequence[bool],
    spec: ResponseSpec,
    model: ModelLike,
    criterion: Criterion = Criterion.A,
    n_new: int = 1,
    n_starts: int = N_STARTS,
    threads: int = 1,
) -> DesignCandidate:
    """
    Best n_new experiments to add to U_exp under the criterion.

    Every lattice seed starts a bounded quasi-Newton run; start s uses
    lattice points s .. s + n_new - 1 (cyclic). Duplicates of existing
    experiments are also scored, with start indices n_starts + i. The lowest
    (value, start_index) wins.
    """
    response_model = as_model(model)
    U_exp = np.atleast_2d(np.asarray(U_exp, dtype=float))
    if U_exp.shape[0] == 0:
        raise DomainError("U_exp", U_exp.shape, "at least one experiment")
    if not active_indices(mask):
        raise DomainError("mask", tuple(mask), "at least one active parameter")
    if n_new < 1:
        raise DomainError("n_new", n_new, "an integer >= 1")
    criterion = Criterion(criterion)
    theta = as_vector(theta_hat)
    _, S_exp = responses_and_sensitivities(U_exp, theta, mask, spec, response_model)
    objective = _DesignObjective(
        fisher_information(S_exp, spec), theta, mask, spec, response_model, criterion, n_new
    )

    lattice = seed_lattice(response_model.control_bounds, n_starts)
    starts = [
        objective.to_unit(lattice[[(s + k) % n_starts for k in range(n_new)]])
        for s in range(n_starts)
    ]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(
                executor.map(lambda pair: _run_start(objective, *pair), enumerate(starts))
            )
    else:
        results = [_run_start(objective, s, z0) for s, z0 in enumerate(starts)]

    candidates = [
        (value, index, U_new)
        for index, U_new, value, _ in results
        if U_new is not None and np.isfinite(value)
    ]
    if not candidates:
        raise DesignError(
            [f"start {index}: {message}" for index, _, _, message in results]
        )
    for i, row in enumerate(U_exp):
        duplicate = np.repeat(row[np.newaxis, :], n_new, axis=0)
        value = objective.value(duplicate)
        if np.isfinite(value):
            candidates.append((value, n_starts + i, duplicate))

    value, index, U_new = min(candidates, key=lambda item: (item[0], item[1]))
    logger.debug(
        "design_next",
        extra={"criterion": criterion.value, "value": value, "start_index": index},
    )
    return DesignCandidate(
        u_new=U_new, criterion=criterion, value=float(value), start_index=index
    )
