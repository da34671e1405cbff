"""
Monte Carlo harness for parameter estimation on a fixed measurement grid.

Replicate r draws its noise from RngStream(seed, r): generate the true
responses, perturb them, fit, optionally regularize and refit, then
evaluate prediction bands on the prediction grid.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import logging
from typing import Callable, Optional, TypeVar, Union

from codetiming import Timer
import numpy as np

from .metrics import McReport, ReplicateOutcome, compute_metrics
from .scenarios import Grids, ScenarioConfig
from estimation.regularization import identify
from estimation.responses import ParameterBounds
from estimation.sensitivity import responses_and_sensitivities, responses_over_design
from estimation.uncertainty import prediction_std
from estimation.wls import FitResult, MeasurementSet, evaluate_fixed, fit_wls
from nrtlstudy.exceptions import (
    FitNotConvergedError,
    NrtlStudyError,
    SingularMatrixError,
)
from nrtlstudy.stats import RngStream, sample_normal, t_quantile
from nrtlstudy.utils import histogram_if_enabled, incr_if_enabled

logger = logging.getLogger("eventsinfo.montecarlo")

_Result = TypeVar("_Result")


@dataclass(frozen=True)
class Analysis:
    """A fit on one data set, after optional regularization."""

    fit: FitResult
    identifiable_mask: tuple[bool, ...]
    outcome: ReplicateOutcome


@dataclass(frozen=True)
class ReplicateFailure:
    index: int
    error: NrtlStudyError


def simulate_measurements(
    stream: RngStream, y_true: np.ndarray, cfg: ScenarioConfig
) -> np.ndarray:
    """y_true plus Gaussian noise with the scenario's sigma, same shape as y_true."""
    n_rows = y_true.shape[0]
    std = 0.0 if cfg.noise_free else cfg.spec.row_sigma(n_rows)
    return sample_normal(stream, y_true.ravel(), std, y_true.size).reshape(y_true.shape)


def true_responses(cfg: ScenarioConfig, U: np.ndarray) -> np.ndarray:
    return responses_over_design(U, cfg.theta_true, cfg.spec, cfg.model)


def analyze(
    index: int,
    cfg: ScenarioConfig,
    data: MeasurementSet,
    theta0: np.ndarray,
    bounds: ParameterBounds,
    U_pred: np.ndarray,
    designs: Optional[np.ndarray] = None,
) -> Analysis:
    """
    Fit, regularize and evaluate prediction bands for one data set.

    With a regularization scenario the non-identifiable parameters are frozen
    at their estimates and the reduced problem is refit once. An empty
    identifiable set leaves every parameter fixed and the bands at zero width.
    """
    mask = cfg.mask
    fit = fit_wls(theta0, bounds, mask, data, cfg.model)
    if not fit.converged:
        raise FitNotConvergedError(fit.n_iter, fit.message)
    identifiable_mask = mask
    method = cfg.regularization.method
    if method is not None:
        Y, S = responses_and_sensitivities(
            data.U, fit.theta_hat, mask, data.spec, cfg.model
        )
        result = identify(
            method, S, fit.theta_hat, mask, data.spec, Y, cfg.thresholds
        )
        identifiable_mask = result.identifiable_mask(len(mask))
        if not result.identifiable:
            fit = evaluate_fixed(fit.theta_hat, bounds, data, cfg.model)
        elif identifiable_mask != mask:
            fit = fit_wls(fit.theta_hat, bounds, identifiable_mask, data, cfg.model)
            if not fit.converged:
                raise FitNotConvergedError(fit.n_iter, fit.message)

    if fit.C is None:
        raise SingularMatrixError(fit.condition_number)
    Y_pred, S_pred = responses_and_sensitivities(
        U_pred, fit.theta_hat, fit.ci_mask, data.spec, cfg.model
    )
    n_y = data.spec.n_y
    if S_pred.values.shape[1]:
        sigma_y = np.vstack(
            [
                prediction_std(S_pred.values[point * n_y : (point + 1) * n_y], fit.C)
                for point in range(U_pred.shape[0])
            ]
        )
    else:
        sigma_y = np.zeros_like(Y_pred)
    quantile = t_quantile(fit.dof, (1.0 + cfg.beta) / 2.0)
    outcome = ReplicateOutcome(
        index=index,
        theta_hat=fit.theta_hat,
        ci_half_width=fit.ci_half_widths(cfg.beta),
        predictions=Y_pred,
        sigma_y=sigma_y,
        band_half_width=sigma_y * quantile,
        s_y=fit.s_y,
        n_identifiable=sum(identifiable_mask),
        designs=np.zeros((0, U_pred.shape[1])) if designs is None else designs,
    )
    return Analysis(fit=fit, identifiable_mask=identifiable_mask, outcome=outcome)


def log_failure(cfg: ScenarioConfig, index: int, error: NrtlStudyError) -> None:
    incr_if_enabled("mc_replicate_failed", 1, tags=[f"scenario:{cfg.label}"])
    logger.info(
        "replicate failed",
        extra={**cfg.log_context(), "replicate": index, **error.error_context()},
    )


def run_replicate(
    cfg: ScenarioConfig,
    grids: Grids,
    index: int,
    y_true: Optional[np.ndarray] = None,
) -> Union[ReplicateOutcome, ReplicateFailure]:
    stream = RngStream(cfg.seed, index)
    if y_true is None:
        y_true = true_responses(cfg, grids.measurement)
    try:
        data = MeasurementSet(
            U=grids.measurement,
            Ym=simulate_measurements(stream, y_true, cfg),
            spec=cfg.spec,
        )
        analysis = analyze(
            index, cfg, data, cfg.start_theta, cfg.bounds, grids.prediction
        )
    except NrtlStudyError as error:
        log_failure(cfg, index, error)
        return ReplicateFailure(index, error)
    return analysis.outcome


def map_replicates(
    work: Callable[[int], _Result], n: int, threads: int = 1
) -> list[_Result]:
    """work(r) for r in range(n), in replicate order regardless of threads."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            return list(executor.map(work, range(n)))
    return [work(r) for r in range(n)]


def run_mc(
    cfg: ScenarioConfig,
    grids: Grids,
    threads: int = 1,
    failure_alarm: Optional[float] = None,
) -> McReport:
    """
    Run cfg.n_mc replicates and aggregate them into one report.

    failure_alarm is the failed fraction that sets the report alarm; None
    reads it from settings.
    """
    with Timer(logger=None) as scenario_timer:
        y_true = true_responses(cfg, grids.measurement)
        y_true_pred = true_responses(cfg, grids.prediction)
        results = map_replicates(
            lambda r: run_replicate(cfg, grids, r, y_true), cfg.n_mc, threads
        )
        outcomes = [item for item in results if isinstance(item, ReplicateOutcome)]
        report = compute_metrics(
            label=cfg.label,
            outcomes=outcomes,
            theta_true=cfg.theta_true,
            mask=cfg.mask,
            y_true=y_true_pred,
            parameter_names=cfg.model.parameter_names,
            variables=cfg.spec.variables,
            control_bounds=cfg.model.control_bounds,
            n_mc=cfg.n_mc,
            n_failed=cfg.n_mc - len(outcomes),
            designs=[],
            failure_alarm=failure_alarm,
        )
    histogram_if_enabled(
        "mc_scenario_seconds",
        round(scenario_timer.last, 3),
        tags=[f"regularization:{cfg.regularization.value}"],
    )
    logger.debug(
        "scenario done",
        extra={
            **report.log_context(),
            "timers": {"scenario_s": round(scenario_timer.last, 3)},
        },
    )
    return report

