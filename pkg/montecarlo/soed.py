"""
Sequential design loop under Monte Carlo replication.

Per replicate: fit on the accumulated data, record the metrics inputs, ask
the OED for the next experiment, measure it with fresh noise, repeat.
Iteration k's report covers every replicate that finished all iterations.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Optional, Union

from codetiming import Timer
import numpy as np

from .harness import (
    ReplicateFailure,
    analyze,
    log_failure,
    map_replicates,
    simulate_measurements,
    true_responses,
)
from .metrics import McReport, ReplicateOutcome, compute_metrics
from .scenarios import Grids, RegularizationScenario, ScenarioConfig
from estimation.oed import N_STARTS, Criterion, design_next
from estimation.wls import MeasurementSet
from nrtlstudy.exceptions import NrtlStudyError
from nrtlstudy.stats import RngStream
from nrtlstudy.utils import incr_if_enabled

logger = logging.getLogger("eventsinfo.montecarlo")

N_ITERATIONS = 15


@dataclass(frozen=True)
class SoedTrajectory:
    index: int
    outcomes: tuple[ReplicateOutcome, ...]
    designs: np.ndarray


def run_soed_replicate(
    cfg: ScenarioConfig,
    grids: Grids,
    index: int,
    n_iterations: int,
    criterion: Criterion,
    n_starts: int = N_STARTS,
) -> Union[SoedTrajectory, ReplicateFailure]:
    """One replicate of the loop; any failure discards the whole trajectory."""
    stream = RngStream(cfg.seed, index)
    bounds = cfg.soed_bounds()
    theta = bounds.clip(cfg.start_theta)
    mask = cfg.mask
    n_controls = len(cfg.model.control_names)
    new_designs = np.zeros((0, n_controls))
    outcomes = []
    try:
        U = np.atleast_2d(grids.initial)
        data = MeasurementSet(
            U=U, Ym=simulate_measurements(stream, true_responses(cfg, U), cfg), spec=cfg.spec
        )
        for k in range(n_iterations + 1):
            analysis = analyze(
                index, cfg, data, theta, bounds, grids.prediction, new_designs
            )
            outcomes.append(analysis.outcome)
            if k == n_iterations:
                break
            theta = analysis.fit.theta_hat
            oed_mask = mask
            if cfg.regularization == RegularizationScenario.GO_OED and any(
                analysis.identifiable_mask
            ):
                oed_mask = analysis.identifiable_mask
            candidate = design_next(
                data.U,
                theta,
                oed_mask,
                cfg.spec,
                cfg.model,
                criterion=criterion,
                n_starts=n_starts,
            )
            Y_new = simulate_measurements(
                stream, true_responses(cfg, candidate.u_new), cfg
            )
            data = data.with_experiments(candidate.u_new, Y_new)
            new_designs = np.vstack([new_designs, candidate.u_new])
            incr_if_enabled("soed_iteration", 1)
    except NrtlStudyError as error:
        log_failure(cfg, index, error)
        return ReplicateFailure(index, error)
    return SoedTrajectory(index=index, outcomes=tuple(outcomes), designs=new_designs)


def run_soed_pe(
    cfg: ScenarioConfig,
    grids: Grids,
    n_iterations: int = N_ITERATIONS,
    criterion: Criterion = Criterion.A,
    threads: int = 1,
    n_starts: int = N_STARTS,
    failure_alarm: Optional[float] = None,
) -> list[McReport]:
    """One report per iteration k = 0 .. n_iterations (k = 0 is the initial design)."""
    with Timer(logger=None) as scenario_timer:
        results = map_replicates(
            lambda r: run_soed_replicate(
                cfg, grids, r, n_iterations, Criterion(criterion), n_starts
            ),
            cfg.n_mc,
            threads,
        )
        trajectories = [item for item in results if isinstance(item, SoedTrajectory)]
        y_true_pred = true_responses(cfg, grids.prediction)
        reports = []
        for k in range(n_iterations + 1):
            reports.append(
                compute_metrics(
                    label=cfg.label,
                    outcomes=[trajectory.outcomes[k] for trajectory in trajectories],
                    theta_true=cfg.theta_true,
                    mask=cfg.mask,
                    y_true=y_true_pred,
                    parameter_names=cfg.model.parameter_names,
                    variables=cfg.spec.variables,
                    control_bounds=cfg.model.control_bounds,
                    n_mc=cfg.n_mc,
                    n_failed=cfg.n_mc - len(trajectories),
                    iteration=k,
                    designs=[trajectory.designs[:k] for trajectory in trajectories],
                    failure_alarm=failure_alarm,
                )
            )
    logger.debug(
        "soed scenario done",
        extra={
            **cfg.log_context(),
            "n_iterations": n_iterations,
            "n_success": len(trajectories),
            "timers": {"scenario_s": round(scenario_timer.last, 3)},
        },
    )
    return reports
