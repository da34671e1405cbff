"""
Monte Carlo metrics.

Aggregation always runs over replicates in replicate-index order with
math.fsum, so a report does not depend on the order workers finished in.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
import math
from typing import Any, Iterable, Optional, Sequence

from django.conf import settings

import numpy as np

from estimation.responses import VARIABLE_UNITS
from nrtlstudy.stats import centered_discrepancy, shapiro_wilk_w

MIN_NORMALITY_SAMPLE = 3
LABEL_PARTS = {"mixture": 0, "measurement": 1, "theta": 2, "reg": 3}


@dataclass(frozen=True)
class ReplicateOutcome:
    """What one successful replicate contributes to the metrics."""

    index: int
    theta_hat: np.ndarray
    ci_half_width: np.ndarray
    predictions: np.ndarray
    sigma_y: np.ndarray
    band_half_width: np.ndarray
    s_y: np.ndarray
    n_identifiable: int
    designs: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))


@dataclass(frozen=True)
class McReport:
    label: str
    iteration: int
    n_mc: int
    n_success: int
    n_failed: int
    W_bar: float
    Q95_theta: float
    Q95_y: float
    Q95_y_std: float
    s_bar: dict[str, float]
    sigma_bar_y: dict[str, float]
    sigma_real_y: dict[str, float]
    bias_theta: dict[str, float]
    D_U: float
    n_identifiable_mean: float
    n_identifiable_std: float
    failure_alarm: bool

    def as_row(self) -> dict[str, Any]:
        """One CSV row; every numeric column name carries its unit suffix."""
        row: dict[str, Any] = {
            "scenario": self.label,
            "iteration_count": self.iteration,
            "n_mc_count": self.n_mc,
            "n_success_count": self.n_success,
            "n_failed_count": self.n_failed,
            "W_bar_dimless": self.W_bar,
            "Q95_theta_dimless": self.Q95_theta,
            "Q95_y_dimless": self.Q95_y,
            "Q95_y_std_dimless": self.Q95_y_std,
        }
        for prefix, values in (
            ("s_bar", self.s_bar),
            ("sigma_bar_y", self.sigma_bar_y),
            ("sigma_real_y", self.sigma_real_y),
        ):
            for variable, value in values.items():
                row[f"{prefix}_{variable}_{VARIABLE_UNITS.get(variable, 'dimless')}"] = value
        for name, value in self.bias_theta.items():
            row[f"bias_{name}_dimless"] = value
        row["D_U_dimless"] = self.D_U
        row["n_identifiable_mean_count"] = self.n_identifiable_mean
        row["n_identifiable_std_count"] = self.n_identifiable_std
        row["failure_alarm_flag"] = int(self.failure_alarm)
        return row

    def log_context(self) -> dict[str, Any]:
        return {
            "scenario": self.label,
            "iteration": self.iteration,
            "n_success": self.n_success,
            "n_failed": self.n_failed,
            "Q95_y": self.Q95_y,
        }


def _mean(values: Iterable[float]) -> float:
    items = [float(value) for value in values]
    return math.fsum(items) / len(items) if items else math.nan


def _std(values: Iterable[float]) -> float:
    """Sample standard deviation; 0 for a single value, NaN for none."""
    items = [float(value) for value in values]
    if not items:
        return math.nan
    if len(items) == 1:
        return 0.0
    mean = math.fsum(items) / len(items)
    return math.sqrt(math.fsum((item - mean) ** 2 for item in items) / (len(items) - 1))


def design_discrepancy(
    designs: Sequence[np.ndarray], control_bounds: Sequence[tuple[float, float]]
) -> float:
    """CD2 of the pooled designs normalized to the control box; NaN if there are none."""
    blocks = [np.atleast_2d(block) for block in designs if np.size(block)]
    if not blocks:
        return math.nan
    pooled = np.vstack(blocks)
    bounds = np.asarray(control_bounds, dtype=float)
    unit = (pooled - bounds[:, 0]) / (bounds[:, 1] - bounds[:, 0])
    return centered_discrepancy(np.clip(unit, 0.0, 1.0))


def compute_metrics(
    label: str,
    outcomes: Sequence[ReplicateOutcome],
    theta_true: Sequence[float],
    mask: Sequence[bool],
    y_true: np.ndarray,
    parameter_names: Sequence[str],
    variables: Sequence[str],
    control_bounds: Sequence[tuple[float, float]],
    n_mc: int,
    n_failed: int,
    iteration: int = 0,
    designs: Optional[Sequence[np.ndarray]] = None,
    failure_alarm: Optional[float] = None,
) -> McReport:
    """
    Aggregate successful replicates into an McReport.

    Q95_theta averages the indicators theta_true_j in CI_j over replicates and
    estimated parameters that have a confidence interval. Q95_y averages the
    band indicators over replicates, prediction points and variables.
    """
    outcomes = sorted(outcomes, key=lambda outcome: outcome.index)
    theta_star = np.asarray(theta_true, dtype=float)
    active = [j for j, flag in enumerate(mask) if flag]
    alarm = settings.NRTL_STUDY_FAILURE_ALARM if failure_alarm is None else failure_alarm

    normality = []
    for j in active:
        column = [outcome.theta_hat[j] for outcome in outcomes]
        if len(column) >= MIN_NORMALITY_SAMPLE:
            normality.append(shapiro_wilk_w(column))

    theta_hits = [
        float(abs(outcome.theta_hat[j] - theta_star[j]) <= outcome.ci_half_width[j])
        for outcome in outcomes
        for j in active
        if np.isfinite(outcome.ci_half_width[j])
    ]

    y_true = np.asarray(y_true, dtype=float)
    coverage_per_replicate = []
    y_hits: list[float] = []
    for outcome in outcomes:
        hits = (np.abs(outcome.predictions - y_true) <= outcome.band_half_width).ravel()
        y_hits.extend(hits.astype(float))
        coverage_per_replicate.append(_mean(hits.astype(float)))

    s_bar, sigma_bar_y, sigma_real_y = {}, {}, {}
    for k, variable in enumerate(variables):
        s_bar[variable] = _mean(outcome.s_y[k] for outcome in outcomes)
        sigma_bar_y[variable] = _mean(
            value for outcome in outcomes for value in outcome.sigma_y[:, k]
        )
        if len(outcomes) >= 2:
            spread = [
                _std(outcome.predictions[point, k] for outcome in outcomes)
                for point in range(y_true.shape[0])
            ]
            sigma_real_y[variable] = _mean(spread)
        else:
            sigma_real_y[variable] = math.nan

    bias_theta = {}
    for j in active:
        scale = abs(theta_star[j]) if theta_star[j] != 0.0 else 1.0
        bias_theta[parameter_names[j]] = _mean(
            (outcome.theta_hat[j] - theta_star[j]) / scale for outcome in outcomes
        )

    if designs is None:
        designs = [outcome.designs for outcome in outcomes]
    counts = [outcome.n_identifiable for outcome in outcomes]
    return McReport(
        label=label,
        iteration=iteration,
        n_mc=n_mc,
        n_success=len(outcomes),
        n_failed=n_failed,
        W_bar=_mean(normality),
        Q95_theta=_mean(theta_hits),
        Q95_y=_mean(y_hits),
        Q95_y_std=_std(coverage_per_replicate),
        s_bar=s_bar,
        sigma_bar_y=sigma_bar_y,
        sigma_real_y=sigma_real_y,
        bias_theta=bias_theta,
        D_U=design_discrepancy(designs, control_bounds),
        n_identifiable_mean=_mean(counts),
        n_identifiable_std=_std(counts),
        failure_alarm=n_failed > alarm * n_mc,
    )


def summarize_reports(reports: Sequence[McReport], group_by: str) -> list[dict[str, Any]]:
    """
    Mean and std of W_bar, Q95_theta, Q95_y and N_identifiable per group.

    group_by is one of mixture, measurement, theta, reg; groups come from the
    scenario label parts and are emitted in first-seen order. NaN metrics
    are left out of a group's statistics.
    """
    part = LABEL_PARTS[group_by]
    groups: dict[str, list[McReport]] = defaultdict(list)
    for report in reports:
        groups[report.label.split("/")[part]].append(report)
    rows = []
    for group, members in groups.items():
        row: dict[str, Any] = {group_by: group, "n_scenarios_count": len(members)}
        for attribute, name, unit in (
            ("W_bar", "W_bar", "dimless"),
            ("Q95_theta", "Q95_theta", "dimless"),
            ("Q95_y", "Q95_y", "dimless"),
            ("n_identifiable_mean", "n_identifiable", "count"),
        ):
            values = [
                getattr(report, attribute)
                for report in members
                if math.isfinite(getattr(report, attribute))
            ]
            row[f"{name}_mean_{unit}"] = _mean(values)
            row[f"{name}_std_{unit}"] = _std(values)
        rows.append(row)
    return rows
