"""
Scenario catalogs and the default design grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
import itertools
from typing import Iterable, Optional, Sequence

import numpy as np

from estimation.regularization import RegularizationMethod, RegularizationThresholds
from estimation.responses import ParameterBounds, ResponseModel, ResponseSpec
from nrtlstudy.exceptions import DomainError

PERTURBATION_FACTORS = {"low": 0.8, "high": 1.2}
ALPHA_FIXES = {"alpha_low": 0.1, "alpha_high": 0.6}
SOED_ALPHA_BOUNDS = (0.1, 0.6)
GRID_POINTS = 20


class ScenarioKind(str, Enum):
    ALL = "all"
    FIX_TRUE = "fix_true"
    FIX_PERTURBED = "fix_perturbed"
    FIX_VALUE = "fix_value"


@dataclass(frozen=True)
class ParameterScenario:
    """Which parameter (if any) is fixed, and to what."""

    label: str
    kind: ScenarioKind = ScenarioKind.ALL
    index: Optional[int] = None
    value: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind != ScenarioKind.ALL and self.index is None:
            raise DomainError("index", None, f"a parameter index for {self.label}")
        if self.kind == ScenarioKind.FIX_PERTURBED and self.value not in (0.8, 1.2):
            raise DomainError("factor", self.value, "a perturbation factor of 0.8 or 1.2")
        if self.kind == ScenarioKind.FIX_VALUE and self.value is None:
            raise DomainError("value", None, f"a fixed value for {self.label}")

    def mask(self, n: int) -> tuple[bool, ...]:
        return tuple(j != self.index for j in range(n))

    def start_theta(self, theta_true: Sequence[float]) -> np.ndarray:
        """theta_true with the fixed parameter set to its scenario value."""
        theta = np.asarray(theta_true, dtype=float).copy()
        if self.kind == ScenarioKind.FIX_PERTURBED:
            theta[self.index] *= self.value
        elif self.kind == ScenarioKind.FIX_VALUE:
            theta[self.index] = self.value
        return theta


def parameter_scenarios(
    theta_true: Sequence[float], names: Sequence[str]
) -> list[ParameterScenario]:
    """
    The parameter scenario catalog for a true parameter vector.

    All; each parameter fixed to its true value; each non-alpha parameter
    fixed to 0.8x and 1.2x its true value (skipped when the true value is 0);
    alpha fixed to 0.1 and 0.6 when the model has an alpha (skipped when that
    is the true value).
    """
    theta = list(theta_true)
    if len(theta) != len(names):
        raise DomainError("theta_true", theta, f"{len(names)} values")
    scenarios = [ParameterScenario("All")]
    scenarios += [
        ParameterScenario(f"{name}*", ScenarioKind.FIX_TRUE, j)
        for j, name in enumerate(names)
    ]
    for j, name in enumerate(names):
        if name == "alpha" or theta[j] == 0.0:
            continue
        for suffix, factor in PERTURBATION_FACTORS.items():
            scenarios.append(
                ParameterScenario(f"{name}_{suffix}", ScenarioKind.FIX_PERTURBED, j, factor)
            )
    if "alpha" in names:
        j = list(names).index("alpha")
        for label, value in ALPHA_FIXES.items():
            if value != theta[j]:
                scenarios.append(ParameterScenario(label, ScenarioKind.FIX_VALUE, j, value))
    return scenarios


def custom_fix(label: str, names: Sequence[str]) -> ParameterScenario:
    """Parse 'name=value' into a fixed-value scenario."""
    name, sep, raw_value = label.partition("=")
    if not sep or name not in names:
        raise DomainError("parameter scenario", label, f"name=value with name in {tuple(names)}")
    try:
        value = float(raw_value)
    except ValueError:
        raise DomainError("parameter scenario", label, "a numeric fixed value")
    return ParameterScenario(label, ScenarioKind.FIX_VALUE, list(names).index(name), value)


class RegularizationScenario(str, Enum):
    NONE = "None"
    E = "E"
    GO = "GO"
    SVD = "SVD"
    FS = "FS"
    GO_OED = "GO-OED"

    @property
    def method(self) -> Optional[RegularizationMethod]:
        if self == RegularizationScenario.NONE:
            return None
        if self == RegularizationScenario.GO_OED:
            return RegularizationMethod.GO
        return RegularizationMethod(self.value)


@dataclass(frozen=True)
class Grids:
    """Measurement grid, prediction grid and the initial design of the sequential loop."""

    measurement: np.ndarray
    prediction: np.ndarray
    initial: np.ndarray = field(default_factory=lambda: soed_initial_design())


@dataclass(frozen=True)
class ScenarioConfig:
    label: str
    mixture_label: str
    model: ResponseModel
    theta_true: tuple[float, ...]
    spec: ResponseSpec
    parameter_scenario: ParameterScenario
    regularization: RegularizationScenario
    n_mc: int
    seed: int
    bounds: ParameterBounds
    thresholds: RegularizationThresholds = RegularizationThresholds()
    beta: float = 0.95
    noise_free: bool = False

    def __post_init__(self) -> None:
        if self.n_mc < 1:
            raise DomainError("n_mc", self.n_mc, "an integer >= 1")
        if len(self.theta_true) != len(self.model.parameter_names):
            raise DomainError(
                "theta_true", self.theta_true, f"{len(self.model.parameter_names)} values"
            )

    @property
    def mask(self) -> tuple[bool, ...]:
        return self.parameter_scenario.mask(len(self.theta_true))

    @property
    def start_theta(self) -> np.ndarray:
        return self.parameter_scenario.start_theta(self.theta_true)

    def soed_bounds(self) -> ParameterBounds:
        """PE bounds with alpha clamped to [0.1, 0.6]."""
        names = list(self.model.parameter_names)
        if "alpha" not in names:
            return self.bounds
        return self.bounds.clamped(names.index("alpha"), *SOED_ALPHA_BOUNDS)

    def log_context(self) -> dict[str, object]:
        return {
            "scenario": self.label,
            "n_mc": self.n_mc,
            "seed": self.seed,
        }


def scenario_label(
    mixture_label: str,
    spec: ResponseSpec,
    parameter_scenario: ParameterScenario,
    regularization: RegularizationScenario,
) -> str:
    return "/".join(
        (mixture_label, spec.label, parameter_scenario.label, regularization.value)
    )


def scenario_matrix(
    model: ResponseModel,
    mixture_label: str,
    theta_true: Sequence[float],
    specs: Iterable[ResponseSpec],
    parameter_scenario_list: Iterable[ParameterScenario],
    regularizations: Iterable[RegularizationScenario],
    n_mc: int,
    seed: int,
    bounds: ParameterBounds,
    thresholds: RegularizationThresholds = RegularizationThresholds(),
    beta: float = 0.95,
    noise_free: bool = False,
) -> list[ScenarioConfig]:
    """Measurement x parameter x regularization scenarios for one mixture, in that order."""
    configs = []
    for spec, parameter_scenario, regularization in itertools.product(
        list(specs), list(parameter_scenario_list), list(regularizations)
    ):
        configs.append(
            ScenarioConfig(
                label=scenario_label(mixture_label, spec, parameter_scenario, regularization),
                mixture_label=mixture_label,
                model=model,
                theta_true=tuple(float(value) for value in theta_true),
                spec=spec,
                parameter_scenario=parameter_scenario,
                regularization=regularization,
                n_mc=n_mc,
                seed=seed,
                bounds=bounds,
                thresholds=thresholds,
                beta=beta,
                noise_free=noise_free,
            )
        )
    return configs


def linspace_grid(
    x_bounds: tuple[float, float], pressures: Sequence[float], n: int = GRID_POINTS
) -> np.ndarray:
    """n compositions per pressure, pressure-major rows of (x1L, P)."""
    compositions = np.linspace(x_bounds[0], x_bounds[1], n)
    return np.array([(x1L, P) for P in pressures for x1L in compositions])


def case_study_one_grid() -> np.ndarray:
    return linspace_grid((0.01, 0.99), (0.5e5, 1.5e5))


def prediction_grid() -> np.ndarray:
    return linspace_grid((0.01, 0.99), (1.0e5,))


def soed_initial_design() -> np.ndarray:
    return np.array(
        [
            [0.05, 0.5e5],
            [0.95, 0.5e5],
            [0.05, 1.5e5],
            [0.95, 1.5e5],
            [0.5, 1.0e5],
            [0.65, 1.0e5],
        ]
    )


def default_grids() -> Grids:
    return Grids(
        measurement=case_study_one_grid(),
        prediction=prediction_grid(),
        initial=soed_initial_design(),
    )
