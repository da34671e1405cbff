"""
Load and validate a JSON run configuration.

The schema is documented in docs/run-config.md. Every validation failure
raises ConfigError with the JSON path of the offending value, like
"$.mixtures[0].nrtl.alpha".
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
import itertools
import json
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .exceptions import ConfigError, NrtlStudyError
from estimation.oed import N_STARTS, Criterion
from estimation.regularization import RegularizationThresholds
from estimation.responses import (
    MEASUREMENT_SCENARIOS,
    VARIABLE_UNITS,
    LinearSurrogate,
    NrtlVleModel,
    ParameterBounds,
    ResponseModel,
    ResponseSpec,
    check_variables,
)
from estimation.wls import MeasurementSet
from montecarlo.scenarios import (
    Grids,
    ParameterScenario,
    RegularizationScenario,
    ScenarioConfig,
    custom_fix,
    default_grids,
    parameter_scenarios,
    scenario_matrix,
)
from montecarlo.soed import N_ITERATIONS
from thermo.fixtures import FIXTURE_MIXTURES
from thermo.types import AzeotropeType, Mixture, NrtlParams, PureComponent

CASE_STUDY_ONE = "case-study-1"
SHAPIRO_WILK_LIMIT = 5000


@dataclass(frozen=True)
class ModelEntry:
    """A response model with its true parameters and estimation bounds."""

    label: str
    model: ResponseModel
    theta_true: tuple[float, ...]
    bounds: ParameterBounds
    grids: Optional[Grids] = None
    mixture: Optional[Mixture] = None


@dataclass(frozen=True)
class VleSection:
    mixtures: tuple[str, ...]
    grid: np.ndarray


@dataclass(frozen=True)
class FitSection:
    model: str
    dataset: Path
    spec: ResponseSpec
    theta0: Optional[tuple[float, ...]]
    fixed: tuple[str, ...]
    beta: float


@dataclass(frozen=True)
class OedSection:
    model: str
    design: np.ndarray
    spec: ResponseSpec
    theta: Optional[tuple[float, ...]]
    fixed: tuple[str, ...]
    criterion: Criterion
    n_new: int
    n_starts: int


@dataclass(frozen=True)
class SoedSection:
    n_iterations: int = N_ITERATIONS
    criterion: Criterion = Criterion.A
    n_starts: int = N_STARTS


@dataclass(frozen=True)
class RunConfig:
    path: Path
    models: dict[str, ModelEntry]
    measurement_scenarios: tuple[ResponseSpec, ...]
    parameter_scenarios: tuple[str, ...]
    regularization_scenarios: tuple[RegularizationScenario, ...]
    thresholds: RegularizationThresholds
    n_mc: int
    seed: int
    beta: float
    noise_free: bool
    vle: Optional[VleSection] = None
    fit: Optional[FitSection] = None
    oed: Optional[OedSection] = None
    soed: SoedSection = field(default_factory=SoedSection)

    def grids_for(self, model_label: str) -> Grids:
        entry = self.models[model_label]
        return entry.grids if entry.grids is not None else default_grids()

    def scenarios(self, seed: Optional[int] = None) -> list[ScenarioConfig]:
        """Measurement x parameter x regularization scenarios for every model, in config order."""
        configs: list[ScenarioConfig] = []
        for entry in self.models.values():
            specs = [
                spec
                for spec in self.measurement_scenarios
                if _compatible(entry.model, spec)
            ]
            configs.extend(
                scenario_matrix(
                    model=entry.model,
                    mixture_label=entry.label,
                    theta_true=entry.theta_true,
                    specs=specs,
                    parameter_scenario_list=resolve_parameter_scenarios(
                        self.parameter_scenarios, entry
                    ),
                    regularizations=self.regularization_scenarios,
                    n_mc=self.n_mc,
                    seed=self.seed if seed is None else seed,
                    bounds=entry.bounds,
                    thresholds=self.thresholds,
                    beta=self.beta,
                    noise_free=self.noise_free,
                )
            )
        return configs

    def load_dataset(self) -> MeasurementSet:
        """Read the fit section's CSV dataset."""
        assert self.fit is not None
        return read_dataset(self.fit.dataset, self.models[self.fit.model], self.fit.spec)


def _compatible(model: ResponseModel, spec: ResponseSpec) -> bool:
    try:
        check_variables(model, spec)
    except NrtlStudyError:
        return False
    return True


def resolve_parameter_scenarios(
    labels: Sequence[str], entry: ModelEntry
) -> list[ParameterScenario]:
    """Catalog labels present for this model, custom name=value fixes, or the full catalog."""
    names = entry.model.parameter_names
    catalog = {
        scenario.label: scenario
        for scenario in parameter_scenarios(entry.theta_true, names)
    }
    resolved: list[ParameterScenario] = []
    for label in labels:
        if label == CASE_STUDY_ONE:
            resolved.extend(catalog.values())
        elif label in catalog:
            resolved.append(catalog[label])
        elif "=" in label and label.partition("=")[0] in names:
            resolved.append(custom_fix(label, names))
    return resolved


# Validation helpers: each takes the JSON path of the value it checks


def _get(obj: dict, key: str, path: str, kind: Any, default: Any = ...) -> Any:
    if key not in obj:
        if default is ...:
            raise ConfigError(f"{path}.{key}", "is required")
        return default
    value = obj[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is int and isinstance(value, bool):
        raise ConfigError(f"{path}.{key}", "must be an integer")
    if not isinstance(value, kind):
        expected = getattr(kind, "__name__", str(kind))
        raise ConfigError(f"{path}.{key}", f"must be of type {expected}")
    return value


def _numbers(value: Any, path: str, length: Optional[int] = None) -> tuple[float, ...]:
    if not isinstance(value, list) or not all(
        isinstance(item, (int, float)) and not isinstance(item, bool) for item in value
    ):
        raise ConfigError(path, "must be a list of numbers")
    if length is not None and len(value) != length:
        raise ConfigError(path, f"must have {length} numbers")
    return tuple(float(item) for item in value)


def _component(raw: Any, path: str) -> PureComponent:
    if not isinstance(raw, dict):
        raise ConfigError(path, "must be an object")
    try:
        return PureComponent(
            name=_get(raw, "name", path, str),
            Tc=_get(raw, "Tc", path, float),
            Pc=_get(raw, "Pc", path, float),
            wagner_coeffs=_numbers(
                _get(raw, "wagner_coeffs", path, list), f"{path}.wagner_coeffs", 4
            ),  # type: ignore[arg-type]
            T_valid=_numbers(
                _get(raw, "T_valid", path, list), f"{path}.T_valid", 2
            ),  # type: ignore[arg-type]
        )
    except ConfigError:
        raise
    except NrtlStudyError as e:
        raise ConfigError(path, str(e))


def _nrtl(raw: Any, path: str) -> NrtlParams:
    if not isinstance(raw, dict):
        raise ConfigError(path, "must be an object")
    values = {
        name: _get(raw, name, path, float) for name in ("A12", "B12", "A21", "B21", "alpha")
    }
    try:
        return NrtlParams(**values)
    except NrtlStudyError as e:
        raise ConfigError(path, str(e))


def _mixture(raw: Any, path: str) -> Mixture:
    if not isinstance(raw, dict):
        raise ConfigError(path, "must be an object")
    try:
        azeotrope = AzeotropeType(_get(raw, "azeotrope_type", path, str, "None"))
    except ValueError:
        raise ConfigError(
            f"{path}.azeotrope_type", f"must be one of {[t.value for t in AzeotropeType]}"
        )
    try:
        return Mixture(
            component1=_component(raw.get("component1"), f"{path}.component1"),
            component2=_component(raw.get("component2"), f"{path}.component2"),
            nrtl=_nrtl(raw.get("nrtl"), f"{path}.nrtl"),
            label=_get(raw, "label", path, str),
            azeotrope_type=azeotrope,
        )
    except ConfigError:
        raise
    except NrtlStudyError as e:
        raise ConfigError(path, str(e))


def _grid(raw: Any, path: str, model: ResponseModel) -> np.ndarray:
    """
    A design grid: {"rows": [[...], ...]} or one entry per control name,
    each a list of values or {"start", "stop", "num"}. Controls combine as
    a product with the last control varying slowest.
    """
    if not isinstance(raw, dict):
        raise ConfigError(path, "must be an object")
    n_controls = len(model.control_names)
    if "rows" in raw:
        rows = raw["rows"]
        if not isinstance(rows, list) or not rows:
            raise ConfigError(f"{path}.rows", "must be a non-empty list")
        grid = np.array(
            [_numbers(row, f"{path}.rows[{i}]", n_controls) for i, row in enumerate(rows)]
        )
    else:
        axes = []
        for name in model.control_names:
            value = raw.get(name)
            axis_path = f"{path}.{name}"
            if isinstance(value, dict):
                start = _get(value, "start", axis_path, float)
                stop = _get(value, "stop", axis_path, float)
                num = _get(value, "num", axis_path, int)
                if num < 1:
                    raise ConfigError(f"{axis_path}.num", "must be >= 1")
                axes.append(list(np.linspace(start, stop, num)))
            elif isinstance(value, list) and value:
                axes.append(list(_numbers(value, axis_path)))
            else:
                raise ConfigError(axis_path, "must be a list of values or {start, stop, num}")
        grid = np.array(
            [combo[::-1] for combo in itertools.product(*reversed(axes))], dtype=float
        )
    for j, (low, high) in enumerate(model.control_bounds):
        if np.any(grid[:, j] < low) or np.any(grid[:, j] > high):
            raise ConfigError(
                path, f"{model.control_names[j]} must lie within [{low}, {high}]"
            )
    return grid


def _grids(raw: Any, path: str, model: ResponseModel, required: bool) -> Optional[Grids]:
    if raw is None:
        if required:
            raise ConfigError(path, "is required for this model")
        return None
    if not isinstance(raw, dict):
        raise ConfigError(path, "must be an object")
    defaults = default_grids() if not required else None

    def pick(key: str) -> np.ndarray:
        if key in raw:
            return _grid(raw[key], f"{path}.{key}", model)
        if defaults is None:
            raise ConfigError(f"{path}.{key}", "is required")
        return getattr(defaults, key)

    return Grids(
        measurement=pick("measurement"),
        prediction=pick("prediction"),
        initial=pick("initial"),
    )


def _measurement_scenario(raw: Any, path: str) -> ResponseSpec:
    if isinstance(raw, str):
        if raw not in MEASUREMENT_SCENARIOS:
            raise ConfigError(path, f"must be one of {sorted(MEASUREMENT_SCENARIOS)}")
        return ResponseSpec.named(raw)
    if isinstance(raw, dict):
        variables = _get(raw, "variables", path, list)
        if not all(isinstance(name, str) for name in variables):
            raise ConfigError(f"{path}.variables", "must be a list of names")
        try:
            return ResponseSpec(
                variables=tuple(variables),
                sigma=_numbers(_get(raw, "sigma", path, list), f"{path}.sigma"),
                label=_get(raw, "label", path, str),
            )
        except NrtlStudyError as e:
            raise ConfigError(path, str(e))
    raise ConfigError(path, "must be a scenario name or an object")


def _fixed(raw: dict, path: str, names: Sequence[str]) -> tuple[str, ...]:
    fixed = _get(raw, "fixed", path, list, [])
    for i, name in enumerate(fixed):
        if name not in names:
            raise ConfigError(f"{path}.fixed[{i}]", f"must be one of {list(names)}")
    if len(fixed) >= len(names):
        raise ConfigError(f"{path}.fixed", "must leave at least one parameter estimated")
    return tuple(fixed)


def _theta(raw: dict, key: str, path: str, entry: ModelEntry) -> Optional[tuple[float, ...]]:
    if key not in raw:
        return None
    value = _get(raw, key, path, dict)
    names = entry.model.parameter_names
    theta = list(entry.theta_true)
    for name in value:
        if name not in names:
            raise ConfigError(f"{path}.{key}.{name}", f"must be one of {list(names)}")
        theta[names.index(name)] = _get(value, name, f"{path}.{key}", float)
    return tuple(theta)


def _model_label(raw: dict, path: str, models: dict[str, ModelEntry]) -> str:
    label = _get(raw, "mixture", path, str)
    if label not in models:
        raise ConfigError(f"{path}.mixture", f"unknown mixture {label!r}")
    return label


def _spec_for(raw: dict, path: str, entry: ModelEntry, default: str) -> ResponseSpec:
    spec = _measurement_scenario(
        raw.get("measurement_scenario", default), f"{path}.measurement_scenario"
    )
    if not _compatible(entry.model, spec):
        raise ConfigError(
            f"{path}.measurement_scenario",
            f"variables must be a subset of {entry.model.available_variables}",
        )
    return spec


def parse_run_config(data: Any, path: Path) -> RunConfig:
    """Validate a decoded JSON document into a RunConfig."""
    if not isinstance(data, dict):
        raise ConfigError("$", "must be a JSON object")

    alpha_bounds = _numbers(_get(data, "alpha_bounds", "$", list, [0.0, 2.0]), "$.alpha_bounds", 2)
    if not 0.0 <= alpha_bounds[0] < alpha_bounds[1]:
        raise ConfigError("$.alpha_bounds", "must satisfy 0 <= low < high")
    nrtl_bounds = ParameterBounds.nrtl(alpha_bounds)  # type: ignore[arg-type]
    raw_grids = data.get("grids")

    models: dict[str, ModelEntry] = {}

    def add(entry: ModelEntry, entry_path: str) -> None:
        if entry.label in models:
            raise ConfigError(entry_path, f"duplicate label {entry.label!r}")
        models[entry.label] = entry

    for i, raw in enumerate(_get(data, "mixtures", "$", list, [])):
        mixture = _mixture(raw, f"$.mixtures[{i}]")
        model = NrtlVleModel(mixture)
        add(
            ModelEntry(
                mixture.label,
                model,
                tuple(mixture.nrtl.as_array()),
                nrtl_bounds,
                _grids(raw_grids, "$.grids", model, required=False),
                mixture,
            ),
            f"$.mixtures[{i}]",
        )
    for i, label in enumerate(_get(data, "fixture_mixtures", "$", list, [])):
        if label not in FIXTURE_MIXTURES:
            raise ConfigError(
                f"$.fixture_mixtures[{i}]", f"must be one of {sorted(FIXTURE_MIXTURES)}"
            )
        mixture = FIXTURE_MIXTURES[label]
        model = NrtlVleModel(mixture)
        add(
            ModelEntry(
                label,
                model,
                tuple(mixture.nrtl.as_array()),
                nrtl_bounds,
                _grids(raw_grids, "$.grids", model, required=False),
                mixture,
            ),
            f"$.fixture_mixtures[{i}]",
        )
    for i, raw in enumerate(_get(data, "surrogates", "$", list, [])):
        surrogate_path = f"$.surrogates[{i}]"
        if not isinstance(raw, dict):
            raise ConfigError(surrogate_path, "must be an object")
        surrogate = LinearSurrogate(_get(raw, "label", surrogate_path, str))
        theta_true = _numbers(
            _get(raw, "theta_true", surrogate_path, list), f"{surrogate_path}.theta_true", 2
        )
        add(
            ModelEntry(
                surrogate.label,
                surrogate,
                theta_true,
                ParameterBounds.unbounded(2),
                _grids(raw.get("grids"), f"{surrogate_path}.grids", surrogate, required=True),
            ),
            surrogate_path,
        )
    if not models:
        raise ConfigError("$", "must define at least one mixture or surrogate")

    measurement = tuple(
        _measurement_scenario(raw, f"$.measurement_scenarios[{i}]")
        for i, raw in enumerate(_get(data, "measurement_scenarios", "$", list, ["best"]))
    )
    for i, spec in enumerate(measurement):
        if not any(_compatible(entry.model, spec) for entry in models.values()):
            raise ConfigError(
                f"$.measurement_scenarios[{i}]", "matches no model's response variables"
            )

    theta_labels = _get(data, "parameter_scenarios", "$", list, ["All"])
    for i, label in enumerate(theta_labels):
        if not isinstance(label, str):
            raise ConfigError(f"$.parameter_scenarios[{i}]", "must be a string")
        try:
            known = any(
                resolve_parameter_scenarios([label], entry) for entry in models.values()
            )
        except NrtlStudyError as e:
            raise ConfigError(f"$.parameter_scenarios[{i}]", str(e))
        if not known:
            raise ConfigError(
                f"$.parameter_scenarios[{i}]", f"unknown parameter scenario {label!r}"
            )

    regularization = []
    for i, raw in enumerate(_get(data, "regularization_scenarios", "$", list, ["None"])):
        try:
            regularization.append(RegularizationScenario(raw))
        except ValueError:
            raise ConfigError(
                f"$.regularization_scenarios[{i}]",
                f"must be one of {[s.value for s in RegularizationScenario]}",
            )

    raw_thresholds = _get(data, "regularization_thresholds", "$", dict, {})
    try:
        thresholds = RegularizationThresholds(
            **{
                key: _get(raw_thresholds, key, "$.regularization_thresholds", float)
                for key in raw_thresholds
                if key in ("e_eps", "svd_eps_cond", "fs_eps")
            }
        )
    except NrtlStudyError as e:
        raise ConfigError("$.regularization_thresholds", str(e))

    n_mc = _get(data, "n_mc", "$", int, 100)
    if not 1 <= n_mc <= SHAPIRO_WILK_LIMIT:
        raise ConfigError("$.n_mc", f"must be between 1 and {SHAPIRO_WILK_LIMIT}")
    seed = _get(data, "seed", "$", int, 0)
    beta = _get(data, "beta", "$", float, 0.95)
    if not 0.0 < beta < 1.0:
        raise ConfigError("$.beta", "must be in (0, 1)")

    config = RunConfig(
        path=path,
        models=models,
        measurement_scenarios=measurement,
        parameter_scenarios=tuple(theta_labels),
        regularization_scenarios=tuple(regularization),
        thresholds=thresholds,
        n_mc=n_mc,
        seed=seed,
        beta=beta,
        noise_free=_get(data, "noise_free", "$", bool, False),
    )
    return _with_sections(config, data, path)


def _with_sections(config: RunConfig, data: dict, path: Path) -> RunConfig:
    models = config.models
    sections: dict[str, Any] = {}

    if "vle" in data:
        raw = _get(data, "vle", "$", dict)
        mixture_labels = [
            label for label, entry in models.items() if entry.mixture is not None
        ]
        labels = tuple(_get(raw, "mixtures", "$.vle", list, mixture_labels))
        for i, label in enumerate(labels):
            if label not in models or models[label].mixture is None:
                raise ConfigError(f"$.vle.mixtures[{i}]", f"unknown mixture {label!r}")
        if not labels:
            raise ConfigError("$.vle.mixtures", "must name at least one mixture")
        model = models[labels[0]].model
        grid = (
            _grid(raw["grid"], "$.vle.grid", model)
            if "grid" in raw
            else default_grids().measurement
        )
        sections["vle"] = VleSection(mixtures=labels, grid=grid)

    if "fit" in data:
        raw = _get(data, "fit", "$", dict)
        label = _model_label(raw, "$.fit", models)
        entry = models[label]
        beta = _get(raw, "beta", "$.fit", float, config.beta)
        if not 0.0 < beta < 1.0:
            raise ConfigError("$.fit.beta", "must be in (0, 1)")
        dataset = Path(_get(raw, "dataset", "$.fit", str))
        if not dataset.is_absolute():
            dataset = path.parent / dataset
        sections["fit"] = FitSection(
            model=label,
            dataset=dataset,
            spec=_spec_for(raw, "$.fit", entry, "best"),
            theta0=_theta(raw, "theta0", "$.fit", entry),
            fixed=_fixed(raw, "$.fit", entry.model.parameter_names),
            beta=beta,
        )

    if "oed" in data:
        raw = _get(data, "oed", "$", dict)
        label = _model_label(raw, "$.oed", models)
        entry = models[label]
        n_new = _get(raw, "n_new", "$.oed", int, 1)
        n_starts = _get(raw, "n_starts", "$.oed", int, N_STARTS)
        if n_new < 1:
            raise ConfigError("$.oed.n_new", "must be >= 1")
        if n_starts < 1:
            raise ConfigError("$.oed.n_starts", "must be >= 1")
        sections["oed"] = OedSection(
            model=label,
            design=_grid(_get(raw, "design", "$.oed", dict), "$.oed.design", entry.model),
            spec=_spec_for(raw, "$.oed", entry, "best"),
            theta=_theta(raw, "theta", "$.oed", entry),
            fixed=_fixed(raw, "$.oed", entry.model.parameter_names),
            criterion=_criterion(raw, "$.oed"),
            n_new=n_new,
            n_starts=n_starts,
        )

    if "soed" in data:
        raw = _get(data, "soed", "$", dict)
        n_iterations = _get(raw, "n_iterations", "$.soed", int, N_ITERATIONS)
        n_starts = _get(raw, "n_starts", "$.soed", int, N_STARTS)
        if n_iterations < 0:
            raise ConfigError("$.soed.n_iterations", "must be >= 0")
        if n_starts < 1:
            raise ConfigError("$.soed.n_starts", "must be >= 1")
        sections["soed"] = SoedSection(
            n_iterations=n_iterations,
            criterion=_criterion(raw, "$.soed"),
            n_starts=n_starts,
        )

    return replace(config, **sections)


def _criterion(raw: dict, path: str) -> Criterion:
    value = _get(raw, "criterion", path, str, "A")
    try:
        return Criterion(value)
    except ValueError:
        raise ConfigError(f"{path}.criterion", "must be one of A, D, E")


def load_run_config(path: str | Path) -> RunConfig:
    """Read and validate the run config at path."""
    config_path = Path(path)
    try:
        text = config_path.read_text(encoding="utf8")
    except OSError as e:
        raise ConfigError("$", f"cannot read {config_path}: {e.strerror}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("$", f"invalid JSON at line {e.lineno}: {e.msg}")
    return parse_run_config(data, config_path)


def response_columns(spec: ResponseSpec) -> list[str]:
    return [f"{name}_{VARIABLE_UNITS[name]}" for name in spec.variables]


def control_columns(model: ResponseModel) -> list[str]:
    units = {"x1L": "molmol", "P": "Pa"}
    return [f"{name}_{units.get(name, 'dimless')}" for name in model.control_names]


def read_dataset(path: Path, entry: ModelEntry, spec: ResponseSpec) -> MeasurementSet:
    """
    Read measured data from a CSV with the control columns (x1L_molmol,
    P_Pa) and one column per selected response (x1V_molmol, T_K).
    """
    columns = control_columns(entry.model) + response_columns(spec)
    try:
        with open(path, newline="", encoding="utf8") as dataset_file:
            reader = csv.DictReader(dataset_file)
            missing = [name for name in columns if name not in (reader.fieldnames or [])]
            if missing:
                raise ConfigError("$.fit.dataset", f"missing columns {missing}")
            rows = [[float(row[name]) for name in columns] for row in reader]
    except OSError as e:
        raise ConfigError("$.fit.dataset", f"cannot read {path}: {e.strerror}")
    except ValueError as e:
        raise ConfigError("$.fit.dataset", f"non-numeric value: {e}")
    if not rows:
        raise ConfigError("$.fit.dataset", "has no data rows")
    table = np.array(rows)
    n_controls = len(entry.model.control_names)
    try:
        return MeasurementSet(U=table[:, :n_controls], Ym=table[:, n_controls:], spec=spec)
    except NrtlStudyError as e:
        raise ConfigError("$.fit.dataset", str(e))
