"""
Response models and measurement scenarios.

A ResponseModel maps one experiment's controls u and a parameter vector theta
to the measured response vector y, and to its Jacobian dy/dtheta. The NRTL
bubble point model is the production model. LinearSurrogate is a two
parameter model with closed-form answers, used to calibrate the estimation,
design and Monte Carlo code.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence, Union

import numpy as np

from nrtlstudy.exceptions import DomainError
from thermo.types import P_BOUNDS, PARAMETER_NAMES, X1L_BOUNDS, Mixture, NrtlParams
from thermo.vle import bubble_point, bubble_point_sensitivity

ParameterVector = Union[np.ndarray, Sequence[float], NrtlParams]
Bounds = tuple[tuple[float, float], ...]

# Unit suffixes used in output headers
VARIABLE_UNITS = {"x1V": "molmol", "T": "K", "y": "dimless"}

# sigma for x1V (mol/mol) and T (K)
DEFAULT_ACCURACY = {"x1V": 0.001, "T": 0.03}
PRECISE_ACCURACY = {"x1V": 0.0002, "T": 0.01}


@dataclass(frozen=True)
class ResponseSpec:
    """Selected response variables, in model order, with per-variable noise std."""

    variables: tuple[str, ...]
    sigma: tuple[float, ...]
    label: str = ""

    def __post_init__(self) -> None:
        if not self.variables:
            raise DomainError("variables", self.variables, "at least one variable")
        if len(set(self.variables)) != len(self.variables):
            raise DomainError("variables", self.variables, "distinct variables")
        if len(self.sigma) != len(self.variables):
            raise DomainError("sigma", self.sigma, "one std per selected variable")
        for value in self.sigma:
            if not value > 0:
                raise DomainError("sigma", self.sigma, "std values > 0")

    @classmethod
    def named(cls, label: str) -> ResponseSpec:
        """One of the four measurement scenarios."""
        try:
            variables, accuracy = MEASUREMENT_SCENARIOS[label]
        except KeyError:
            raise DomainError(
                "measurement scenario", label, f"one of {sorted(MEASUREMENT_SCENARIOS)}"
            )
        return cls(
            variables=variables,
            sigma=tuple(accuracy[name] for name in variables),
            label=label,
        )

    @property
    def n_y(self) -> int:
        return len(self.variables)

    def row_sigma(self, n_experiments: int) -> np.ndarray:
        """Noise std of each row of an experiment-major response vector."""
        return np.tile(np.asarray(self.sigma, dtype=float), n_experiments)


MEASUREMENT_SCENARIOS: dict[str, tuple[tuple[str, ...], dict[str, float]]] = {
    "worst": (("x1V",), DEFAULT_ACCURACY),
    "best": (("x1V", "T"), PRECISE_ACCURACY),
    "x1V-precise": (("x1V",), PRECISE_ACCURACY),
    "x1V-T-default": (("x1V", "T"), DEFAULT_ACCURACY),
}


class ResponseModel(Protocol):
    label: str
    parameter_names: tuple[str, ...]
    available_variables: tuple[str, ...]
    control_names: tuple[str, ...]
    control_bounds: Bounds

    def responses(
        self, u: Sequence[float], theta: np.ndarray, spec: ResponseSpec
    ) -> np.ndarray:
        ...

    def responses_and_jacobian(
        self, u: Sequence[float], theta: np.ndarray, spec: ResponseSpec
    ) -> tuple[np.ndarray, np.ndarray]:
        """Return y (n_y,) and dy/dtheta (n_y, n_theta) over all parameters."""
        ...


def check_variables(model: ResponseModel, spec: ResponseSpec) -> None:
    for name in spec.variables:
        if name not in model.available_variables:
            raise DomainError(
                "variables", spec.variables, f"a subset of {model.available_variables}"
            )
    order = [model.available_variables.index(name) for name in spec.variables]
    if order != sorted(order):
        raise DomainError(
            "variables", spec.variables, f"in the order {model.available_variables}"
        )


class NrtlVleModel:
    """Bubble point responses (x1V, T) of a binary mixture as functions of NrtlParams."""

    parameter_names = PARAMETER_NAMES
    available_variables = ("x1V", "T")
    control_names = ("x1L", "P")
    control_bounds: Bounds = (X1L_BOUNDS, P_BOUNDS)

    def __init__(self, mixture: Mixture):
        self.mixture = mixture
        self.label = mixture.label

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.label!r})"

    def _mixture_at(self, theta: np.ndarray) -> Mixture:
        return self.mixture.with_params(NrtlParams.from_array(theta))

    def responses(
        self, u: Sequence[float], theta: np.ndarray, spec: ResponseSpec
    ) -> np.ndarray:
        x1L, P = u
        state = bubble_point(float(x1L), float(P), self._mixture_at(theta))
        return np.array([getattr(state, name) for name in spec.variables])

    def responses_and_jacobian(
        self, u: Sequence[float], theta: np.ndarray, spec: ResponseSpec
    ) -> tuple[np.ndarray, np.ndarray]:
        x1L, P = u
        state, jacobian = bubble_point_sensitivity(
            float(x1L), float(P), self._mixture_at(theta)
        )
        y = np.array([getattr(state, name) for name in spec.variables])
        return y, np.vstack([jacobian[name] for name in spec.variables])


class LinearSurrogate:
    """y = theta1 + theta2 * u on u in [0, 1]."""

    parameter_names = ("theta1", "theta2")
    available_variables = ("y",)
    control_names = ("u",)
    control_bounds: Bounds = ((0.0, 1.0),)

    def __init__(self, label: str = "linear-surrogate"):
        self.label = label

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.label!r})"

    def responses(
        self, u: Sequence[float], theta: np.ndarray, spec: ResponseSpec
    ) -> np.ndarray:
        return np.array([theta[0] + theta[1] * float(u[0])])

    def responses_and_jacobian(
        self, u: Sequence[float], theta: np.ndarray, spec: ResponseSpec
    ) -> tuple[np.ndarray, np.ndarray]:
        return self.responses(u, theta, spec), np.array([[1.0, float(u[0])]])


ModelLike = Union[ResponseModel, Mixture]


def as_model(model: ModelLike) -> ResponseModel:
    if isinstance(model, Mixture):
        return NrtlVleModel(model)
    return model


def as_vector(theta: ParameterVector) -> np.ndarray:
    if isinstance(theta, NrtlParams):
        return theta.as_array()
    return np.asarray(theta, dtype=float)


@dataclass(frozen=True)
class ParameterBounds:
    """Box bounds on the full parameter vector."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.lower) != len(self.upper):
            raise DomainError("bounds", (self.lower, self.upper), "equal lengths")
        for low, high in zip(self.lower, self.upper):
            if not low < high:
                raise DomainError("bounds", (low, high), "lower < upper")

    @classmethod
    def nrtl(cls, alpha: tuple[float, float] = (0.0, 2.0)) -> ParameterBounds:
        """PE bounds: A in [-100, 100], B in [-1.5e5, 1.5e5] K, alpha as given."""
        return cls(
            lower=(-100.0, -1.5e5, -100.0, -1.5e5, alpha[0]),
            upper=(100.0, 1.5e5, 100.0, 1.5e5, alpha[1]),
        )

    @classmethod
    def unbounded(cls, n: int) -> ParameterBounds:
        return cls(lower=(-np.inf,) * n, upper=(np.inf,) * n)

    def clamped(self, index: int, low: float, high: float) -> ParameterBounds:
        """Bounds with parameter index restricted to [low, high]."""
        lower = list(self.lower)
        upper = list(self.upper)
        lower[index] = max(lower[index], low)
        upper[index] = min(upper[index], high)
        return ParameterBounds(tuple(lower), tuple(upper))

    def clip(self, theta: np.ndarray) -> np.ndarray:
        return np.clip(theta, self.lower, self.upper)
