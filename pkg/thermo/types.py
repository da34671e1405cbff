"""Types for the binary NRTL vapor-liquid equilibrium model"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from enum import Enum
from typing import Literal, Sequence
import math

import numpy as np

from nrtlstudy.exceptions import DomainError

# Canonical order of NRTL parameters in vectors, masks, and output files
ParameterName = Literal["A12", "B12", "A21", "B21", "alpha"]
PARAMETER_NAMES: tuple[ParameterName, ...] = ("A12", "B12", "A21", "B21", "alpha")

# Controls of an experiment: liquid mole fraction of component 1 and pressure (Pa)
ControlRow = tuple[float, float]
X1L_BOUNDS = (0.01, 0.99)
P_BOUNDS = (0.5e5, 1.5e5)


class AzeotropeType(str, Enum):
    NONE = "None"
    PRESSURE_MAX = "PressureMax"
    PRESSURE_MIN = "PressureMin"
    DOUBLE = "Double"


@dataclass(frozen=True)
class NrtlParams:
    """
    Binary NRTL parameters, with tau_ij = A_ij + B_ij / T.

    A12, A21 and alpha are dimensionless; B12 and B21 are in kelvin.
    """

    A12: float
    B12: float
    A21: float
    B21: float
    alpha: float

    def __post_init__(self) -> None:
        for field in fields(self):
            value = getattr(self, field.name)
            if not math.isfinite(value):
                raise DomainError(field.name, value, "a finite value")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in PARAMETER_NAMES], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float] | np.ndarray) -> NrtlParams:
        if len(values) != len(PARAMETER_NAMES):
            raise DomainError("values", values, "five NRTL parameters")
        return cls(*(float(value) for value in values))

    def with_values(self, **changes: float) -> NrtlParams:
        return replace(self, **changes)

    def swapped(self) -> NrtlParams:
        """Parameters after relabeling components 1 and 2."""
        return NrtlParams(self.A21, self.B21, self.A12, self.B12, self.alpha)


@dataclass(frozen=True)
class PureComponent:
    """
    Pure component vapor pressure record.

    wagner_coeffs are (a, b, c, d) of the Wagner 2.5-5 form, valid on
    T_valid = (T_min, T_max) in kelvin.
    """

    name: str
    Tc: float
    Pc: float
    wagner_coeffs: tuple[float, float, float, float]
    T_valid: tuple[float, float]

    def __post_init__(self) -> None:
        if not self.Tc > 0:
            raise DomainError("Tc", self.Tc, "a temperature > 0 K")
        if not self.Pc > 0:
            raise DomainError("Pc", self.Pc, "a pressure > 0 Pa")
        if len(self.wagner_coeffs) != 4:
            raise DomainError("wagner_coeffs", self.wagner_coeffs, "4 coefficients")
        T_min, T_max = self.T_valid
        if not 0 < T_min < T_max <= self.Tc:
            raise DomainError("T_valid", self.T_valid, "0 < T_min < T_max <= Tc")


@dataclass(frozen=True)
class Mixture:
    component1: PureComponent
    component2: PureComponent
    nrtl: NrtlParams
    label: str
    azeotrope_type: AzeotropeType = AzeotropeType.NONE

    def __post_init__(self) -> None:
        if self.component1 == self.component2 or (
            self.component1.name == self.component2.name
        ):
            raise DomainError(
                "component2", self.component2.name, "a component distinct from component1"
            )

    @property
    def joint_validity(self) -> tuple[float, float]:
        """Temperature range where both vapor pressure correlations are valid."""
        return (
            max(self.component1.T_valid[0], self.component2.T_valid[0]),
            min(self.component1.T_valid[1], self.component2.T_valid[1]),
        )

    def with_params(self, nrtl: NrtlParams) -> Mixture:
        return replace(self, nrtl=nrtl)

    def swapped(self) -> Mixture:
        """The same mixture with components 1 and 2 relabeled."""
        return Mixture(
            component1=self.component2,
            component2=self.component1,
            nrtl=self.nrtl.swapped(),
            label=f"{self.label}-swapped",
            azeotrope_type=self.azeotrope_type,
        )


@dataclass(frozen=True)
class VleState:
    """Bubble point: liquid x1L at pressure P (Pa) boils at T (K) giving vapor x1V."""

    x1L: float
    P: float
    T: float
    x1V: float
    gamma1: float
    gamma2: float

    @property
    def x2L(self) -> float:
        return 1.0 - self.x1L

    @property
    def x2V(self) -> float:
        return 1.0 - self.x1V
