"""
Pure component vapor pressure, Wagner 2.5-5 form.

    ln(P / Pc) = (a tau + b tau^1.5 + c tau^2.5 + d tau^5) / Tr
    tau = 1 - Tr,  Tr = T / Tc
"""

from __future__ import annotations

from functools import lru_cache
import math

from scipy.optimize import brentq

from .dual import Scalar, log
from .types import PureComponent
from nrtlstudy.exceptions import ConvergenceError, DomainError, OutOfRangeError


def ln_vapor_pressure(c: PureComponent, T: Scalar) -> Scalar:
    """ln(P^s / Pa), unchecked; T may be a Dual."""
    a, b, cc, d = c.wagner_coeffs
    Tr = T / c.Tc
    tau = 1.0 - Tr
    return math.log(c.Pc) + (
        a * tau + b * tau**1.5 + cc * tau**2.5 + d * tau**5
    ) / Tr


def check_temperature(c: PureComponent, T: float) -> None:
    T_min, T_max = c.T_valid
    if not T_min <= T <= T_max:
        raise OutOfRangeError(
            "T", T, f"a temperature in [{T_min}, {T_max}] K for {c.name}"
        )


def vapor_pressure(c: PureComponent, T: float) -> float:
    """Vapor pressure in Pa at T in kelvin, within the component's T_valid."""
    check_temperature(c, T)
    return math.exp(ln_vapor_pressure(c, T))


@lru_cache(maxsize=4096)
def saturation_temperature(c: PureComponent, P: float) -> float:
    """Temperature where the vapor pressure equals P, searched over T_valid."""
    if not P > 0:
        raise DomainError("P", P, "a pressure > 0 Pa")
    T_min, T_max = c.T_valid
    ln_P = log(P)

    def residual(T: float) -> float:
        return ln_vapor_pressure(c, T) - ln_P

    low, high = residual(T_min), residual(T_max)
    if low * high > 0:
        raise ConvergenceError((T_min, T_max), (low, high), None, P)
    return brentq(residual, T_min, T_max, xtol=1e-12, rtol=1e-14, maxiter=200)
