"""
Isobaric bubble point of a binary mixture with an ideal vapor phase.

    x1V P = x1L gamma1 P1s(T)        x2V P = x2L gamma2 P2s(T)

T is the root of F(T) = x1L gamma1 P1s + x2L gamma2 P2s - P.
"""

from __future__ import annotations

import math
from typing import Optional, TypedDict

import numpy as np
from scipy.optimize import brentq

from .dual import Dual, Scalar, exp
from .nrtl import ln_activity_coefficients
from .types import PARAMETER_NAMES, Mixture, VleState
from .vapor_pressure import ln_vapor_pressure, saturation_temperature
from nrtlstudy.exceptions import ConvergenceError, DomainError
from nrtlstudy.utils import incr_if_enabled

BRACKET_MARGIN_K = 20.0
RESIDUAL_TOLERANCE = 1e-9


class BubblePointJacobian(TypedDict):
    """Total derivatives of bubble point outputs with respect to NrtlParams."""

    T: np.ndarray
    x1V: np.ndarray


def _partial_pressures(
    x1L: float, T: Scalar, m: Mixture, theta: tuple[Scalar, ...]
) -> tuple[Scalar, Scalar, Scalar, Scalar]:
    """Return (x1L gamma1 P1s, x2L gamma2 P2s, gamma1, gamma2)."""
    ln_g1, ln_g2 = ln_activity_coefficients(x1L, T, *theta)
    g1 = exp(ln_g1)
    g2 = exp(ln_g2)
    p1 = x1L * g1 * exp(ln_vapor_pressure(m.component1, T))
    p2 = (1.0 - x1L) * g2 * exp(ln_vapor_pressure(m.component2, T))
    return p1, p2, g1, g2


def _bracket(P: float, m: Mixture) -> tuple[float, float]:
    """Pure component saturation temperatures at P, widened and clipped."""
    T_min, T_max = m.joint_validity
    saturation: list[float] = []
    for component in (m.component1, m.component2):
        try:
            saturation.append(saturation_temperature(component, P))
        except ConvergenceError:
            continue
    if not saturation:
        return T_min, T_max
    low = max(T_min, min(saturation) - BRACKET_MARGIN_K)
    high = min(T_max, max(saturation) + BRACKET_MARGIN_K)
    if not low < high:
        return T_min, T_max
    return low, high


def bubble_point(x1L: float, P: float, m: Mixture) -> VleState:
    """Solve the bubble point temperature and vapor composition."""
    if not 0.0 <= x1L <= 1.0:
        raise DomainError("x1L", x1L, "a mole fraction in [0, 1]")
    if not P > 0:
        raise DomainError("P", P, "a pressure > 0 Pa")
    theta = tuple(m.nrtl.as_array())

    def residual(T: float) -> float:
        p1, p2, _, _ = _partial_pressures(x1L, T, m, theta)
        return (p1 + p2 - P) / P

    low, high = _bracket(P, m)
    f_low, f_high = residual(low), residual(high)
    if f_low * f_high > 0:
        # No sign change near the pure component boiling points
        low, high = m.joint_validity
        f_low, f_high = residual(low), residual(high)
    if f_low * f_high > 0 or not (math.isfinite(f_low) and math.isfinite(f_high)):
        incr_if_enabled("bubble_point_failed", 1)
        raise ConvergenceError((low, high), (f_low * P, f_high * P), x1L, P)

    T = brentq(residual, low, high, xtol=1e-12, rtol=1e-14, maxiter=200)
    p1, p2, g1, g2 = _partial_pressures(x1L, T, m, theta)
    relative_residual = abs(p1 + p2 - P) / P
    if relative_residual > RESIDUAL_TOLERANCE:
        incr_if_enabled("bubble_point_failed", 1)
        raise ConvergenceError((low, high), (f_low * P, f_high * P), x1L, P)
    x1V = min(max(float(p1) / P, 0.0), 1.0)
    return VleState(
        x1L=x1L, P=P, T=float(T), x1V=x1V, gamma1=float(g1), gamma2=float(g2)
    )


def bubble_point_sensitivity(
    x1L: float, P: float, m: Mixture, state: Optional[VleState] = None
) -> tuple[VleState, BubblePointJacobian]:
    """
    Solve the bubble point and return dT/dtheta and dx1V/dtheta.

    The temperature derivative comes from the implicit function theorem on
    F(T, theta) = 0, dT/dtheta = -F_theta / F_T, using one dual-number pass
    seeded in (theta, T). A second pass threads T(theta) through x1V.
    """
    if state is None:
        state = bubble_point(x1L, P, m)
    n = len(PARAMETER_NAMES)
    values = m.nrtl.as_array()

    seeded = tuple(Dual.variable(values[j], j, n + 1) for j in range(n))
    T_seeded = Dual.variable(state.T, n, n + 1)
    p1, p2, _, _ = _partial_pressures(x1L, T_seeded, m, seeded)
    F = p1 + p2
    assert isinstance(F, Dual)
    F_T = F.grad[n]
    if F_T == 0.0 or not math.isfinite(F_T):
        raise ConvergenceError((state.T, state.T), (0.0, 0.0), x1L, P)
    dT = -F.grad[:n] / F_T

    theta_dual = tuple(Dual.variable(values[j], j, n) for j in range(n))
    T_dual = Dual(state.T, dT)
    p1_dual, _, _, _ = _partial_pressures(x1L, T_dual, m, theta_dual)
    assert isinstance(p1_dual, Dual)
    dx1V = p1_dual.grad / P
    return state, {"T": dT, "x1V": dx1V}

