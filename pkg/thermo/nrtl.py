"""
Binary NRTL activity coefficient model.

    tau12 = A12 + B12 / T            tau21 = A21 + B21 / T
    G12 = exp(-alpha * tau12)        G21 = exp(-alpha * tau21)

    ln gamma1 = x2^2 [tau21 (G21 / (x1 + x2 G21))^2 + tau12 G12 / (x2 + x1 G12)^2]
    ln gamma2 = x1^2 [tau12 (G12 / (x2 + x1 G12))^2 + tau21 G21 / (x1 + x2 G21)^2]
"""

from __future__ import annotations

from .dual import Scalar, exp, value_of
from .types import NrtlParams
from nrtlstudy.exceptions import DomainError


def tau_eval(T: float, p: NrtlParams) -> tuple[float, float]:
    """Return (tau12, tau21) at temperature T in kelvin."""
    if not T > 0:
        raise DomainError("T", T, "a temperature > 0 K")
    return p.A12 + p.B12 / T, p.A21 + p.B21 / T


def activity_coefficients(x1L: float, T: float, p: NrtlParams) -> tuple[float, float]:
    """Return (gamma1, gamma2) for liquid composition x1L at temperature T."""
    g1, g2 = ln_activity_coefficients(
        x1L, T, p.A12, p.B12, p.A21, p.B21, p.alpha
    )
    return float(exp(g1)), float(exp(g2))


def ln_activity_coefficients(
    x1: float,
    T: Scalar,
    A12: Scalar,
    B12: Scalar,
    A21: Scalar,
    B21: Scalar,
    alpha: Scalar,
) -> tuple[Scalar, Scalar]:
    """
    Return (ln gamma1, ln gamma2).

    T and the parameters may be floats or Dual numbers; x1 is a control and
    stays a float.
    """
    if not 0.0 <= x1 <= 1.0:
        raise DomainError("x1L", x1, "a mole fraction in [0, 1]")
    if not value_of(T) > 0:
        raise DomainError("T", value_of(T), "a temperature > 0 K")
    x2 = 1.0 - x1
    tau12 = A12 + B12 / T
    tau21 = A21 + B21 / T
    G12 = exp(-alpha * tau12)
    G21 = exp(-alpha * tau21)
    denom1 = x1 + x2 * G21
    denom2 = x2 + x1 * G12
    ln_gamma1 = x2 * x2 * (
        tau21 * (G21 / denom1) * (G21 / denom1) + tau12 * G12 / (denom2 * denom2)
    )
    ln_gamma2 = x1 * x1 * (
        tau12 * (G12 / denom2) * (G12 / denom2) + tau21 * G21 / (denom1 * denom1)
    )
    return ln_gamma1, ln_gamma2
