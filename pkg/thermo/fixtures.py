"""
Synthetic mixtures used by tests and example run configs.

The pure component Wagner coefficients reproduce normal boiling points to
within a few tenths of a kelvin. The NRTL records are of the magnitude
reported for similar mixtures, but they are synthetic, and are not claimed to
match any databank.
"""

from __future__ import annotations

from .types import AzeotropeType, Mixture, NrtlParams, PureComponent

ETHANOL = PureComponent(
    name="ethanol",
    Tc=513.92,
    Pc=61.48e5,
    wagner_coeffs=(-8.68587, 1.17831, -4.87620, 1.58780),
    T_valid=(250.0, 513.92),
)
BENZENE = PureComponent(
    name="benzene",
    Tc=562.05,
    Pc=48.95e5,
    wagner_coeffs=(-7.01433, 1.55256, -1.8479, -3.713),
    T_valid=(280.0, 562.05),
)
METHANOL = PureComponent(
    name="methanol",
    Tc=512.64,
    Pc=80.97e5,
    wagner_coeffs=(-8.63571, 1.17982, -2.47900, -1.02400),
    T_valid=(250.0, 512.64),
)
WATER = PureComponent(
    name="water",
    Tc=647.14,
    Pc=220.64e5,
    wagner_coeffs=(-7.870154, 1.906774, -2.310330, -2.063390),
    T_valid=(273.16, 647.14),
)
ACETONE = PureComponent(
    name="acetone",
    Tc=508.1,
    Pc=47.0e5,
    wagner_coeffs=(-7.21389, 1.20200, -2.43926, -3.35590),
    T_valid=(250.0, 508.1),
)
CHLOROFORM = PureComponent(
    name="chloroform",
    Tc=536.4,
    Pc=54.7e5,
    wagner_coeffs=(-6.75112, 1.16625, -2.13970, -3.44421),
    T_valid=(250.0, 536.4),
)

ETHBENZ_LIKE = Mixture(
    component1=ETHANOL,
    component2=BENZENE,
    nrtl=NrtlParams(A12=0.568, B12=-54.8, A21=-0.915, B21=882.0, alpha=0.3),
    label="ethbenz-like",
    azeotrope_type=AzeotropeType.PRESSURE_MAX,
)
METHANOL_WATER_LIKE = Mixture(
    component1=METHANOL,
    component2=WATER,
    nrtl=NrtlParams(A12=-0.693, B12=172.987, A21=2.7322, B21=-617.269, alpha=0.3),
    label="methanol-water-like",
    azeotrope_type=AzeotropeType.NONE,
)
METHANOL_BENZENE_LIKE = Mixture(
    component1=METHANOL,
    component2=BENZENE,
    nrtl=NrtlParams(A12=0.0, B12=290.0, A21=0.0, B21=580.0, alpha=0.4),
    label="methanol-benzene-like",
    azeotrope_type=AzeotropeType.PRESSURE_MAX,
)
ACETONE_CHLOROFORM_LIKE = Mixture(
    component1=ACETONE,
    component2=CHLOROFORM,
    nrtl=NrtlParams(A12=0.9646, B12=-590.0, A21=-3.6118, B21=1201.0, alpha=0.3),
    label="acetone-chloroform-like",
    azeotrope_type=AzeotropeType.PRESSURE_MIN,
)
IDEAL_ETHBENZ = Mixture(
    component1=ETHANOL,
    component2=BENZENE,
    nrtl=NrtlParams(A12=0.0, B12=0.0, A21=0.0, B21=0.0, alpha=0.3),
    label="ideal-ethbenz",
    azeotrope_type=AzeotropeType.NONE,
)

FIXTURE_MIXTURES: dict[str, Mixture] = {
    mixture.label: mixture
    for mixture in (
        ETHBENZ_LIKE,
        METHANOL_WATER_LIKE,
        METHANOL_BENZENE_LIKE,
        ACETONE_CHLOROFORM_LIKE,
    )
}
