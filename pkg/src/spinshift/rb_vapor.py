"""Rubidium vapor pressure and number density.

Primary model: Alcock, Itkin & Horrigan (Canadian Metallurgical Quarterly
23, 309 (1984)), as tabulated in the CRC Handbook "Vapor pressure of the
metallic elements":

    log10(P / Pa) = 5.006 + A + B / T

with A = 4.312, B = -4040 K for liquid Rb (melting point to ~550 K) and
A = 4.857, B = -4215 K for the solid. The handbook states +-5 %
accuracy. The same table lists P = 1 Pa at 434 K and 10 Pa at 486 K for
Rb; tests pin both.

Alternative: the liquid-phase fit quoted in Steck's "Rubidium 87 D Line
Data" (log10 P/torr = 15.88253 - 4529.635/T + 0.00058663 T
- 2.99138 log10 T), kept as a cross-check; it runs ~20 % below the
primary model near 380 K.
"""

import numpy as np

from .units import K_B_J, TORR_TO_PA

RB_MELTING_K = 312.46
RB_T_MAX_K = 550.0

ALCOCK_OFFSET = 5.006
ALCOCK_LIQUID = (4.312, -4040.0)
ALCOCK_SOLID = (4.857, -4215.0)

STECK_LIQUID = (15.88253, -4529.635, 0.00058663, -2.99138)


class TemperatureRangeError(ValueError):
    pass


def _check_range(T, lo=RB_MELTING_K, hi=RB_T_MAX_K):
    T = np.asarray(T, dtype=float)
    if np.any(T < lo - 0.5) or np.any(T > hi):
        raise TemperatureRangeError(
            f"liquid-phase Rb vapor formula valid for {lo - 0.5:.0f}-{hi:.0f} K; got {T}")
    return T


def vapor_pressure_pa(T, model="alcock"):
    """Saturated Rb vapor pressure (Pa) over the liquid."""
    T = _check_range(T)
    if model == "alcock":
        a, b = ALCOCK_LIQUID
        return 10.0 ** (ALCOCK_OFFSET + a + b / T)
    if model == "steck":
        a, b, c, d = STECK_LIQUID
        return 10.0 ** (a + b / T + c * T + d * np.log10(T)) * TORR_TO_PA
    raise ValueError(f"unknown vapor-pressure model {model!r}")


def solid_vapor_pressure_pa(T):
    """Alcock solid-phase branch (Pa), for checks below the melting point."""
    T = np.asarray(T, dtype=float)
    a, b = ALCOCK_SOLID
    return 10.0 ** (ALCOCK_OFFSET + a + b / T)


def rb_density(T, model="alcock"):
    """Rb number density n = P / (k_B T) in cm^-3."""
    T = _check_range(T)
    n_m3 = vapor_pressure_pa(T, model) / (K_B_J * T)
    out = n_m3 * 1e-6
    return float(out) if np.ndim(out) == 0 else out


def melting_point_mismatch():
    """Relative gap between liquid and solid branches at the melting point."""
    return float(vapor_pressure_pa(RB_MELTING_K) / solid_vapor_pressure_pa(RB_MELTING_K) - 1.0)


__all__ = ["rb_density", "vapor_pressure_pa", "solid_vapor_pressure_pa",
           "TemperatureRangeError", "RB_MELTING_K", "RB_T_MAX_K", "melting_point_mismatch"]
