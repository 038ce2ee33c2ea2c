"""Unit conventions.

Every public function in the package works in a single fixed system:

    length               cm
    time                 s
    magnetic field       nT
    angular frequency    rad/s
    gyromagnetic ratio   rad s^-1 nT^-1
    diffusion constant   cm^2/s
    temperature          K

The helpers below convert the handful of other units that show up in
practice (mHz/nT gyromagnetic ratios, Hz, degrees Celsius, tesla, meV).
"""

import math

TWO_PI = 2.0 * math.pi

# Boltzmann constant in meV/K and J/K (CODATA exact).
K_B_MEV = 8.617333262e-2
K_B_J = 1.380649e-23
TORR_TO_PA = 101325.0 / 760.0

UNITS = {
    "length": "cm",
    "time": "s",
    "magnetic_field": "nT",
    "angular_frequency": "rad/s",
    "gyromagnetic_ratio": "rad/(s nT)",
    "diffusion_constant": "cm^2/s",
    "temperature": "K",
}


def gamma_from_mhz_per_nt(value):
    """mHz/nT (cyclic) -> rad s^-1 nT^-1."""
    return TWO_PI * 1e-3 * value


def gamma_to_mhz_per_nt(value):
    return value / (TWO_PI * 1e-3)


def hz_to_rad(f):
    return TWO_PI * f


def rad_to_hz(omega):
    return omega / TWO_PI


def celsius_to_kelvin(t_c):
    return t_c + 273.15


def kelvin_to_celsius(t_k):
    return t_k - 273.15


def tesla_to_nt(b):
    return b * 1e9


def nt_to_tesla(b):
    return b * 1e-9


def mev_over_kt(energy_mev, temperature_k):
    """Dimensionless E/(k_B T) for E in meV and T in K."""
    return energy_mev / (K_B_MEV * temperature_k)
