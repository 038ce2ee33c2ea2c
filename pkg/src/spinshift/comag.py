"""Dual-species (129Xe/131Xe) gyroscope: frequency-ratio estimator and the
systematic errors that nonuniform fields leave in it.

Each species precesses at omega_u = -gamma_u (B0 + dB_u) - Omega_rot with
dB_u = -domega_u / gamma_u. The estimator below cancels B0 and leaves the
differential field b_A = dB_129 - dB_131 weighted by gamma_bar.
"""

import math
from dataclasses import dataclass

from .analytic import series_constants
from .domain import GAMMA_129XE, GAMMA_131XE


class ComagError(ValueError):
    pass


def ratio(gamma_a=GAMMA_129XE, gamma_b=GAMMA_131XE):
    """R0 = gamma_129 / gamma_131."""
    return gamma_a / gamma_b


def gamma_bar(gamma_a=GAMMA_129XE, gamma_b=GAMMA_131XE):
    """gamma_129 gamma_131 / (gamma_131 - gamma_129), rad/s/nT."""
    return gamma_a * gamma_b / (gamma_b - gamma_a)


def gyro_estimator(omega129, omega131, R0=None):
    """Rotation estimate (|R0 omega131| - |omega129|) / (1 + |R0|), rad/s."""
    R0 = ratio() if R0 is None else R0
    return (abs(R0 * omega131) - abs(omega129)) / (1 + abs(R0))


def field_offset(shift, gamma):
    """Apparent field change dB = -domega / gamma (nT) for a frequency shift."""
    return -shift / gamma


def precession_frequency(gamma, B0, shift=0.0, omega_rot=0.0):
    """Observed omega = -gamma B0 + shift - Omega_rot."""
    return -gamma * B0 + shift - omega_rot


@dataclass(frozen=True)
class ComagBudget:
    dOmega_linG_1st: float  # rad/s
    dOmega_quadG_1st: float
    dOmega_quadG_3rd: float
    b_A: float  # nT
    Lc: float  # cm
    R0: float
    gamma_bar: float

    @property
    def total(self):
        return self.dOmega_linG_1st + self.dOmega_quadG_1st + self.dOmega_quadG_3rd

    def as_dict(self):
        return {
            "dOmega_linG_1st": self.dOmega_linG_1st,
            "dOmega_quadG_1st": self.dOmega_quadG_1st,
            "dOmega_quadG_3rd": self.dOmega_quadG_3rd,
            "total": self.total,
            "b_A_nT": self.b_A,
            "Lc_cm": self.Lc,
            "R0": self.R0,
            "gamma_bar": self.gamma_bar,
        }


def _gamma_over_d(s129, s131):
    return s129.gamma**2 / s129.D**2 - s131.gamma**2 / s131.D**2


def budget_terms(s129, s131, L, B0, G1, G2):
    """The three leading systematic errors (rad/s) for a cube of side L."""
    if not B0 > 0:
        raise ComagError(f"B0 = {B0}: the budget formulas assume B0 > 0; flip the field "
                         "axis (and the sign of the gradients) to use them")
    gb = gamma_bar(s129.gamma, s131.gamma)
    dlam = s131.lam - s129.lam
    chi1 = series_constants().chi1
    lin1 = dlam / L * gb * G1**2 * L**3 / (360 * B0)
    quad1 = dlam / L * gb * G2 * L**3 / 90
    quad3 = -chi1 * _gamma_over_d(s129, s131) * gb * G2**3 * L**10
    return lin1, quad1, quad3


def systematic_errors(s129, s131, geometry, field_model, G1=None, G2=None):
    """ComagBudget for a cube in a field with linear and quadratic gradients.

    ``G1``/``G2`` default to the field model's strength when its kind is
    ``linear_gradient``/``quadratic_gradient`` and to 0 otherwise.
    """
    if G1 is None:
        G1 = field_model.strength if field_model.kind == "linear_gradient" else 0.0
    if G2 is None:
        G2 = field_model.strength if field_model.kind == "quadratic_gradient" else 0.0
    L, B0 = geometry.L, field_model.B0
    lin1, quad1, quad3 = budget_terms(s129, s131, L, B0, G1, G2)
    gb = gamma_bar(s129.gamma, s131.gamma)
    b_A = (lin1 + quad1 + quad3) / gb
    try:
        Lc = characteristic_length(s129, s131, G2) if G2 != 0 else math.inf
    except ComagError:
        Lc = math.nan
    return ComagBudget(lin1, quad1, quad3, b_A, Lc, ratio(s129.gamma, s131.gamma), gb)


@dataclass(frozen=True)
class CharacteristicLength:
    Lc: float  # fixed point of L^7 = X / L
    Lc_external: float  # L under the root held at ``L_ref``
    iterations: int
    interpretations_differ: bool


def _lc_numerator(s129, s131, G2):
    den = 90 * series_constants().chi1 * G2**2 * _gamma_over_d(s129, s131)
    if den == 0:
        raise ComagError("third-order budget term vanishes identically; no crossing")
    return abs((s131.lam - s129.lam) / den)


def characteristic_length_detail(s129, s131, G2, *, L_ref=1.0, tol=1e-10, max_iter=200):
    """Both readings of the crossing length.

    Equating the first- and third-order quadratic-gradient errors gives
    L^7 = X / L with X = |dlam / (90 chi1 G2^2 d(gamma^2/D^2))|. The fixed
    point is iterated as L <- (X / L)^(1/7) from ``L_ref`` and equals
    X^(1/8); the alternative keeps the inner L fixed at ``L_ref``.
    """
    if G2 == 0:
        raise ComagError("G2 = 0: no third-order term")
    X = _lc_numerator(s129, s131, G2)
    if X == 0:
        return CharacteristicLength(0.0, 0.0, 0, False)
    L = L_ref  # the map contracts by a factor 1/7 per step
    for it in range(1, max_iter + 1):
        new = (X / L) ** (1 / 7)
        if abs(new - L) <= tol * abs(new):
            L = new
            break
        L = new
    else:
        raise ComagError(f"characteristic-length iteration did not converge in {max_iter} steps")
    ext = (X / L_ref) ** (1 / 7)
    return CharacteristicLength(L, ext, it, abs(ext - L) > 0.01 * L)


def characteristic_length(s129, s131, G2):
    """Cell side (cm) where first- and third-order quadratic-gradient errors match."""
    return characteristic_length_detail(s129, s131, G2).Lc


def invert_lambda_difference(dOmega_quadG_1st, geometry, G2, gamma_bar_value=None):
    """lam_131 - lam_129 from the first-order quadratic-gradient error."""
    if G2 == 0:
        raise ComagError("G2 = 0: first-order error carries no lambda information")
    gb = gamma_bar() if gamma_bar_value is None else gamma_bar_value
    L = geometry.L
    return 90 * L * dOmega_quadG_1st / (gb * G2 * L**3)


def estimator_from_shifts(shift129, shift131, s129, s131, B0, omega_rot=0.0):
    """Estimator error for given per-species frequency shifts (rad/s)."""
    w129 = precession_frequency(s129.gamma, B0, shift129, omega_rot)
    w131 = precession_frequency(s131.gamma, B0, shift131, omega_rot)
    return gyro_estimator(w129, w131, ratio(s129.gamma, s131.gamma)) - math.copysign(1, B0) * omega_rot
