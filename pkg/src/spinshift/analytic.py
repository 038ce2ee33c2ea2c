"""Closed-form shifts and relaxation rates for the cube, plus the series
constants that enter them.

Sign convention: a frequency shift is the change of the observed angular
frequency omega = -Im s0. For 129Xe (gamma < 0) and G2 > 0 the first-order
quadratic-gradient shift is positive.
"""

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SERIES_ROWS = 3000


@dataclass(frozen=True)
class SeriesConstants:
    S1: float
    S2: float
    chi1: float
    chi2: float
    S1_tail_bound: float
    S2_tail_bound: float


def _double_sum(numerator, denom_pow, nmax):
    """sum_{n=2}^{nmax} sum_{p=1}^{n-1} num(n,p) / (n^k p^k (n^2-p^2)^2), fsum per row."""
    total = []
    for n in range(2, nmax + 1):
        p = np.arange(1, n, dtype=float)
        nn = float(n)
        t = numerator(nn, p) / (nn**denom_pow * p**denom_pow * (nn * nn - p * p) ** 2)
        total.append(math.fsum(t))
    # add smallest rows first
    return math.fsum(reversed(total))


_lock = threading.Lock()


@lru_cache(maxsize=None)
def _constants(nmax):
    zeta4 = math.pi**4 / 90
    zeta6 = math.pi**6 / 945
    S1 = _double_sum(lambda n, p: n * n + p * p, 4, nmax)
    S2 = _double_sum(lambda n, p: n**4 + 8 * n * n * p * p + p**4, 6, nmax)
    # (n^2 - p^2)^2 >= n^2 for p < n, so the rows n > nmax are bounded by
    # 2 zeta(4) / n^4 and 10 zeta(6) / n^4; integral test on sum 1/n^4.
    tail4 = 1.0 / (3 * nmax**3)
    S1_tail = 2 * zeta4 * tail4
    S2_tail = 10 * zeta6 * tail4
    pi10, pi12 = math.pi**10, math.pi**12
    chi1 = S1 / (16 * pi10) + 1 / 23950080
    chi2 = (15871 / 326918592000 - S1 / (48 * pi10) + S2 / (32 * pi12)) / chi1
    return SeriesConstants(S1, S2, chi1, chi2, S1_tail, S2_tail)


def series_constants(nmax=SERIES_ROWS) -> SeriesConstants:
    """S1, S2, chi1, chi2 summed from their defining double series (cached)."""
    with _lock:
        return _constants(int(nmax))


def odd_power_sum(power, prefactor=8.0, nmax=200000):
    """prefactor * sum_{n odd} 1/(n pi)^power with an integral-test tail bound."""
    n = np.arange(1, nmax + 1, 2, dtype=float)
    value = math.fsum(reversed(prefactor / (n * math.pi) ** power))
    tail = prefactor / math.pi**power / (2 * (power - 1) * nmax ** (power - 1))
    return value, tail


def _require_lambda(species, limit=0.1):
    species.require_small_lambda(limit)


def _require_b0(B0):
    if B0 == 0:
        raise ValueError("B0 = 0: shift from transverse fields is undefined")


def linG_shift_1st(species, B0, G1, L):
    """First-order shift from a linear gradient, -gamma G1^2 L^2/(48 B0) (1 - 2 lam/15)."""
    _require_lambda(species)
    _require_b0(B0)
    return -species.gamma * G1**2 * L**2 / (48 * B0) * (1 - 2 * species.lam / 15)


def linG_relax_2nd(species, G1, L):
    """Second-order relaxation from a linear gradient, gamma^2 G1^2 L^4/(120 D) (1 - lam/3)."""
    _require_lambda(species)
    return species.gamma**2 * G1**2 * L**4 / (120 * species.D) * (1 - species.lam / 3)


def quadG_shift_1st(species, G2, L):
    """First-order shift from a quadratic gradient, -gamma G2 L^2/12 (1 - 2 lam/15)."""
    _require_lambda(species)
    return -species.gamma * G2 * L**2 / 12 * (1 - 2 * species.lam / 15)


def quadG_shift_3rd(species, G2, L, constants=None):
    """Third-order shift, gamma^3 G2^3 L^10 chi1 (1 + chi2 lam) / D^2."""
    _require_lambda(species)
    c = constants or series_constants()
    return (species.gamma**3 * G2**3 * L**10 / species.D**2) * c.chi1 * (1 + c.chi2 * species.lam)


def quadG_relax_2nd(species, G2, L):
    """Second-order relaxation, gamma^2 G2^2 L^6/(7560 D) (1 - 2 lam/15)."""
    _require_lambda(species)
    return species.gamma**2 * G2**2 * L**6 / (7560 * species.D) * (1 - 2 * species.lam / 15)


def cates_sphere_shift(species, B0, R, gradBx_sq, gradBy_sq):
    """Reference shift for a sphere of radius R, gamma R^2 (|grad Bx|^2 + |grad By|^2)/(10 B0)."""
    _require_b0(B0)
    return species.gamma * R**2 * (gradBx_sq + gradBy_sq) / (10 * B0)


def zheng_low_pressure_shift(species, omega0, L, gradBx_sq, gradBy_sq):
    """Low-pressure cube shift, 17 omega gamma^2 L^6 (|grad Bx|^2 + |grad By|^2)/(40320 D^2)."""
    return 17 * omega0 * species.gamma**2 * L**6 * (gradBx_sq + gradBy_sq) / (40320 * species.D**2)


def cube_high_pressure_shift(species, B0, L, gradBx_sq, gradBy_sq):
    """High-pressure cube shift gamma L^2 (|grad Bx|^2 + |grad By|^2)/(24 B0), magnitude form.

    For the linear gradient (|grad Bx|^2 = |grad By|^2 = G1^2/4) this is
    gamma G1^2 L^2/(48 B0), the lambda = 0 magnitude of ``linG_shift_1st``.
    """
    _require_b0(B0)
    return species.gamma * L**2 * (gradBx_sq + gradBy_sq) / (24 * B0)
