"""Physical records shared by every solver: spin species, cell geometry,
regime checks."""

import math
from dataclasses import dataclass, field, replace

from .units import gamma_from_mhz_per_nt


class LambdaRangeError(ValueError):
    """Boundary parameter outside the range a small-lambda expansion allows."""


@dataclass(frozen=True)
class SpinSpecies:
    """One nuclear spin isotope.

    Attributes
    ----------
    gamma : float
        Gyromagnetic ratio, rad s^-1 nT^-1 (signed).
    D : float
        Diffusion constant, cm^2/s.
    Gamma20, Gamma10 : float
        Bulk transverse / longitudinal relaxation rates, 1/s.
    Rp : float
        Spin-exchange pumping rate R'_p, 1/s.
    lam : float
        Dimensionless wall depolarization strength lambda.
    """

    name: str
    gamma: float
    D: float
    Gamma20: float = 0.0
    Gamma10: float = 0.0
    Rp: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        if not self.D > 0:
            raise ValueError(f"diffusion constant must be positive, got {self.D}")
        for name in ("Gamma20", "Gamma10", "Rp", "lam"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def Gamma2c(self):
        return self.Gamma20 + self.Rp

    @property
    def Gamma1c(self):
        return self.Gamma10 + self.Rp

    def require_small_lambda(self, limit=1.0):
        if self.lam >= limit:
            raise LambdaRangeError(
                f"{self.name}: lambda={self.lam} >= {limit}; small-lambda expansion invalid"
            )

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class CellGeometry:
    """Cube [-L/2, L/2]^3 centred on the origin."""

    L: float

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"cell side must be positive, got {self.L}")

    @property
    def half(self):
        return self.L / 2

    @property
    def volume(self):
        return self.L**3

    def contains(self, point, tol=1e-12):
        return all(abs(c) <= self.half * (1 + tol) for c in point)


GAMMA_129XE = -gamma_from_mhz_per_nt(11.860156)
GAMMA_131XE = gamma_from_mhz_per_nt(3.515769)

XE129 = SpinSpecies("129Xe", gamma=GAMMA_129XE, D=0.45, lam=5.3e-3)
XE131 = SpinSpecies("131Xe", gamma=GAMMA_131XE, D=0.45, lam=13.0e-3)


def lambda_from_depolarization(L, mean_free_path, xi):
    """Wall parameter from the per-collision depolarization probability.

    lambda = 3 L xi / (4 lambda_T); only meaningful for xi << 1, so xi >= 0.1
    is rejected.
    """
    if mean_free_path <= 0:
        raise ValueError("mean free path must be positive")
    if xi < 0:
        raise ValueError("depolarization probability must be nonnegative")
    if xi >= 0.1:
        raise LambdaRangeError(f"xi={xi} is not small; linear relation does not hold")
    return 3.0 * L * xi / (4.0 * mean_free_path)


@dataclass(frozen=True)
class ValidityReport:
    high_pressure: float
    fast_diffusion: float
    perturbation_smallness: float
    flags: tuple = field(default_factory=tuple)

    @property
    def ok(self):
        return not self.flags


def validity_report(species, geometry, field_model, *, high_pressure_min=10.0,
                    fast_diffusion_min=10.0, smallness_max=1.0, T2=None):
    """Regime checks for the perturbative, rotating-frame treatment.

    ``T2`` defaults to 1/(Gamma2c + 6 lambda D/L^2); infinite when both vanish.
    """
    L, D = geometry.L, species.D
    hp = abs(species.gamma) * abs(field_model.B0) * L**2 / D
    if T2 is None:
        rate = species.Gamma2c + 6.0 * species.lam * D / L**2
        T2 = math.inf if rate == 0 else 1.0 / rate
    fd = math.inf if math.isinf(T2) else D * T2 / L**2
    try:
        bmax = field_model.max_abs(L)["bz1"]
    except Exception:
        bmax = math.nan
    small = abs(species.gamma) * bmax * L**2 / D

    flags = []
    if hp <= high_pressure_min:
        flags.append(f"high-pressure condition weak: gamma B0 L^2/D = {hp:.3g} <= {high_pressure_min}")
    if fd <= fast_diffusion_min:
        flags.append(f"fast-diffusion condition weak: D T2/L^2 = {fd:.3g} <= {fast_diffusion_min}")
    if small > smallness_max:
        flags.append(f"nonuniform field not perturbative: gamma max|B1| L^2/D = {small:.3g}")
    return ValidityReport(hp, fd, small, tuple(flags))
