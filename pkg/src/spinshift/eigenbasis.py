"""Robin-boundary eigenmodes of the Laplacian on the cube.

One axis first: phi'' = -kappa^2 phi on [-L/2, L/2] with
n.grad(phi) + (lambda/L) phi = 0 at both ends. The solutions are

    phi_p(z) = sin(kappa_p z + delta_p) / N_p,   delta_p = (p + 1) pi / 2,

with kappa_p L the p-th nonnegative root of

    tan(x) = 2 lambda x / (x^2 - lambda^2).

Multiplying out, (x^2 - lambda^2) sin x - 2 lambda x cos x
= 2 [x sin(x/2) - lambda cos(x/2)] [x cos(x/2) + lambda sin(x/2)],
so even modes are roots of the first factor and odd modes of the second.
Each factor has exactly one root in (p pi, (p+1) pi) for lambda > 0, which
gives a pole-free bracket per mode.

The 3-D modes are tensor products phi_m(x) phi_n(y) phi_p(z).
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .domain import LambdaRangeError


class RootBracketError(RuntimeError):
    pass


@dataclass(frozen=True)
class AxisMode:
    p: int
    kappa: float  # 1/cm
    delta: float  # rad
    norm: float  # cm^(1/2)

    def __call__(self, z):
        return np.sin(self.kappa * np.asarray(z) + self.delta) / self.norm

    def derivative(self, z):
        return self.kappa * np.cos(self.kappa * np.asarray(z) + self.delta) / self.norm


def transcendental_residual(x, lam):
    """Scaled |(x^2 - lam^2) sin x - 2 lam x cos x| for x = kappa L."""
    if x == 0 and lam == 0:
        return 0.0
    f = (x * x - lam * lam) * math.sin(x) - 2 * lam * x * math.cos(x)
    return abs(f) / ((x * x + lam * lam) * max(1.0, x))


def _branch(p, lam):
    if p % 2 == 0:
        return lambda x: x * math.sin(x / 2) - lam * math.cos(x / 2)
    return lambda x: x * math.cos(x / 2) + lam * math.sin(x / 2)


def _branch_prime(p, lam):
    if p % 2 == 0:
        return lambda x: (1 + lam / 2) * math.sin(x / 2) + x / 2 * math.cos(x / 2)
    return lambda x: (1 + lam / 2) * math.cos(x / 2) - x / 2 * math.sin(x / 2)


def axis_norm(L, kappa, p):
    """N_p = sqrt(L/2 + (-1)^p sin(kappa L) / (2 kappa)).

    Equal to sqrt(L/2 + lam L/(kappa^2 L^2 + lam^2)) on the eigenvalue
    branch; this form stays finite as kappa -> 0.
    """
    x = kappa * L
    sinc = float(np.sinc(x / math.pi))
    return math.sqrt(L / 2 * (1 + (-1) ** p * sinc))


def solve_root(p, lam):
    """kappa_p L for mode p. Exact Neumann values when lam == 0."""
    if lam == 0:
        return p * math.pi
    if lam < 1e-12:
        # below this the endpoint value f(p pi) ~ lam drowns in the rounding of
        # sin/cos at p pi; the leading asymptotics are exact to O(lam^2)
        if p == 0:
            return math.sqrt(2 * lam) * (1 - lam / 12)
        return p * math.pi + 2 * lam / (p * math.pi)
    lo, hi = p * math.pi, (p + 1) * math.pi
    f = _branch(p, lam)
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if flo * fhi > 0:
        raise RootBracketError(
            f"no sign change for p={p}, lambda={lam}: f({lo:.6g})={flo:.3g}, f({hi:.6g})={fhi:.3g}"
        )
    x = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    # one Newton step on the smooth branch factor, kept only if it helps
    fp = _branch_prime(p, lam)
    d = fp(x)
    if d != 0:
        xn = x - f(x) / d
        if lo < xn < hi and abs(f(xn)) <= abs(f(x)):
            x = xn
    return x


def solve_axis_modes(L, lam, N):
    """First N one-dimensional Robin modes for side L and wall parameter lam."""
    if N < 1:
        raise ValueError("need at least one mode")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    modes = []
    for p in range(N):
        x = solve_root(p, lam)
        kappa = x / L
        modes.append(AxisMode(p, kappa, (p + 1) * math.pi / 2, axis_norm(L, kappa, p)))
    return modes


def approx_kappa(L, lam, p):
    if p == 0:
        return math.sqrt(2 * lam) / L
    return p * math.pi / L + 2 * lam / (p * math.pi * L)


def approx_axis_modes(L, lam, N):
    """Small-lambda closed forms for kappa_p; for cross-checks only."""
    if lam >= 0.1:
        raise LambdaRangeError(f"approximate modes need lambda < 0.1, got {lam}")
    modes = []
    for p in range(N):
        kappa = approx_kappa(L, lam, p)
        modes.append(AxisMode(p, kappa, (p + 1) * math.pi / 2, axis_norm(L, kappa, p)))
    return modes


def approx_phi0(z, L, lam):
    """Fundamental 1-D mode to first order in lambda."""
    z = np.asarray(z, dtype=float)
    return (1 - lam * z**2 / L**2) / math.sqrt(L * (1 - lam / 6 + lam**2 / 80))


class EigenBasis:
    """Tensor-product basis with N modes per axis (same lambda on every wall)."""

    def __init__(self, L, lam, N):
        self.L = float(L)
        self.lam = float(lam)
        self.N = int(N)
        self.axis_modes = tuple(solve_axis_modes(self.L, self.lam, self.N))
        self.kappa = np.array([m.kappa for m in self.axis_modes])
        self.delta = np.array([m.delta for m in self.axis_modes])
        self.norm = np.array([m.norm for m in self.axis_modes])

    @classmethod
    def for_species(cls, species, geometry, N):
        return cls(geometry.L, species.lam, N)

    def __repr__(self):
        return f"EigenBasis(L={self.L}, lam={self.lam}, N={self.N})"

    def kappa_sq(self, alpha):
        m, n, p = alpha
        return self.kappa[m] ** 2 + self.kappa[n] ** 2 + self.kappa[p] ** 2

    def kappa_sq_of(self, modes):
        modes = np.asarray(modes, dtype=int).reshape(-1, 3)
        return (self.kappa[modes] ** 2).sum(axis=1)

    def phi(self, p, z):
        return np.sin(self.kappa[p] * np.asarray(z, dtype=float) + self.delta[p]) / self.norm[p]

    def phi_table(self, z):
        """Array [p, len(z)] of all axis modes at the points z."""
        z = np.asarray(z, dtype=float)
        return np.sin(np.outer(self.kappa, z) + self.delta[:, None]) / self.norm[:, None]

    def all_modes(self):
        r = range(self.N)
        return np.array([(m, n, p) for m in r for n in r for p in r], dtype=int)


def evaluate_mode(basis: EigenBasis, alpha: Sequence[int], point):
    """phi_m(x) phi_n(y) phi_p(z) at a point inside the cell."""
    x, y, z = (float(c) for c in point)
    h = basis.L / 2
    if max(abs(x), abs(y), abs(z)) > h * (1 + 1e-12):
        raise ValueError(f"point {point} lies outside the cell [-{h}, {h}]^3")
    m, n, p = alpha
    return float(basis.phi(m, x) * basis.phi(n, y) * basis.phi(p, z))


def fundamental_wall_rate(species, geometry):
    """D kappa_000^2 from the exact roots (1/s)."""
    if species.lam == 0:
        return 0.0
    x0 = solve_root(0, species.lam)
    return 3 * species.D * (x0 / geometry.L) ** 2


def fundamental_wall_rate_approx(species, geometry):
    """Small-lambda companion value 6 lambda D / L^2."""
    return 6 * species.lam * species.D / geometry.L**2
