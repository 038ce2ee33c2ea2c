"""Fit 1/T2(T) to spin-exchange plus Arrhenius wall relaxation,

    1/T2 = c1 n_Rb(T) + c2 exp(Ebar / k_B T),

and convert the wall part to the boundary parameter via Gamma_w = 6 lambda D / L^2.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import least_squares
from scipy.stats import norm

from .rb_vapor import rb_density
from .units import K_B_MEV, celsius_to_kelvin


class WallFitError(RuntimeError):
    pass


T_WINDOW = (300.0, 500.0)


@dataclass(frozen=True)
class T2Dataset:
    """Measured transverse relaxation rates versus cell temperature (K)."""

    T: np.ndarray
    inv_T2: np.ndarray
    sigma: np.ndarray
    species: str = ""

    def __post_init__(self):
        T = np.asarray(self.T, dtype=float)
        y = np.asarray(self.inv_T2, dtype=float)
        s = np.asarray(self.sigma, dtype=float)
        if not (T.shape == y.shape == s.shape) or T.ndim != 1:
            raise ValueError("T, inv_T2 and sigma must be 1-D arrays of equal length")
        if np.any(T < T_WINDOW[0]) or np.any(T > T_WINDOW[1]):
            raise ValueError(f"temperatures must lie in {T_WINDOW} K; got {T.min()}-{T.max()}")
        if np.any(s <= 0):
            raise ValueError("uncertainties must be positive")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "inv_T2", y)
        object.__setattr__(self, "sigma", s)

    @classmethod
    def from_celsius(cls, T_C, inv_T2, sigma, species=""):
        return cls(celsius_to_kelvin(np.asarray(T_C, dtype=float)), inv_T2, sigma, species)

    def __len__(self):
        return len(self.T)


def wall_rate(T, c2, Ebar):
    """Gamma_w = c2 exp(Ebar / k_B T), Ebar in meV."""
    return c2 * np.exp(Ebar / (K_B_MEV * np.asarray(T, dtype=float)))


def t2_model(T, c1, c2, Ebar, density=rb_density):
    return c1 * density(T) + wall_rate(T, c2, Ebar)


def lambda_from_gamma_w(Gamma_w, D, L):
    """lambda = Gamma_w L^2 / (6 D)."""
    if not (D > 0 and L > 0):
        raise ValueError("D and L must be positive")
    return Gamma_w * L**2 / (6.0 * D)


@dataclass(frozen=True)
class WallFitResult:
    c1: float  # cm^3/s
    c2: float  # 1/s
    Ebar: float  # meV
    covariance: np.ndarray  # 3x3 over (c1, c2, Ebar)
    chi2: float
    dof: int
    species: str = ""
    L: Optional[float] = None
    D: Optional[float] = None
    T_ref: float = 383.15
    meta: dict = field(default_factory=dict)

    @property
    def params(self):
        return np.array([self.c1, self.c2, self.Ebar])

    @property
    def stderr(self):
        return np.sqrt(np.diag(self.covariance))

    @property
    def log_covariance(self):
        """Covariance over (c1, ln c2, Ebar), the fitted parameterization."""
        T = np.diag([1.0, 1.0 / self.c2, 1.0])
        return T @ self.covariance @ T

    def zscores(self, truth):
        """(p - truth) / sigma, with c2 compared on a log scale."""
        c1, c2, E = truth
        e = np.sqrt(np.diag(self.log_covariance))
        d = np.array([self.c1 - c1, math.log(self.c2 / c2), self.Ebar - E])
        return d / e

    def confidence_intervals(self, level=0.95):
        """Symmetric for c1 and Ebar; log-symmetric for c2."""
        z = norm.ppf(0.5 + level / 2)
        e = np.sqrt(np.diag(self.log_covariance))
        return {
            "c1": (self.c1 - z * e[0], self.c1 + z * e[0]),
            "c2": (self.c2 * math.exp(-z * e[1]), self.c2 * math.exp(z * e[1])),
            "Ebar": (self.Ebar - z * e[2], self.Ebar + z * e[2]),
        }

    def Gamma_w(self, T):
        return wall_rate(T, self.c2, self.Ebar)

    def Gamma_collision(self, T):
        return self.c1 * rb_density(T)

    def Gamma_w_with_error(self, T):
        g = float(self.Gamma_w(T))
        grad = np.array([0.0, g / self.c2, g / (K_B_MEV * T)])
        return g, float(math.sqrt(grad @ self.covariance @ grad))

    def lambda_at(self, T=None, D=None, L=None):
        """(lambda, sigma_lambda) from Gamma_w at T with first-order propagation."""
        T = self.T_ref if T is None else T
        D = self.D if D is None else D
        L = self.L if L is None else L
        if D is None or L is None:
            raise ValueError("need D and L to convert the wall rate to lambda")
        g, sg = self.Gamma_w_with_error(T)
        return lambda_from_gamma_w(g, D, L), lambda_from_gamma_w(sg, D, L)

    @property
    def p_value(self):
        from scipy.stats import chi2 as chi2_dist
        return float(chi2_dist.sf(self.chi2, self.dof)) if self.dof > 0 else math.nan

    def as_dict(self):
        ci = self.confidence_intervals()
        out = {
            "species": self.species,
            "c1_cm3_per_s": self.c1, "c1_ci95": [float(v) for v in ci["c1"]],
            "c2_per_s": self.c2, "c2_ci95": [float(v) for v in ci["c2"]],
            "Ebar_meV": self.Ebar, "Ebar_ci95": [float(v) for v in ci["Ebar"]],
            "covariance": self.covariance.tolist(),
            "chi2": self.chi2, "dof": self.dof,
            "T_ref_K": self.T_ref,
        }
        g, sg = self.Gamma_w_with_error(self.T_ref)
        out["Gamma_w_per_s"], out["Gamma_w_err"] = g, sg
        if self.D is not None and self.L is not None:
            lam, slam = self.lambda_at()
            out["lambda"], out["lambda_err"] = lam, slam
        return out


def _initial_guess(data, density):
    """Log-linear fits of the two asymptotic branches."""
    order = np.argsort(data.T)
    T, y = data.T[order], data.inv_T2[order]
    n = density(T)
    k = max(3, len(T) // 3)
    # cold end: wall dominated, ln y = ln c2 + Ebar / (k_B T)
    slope, icpt = np.polyfit(1.0 / (K_B_MEV * T[:k]), np.log(y[:k]), 1)
    Ebar = max(slope, 1.0)
    c2 = math.exp(icpt)
    # hot end: remainder over density
    rest = y - wall_rate(T, c2, Ebar)
    w = 1.0 / data.sigma[order] ** 2
    c1 = float(np.sum(w * rest * n) / np.sum(w * n * n))
    if c1 <= 0:
        c1 = float(y[-1] / n[-1]) * 0.5
    return np.array([c1, c2, Ebar])


def fit_t2_model(data: T2Dataset, *, L=None, D=None, T_ref=383.15, density=rb_density,
                 initial=None, absolute_sigma=True):
    """Weighted Levenberg-Marquardt fit of (c1, c2, Ebar).

    Weights are 1/sigma^2. Internally the prefactor is fitted as ln c2
    (it multiplies an exponential, so c2 itself is far from normally
    distributed) and c1, Ebar are rescaled by their initial values so the
    damping is independent of units. Covariance uses the given sigmas as
    absolute unless ``absolute_sigma`` is False.
    """
    if len(data) < 5:
        raise WallFitError(f"need at least 5 points, got {len(data)}")
    if np.ptp(data.T) < 30:
        raise WallFitError(f"temperatures span {np.ptp(data.T):.1f} K; need at least 30 K")
    n = density(data.T)
    p0 = np.asarray(initial, dtype=float) if initial is not None else _initial_guess(data, density)
    if p0[1] <= 0:
        raise WallFitError("initial c2 must be positive")
    q0 = np.array([p0[0], math.log(p0[1]), p0[2]])
    scale = np.array([abs(q0[0]) or 1.0, 1.0, abs(q0[2]) or 1.0])

    def unpack(x):
        c1, lnc2, E = x * scale
        return c1, lnc2, E

    def resid(x):
        c1, lnc2, E = unpack(x)
        w = np.exp(lnc2 + E / (K_B_MEV * data.T))
        return (c1 * n + w - data.inv_T2) / data.sigma

    def jac(x):
        c1, lnc2, E = unpack(x)
        w = np.exp(lnc2 + E / (K_B_MEV * data.T))
        J = np.column_stack([n, w, w / (K_B_MEV * data.T)]) / data.sigma[:, None]
        return J * scale

    sol = least_squares(resid, q0 / scale, jac=jac, method="lm", xtol=1e-14, ftol=1e-14,
                        gtol=1e-14, max_nfev=5000)
    if not sol.success:
        raise WallFitError(f"fit did not converge: {sol.message}")
    c1, lnc2, E = unpack(sol.x)
    if c1 <= 0 or E <= 0:
        raise WallFitError(f"non-physical optimum c1={c1:.3g}, Ebar={E:.3g}; "
                           "check the data span both relaxation branches")
    Jq = sol.jac / scale  # d resid / d (c1, ln c2, Ebar)
    try:
        cov_q = np.linalg.inv(Jq.T @ Jq)
    except np.linalg.LinAlgError as exc:
        raise WallFitError("singular normal matrix; parameters not identifiable") from exc
    chi2 = float(np.sum(sol.fun**2))
    dof = len(data) - 3
    if not absolute_sigma and dof > 0:
        cov_q = cov_q * chi2 / dof
    c2 = math.exp(lnc2)
    T = np.diag([1.0, c2, 1.0])
    cov = T @ cov_q @ T
    return WallFitResult(float(c1), float(c2), float(E), cov, chi2, dof, data.species,
                         L, D, T_ref, {"nfev": sol.nfev, "initial": p0.tolist(),
                                       "log_covariance": cov_q})


# Published fit results for the two xenon isotopes (8 mm cube), with 95 %
# half-widths. Gamma_w is the tabulated wall rate at 110 C; recomputing it
# from the rounded c2 and Ebar gives 0.02212 1/s for 129Xe.
TABLE_129XE = {"c1": 1.343e-15, "c2": 1.23e-3, "Ebar": 95.4, "Gamma_w": 0.0222,
               "c1_ci": 0.021e-15, "c2_ci": 0.34e-3, "Ebar_ci": 8.6, "Gamma_w_ci": 0.0084}
TABLE_131XE = {"c1": 0.382e-15, "c2": 0.363e-3, "Ebar": 165.6, "Gamma_w": 0.055,
               "c1_ci": 0.028e-15, "c2_ci": 0.075e-3, "Ebar_ci": 6.4, "Gamma_w_ci": 0.015}


def synthetic_dataset(c1, c2, Ebar, T, rel_noise=0.02, seed=0, species="", density=rb_density):
    """Model curve plus Gaussian noise with sigma = rel_noise * value."""
    T = np.asarray(T, dtype=float)
    y0 = t2_model(T, c1, c2, Ebar, density)
    sigma = rel_noise * y0
    rng = np.random.default_rng(seed)
    y = y0 + (rng.standard_normal(len(T)) * sigma if rel_noise > 0 else 0.0)
    if rel_noise == 0:
        sigma = np.full(len(T), 1e-3) * y0
    return T2Dataset(T, y, sigma, species)
