"""Time-domain oracle: propagate the mode-space equations and fit the FID.

Rotating-wave system (rotating frame at the Larmor frequency -gamma B0):

    dc+/dt = -(D kappa^2 + Gamma2c) c+ - i gamma b c+       (b or b_tot)

Full system in the lab frame, with Mz kept and no rotating-wave step:

    dc+/dt = -(D kappa^2 + Gamma2c + i gamma B0) c+ - i gamma b c+ + i gamma b+ cz
    dcz/dt = -(D kappa^2 + Gamma1c) cz - gamma Im(b- c+) + Rp d_z

Both are linear with constant coefficients, so the default propagator is
the matrix exponential over one output step; an adaptive Runge-Kutta path
is kept for cross-checks. The full system is not complex-linear (it mixes
c+ and its conjugate), so it is propagated in the real variables
(Re c+, Im c+, cz) with an extra constant component for the source.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.optimize import least_squares

from .coupling import mode_integrals
from .perturbation import mode_space_generator


class IntegrationError(RuntimeError):
    pass


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModeState:
    c_plus: np.ndarray
    c_z: Optional[np.ndarray]
    t: float


@dataclass
class Trajectory:
    """Sampled solution; iterating yields ModeState records."""

    times: np.ndarray
    c_plus: np.ndarray  # [n_t, M]
    c_z: Optional[np.ndarray]  # [n_t, M] or None
    frame: str = "rotating"

    def __len__(self):
        return len(self.times)

    def __getitem__(self, k):
        cz = None if self.c_z is None else self.c_z[k]
        return ModeState(self.c_plus[k], cz, float(self.times[k]))

    def __iter__(self):
        return (self[k] for k in range(len(self)))


@dataclass(frozen=True)
class FidTrace:
    times: np.ndarray
    signal: np.ndarray
    frame: str = "rotating"
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FidFit:
    omega: float  # rad/s, in the trace's frame
    gamma2: float  # 1/s
    amplitude: complex
    residual_rms: float  # relative to |amplitude|
    transient_discard: float  # s


def uniform_tip(basis, modes, amplitude=1.0):
    """c+(0) = amplitude * int phi_a, cz(0) = 0 (uniform transverse tip)."""
    w = mode_integrals(basis, modes)
    return ModeState(amplitude * w.astype(complex), np.zeros(len(w)), 0.0)


def _output_times(t_end, dt_out):
    if dt_out <= 0 or t_end <= 0:
        raise ValueError("t_end and dt_out must be positive")
    n = int(round(t_end / dt_out))
    return np.arange(n + 1) * dt_out


def _step_propagate(P, y0, n):
    out = np.empty((n + 1, len(y0)), dtype=np.result_type(P, y0))
    out[0] = y0
    y = y0
    for k in range(1, n + 1):
        y = P @ y
        out[k] = y
    if not np.all(np.isfinite(out)):
        raise IntegrationError("non-finite state encountered during propagation")
    return out


def _adaptive(fun, y0, times, rtol, atol, max_step=np.inf):
    sol = solve_ivp(fun, (times[0], times[-1]), y0, method="DOP853", t_eval=times,
                    rtol=rtol, atol=atol, max_step=max_step)
    if not sol.success:
        raise IntegrationError(f"adaptive integrator failed: {sol.message}")
    return sol.y.T


def integrate_rwa(basis, coupling, species, B0, initial: ModeState, t_end, dt_out, *,
                  dressed=True, frame="rotating", method="expm", rtol=1e-10, atol=1e-14):
    """Rotating-wave mode-space evolution sampled every ``dt_out``.

    ``dressed`` selects b_tot (falls back to b when unavailable); the lab
    frame adds -i gamma B0 to every mode.
    """
    if frame not in ("rotating", "lab"):
        raise ValueError("frame must be 'rotating' or 'lab'")
    A = mode_space_generator(basis, coupling, species, B0 if frame == "lab" else 0.0,
                             use_b_tot=dressed)
    times = _output_times(t_end, dt_out)
    c0 = np.asarray(initial.c_plus, dtype=complex)
    if method == "expm":
        cp = _step_propagate(expm(-A * dt_out), c0, len(times) - 1)
    elif method == "adaptive":
        cp = _adaptive(lambda t, c: -A @ c, c0, times, rtol, atol)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Trajectory(times + initial.t, cp, None, frame)


def full_generator(basis, coupling, species, B0, Sz_source=None):
    """Real generator G with dy/dt = G y, y = (Re c+, Im c+, cz, 1)."""
    M = coupling.size
    ksq = basis.kappa_sq_of(coupling.modes)
    g = species.gamma
    K2 = np.diag(species.D * ksq + species.Gamma2c)
    K1 = np.diag(species.D * ksq + species.Gamma1c)
    Bz = B0 * np.eye(M) + coupling.b
    P, Q = coupling.b_plus.real, coupling.b_plus.imag
    G = np.zeros((3 * M + 1, 3 * M + 1))
    u, v, z = slice(0, M), slice(M, 2 * M), slice(2 * M, 3 * M)
    G[u, u] = -K2
    G[u, v] = g * Bz
    G[u, z] = -g * Q
    G[v, u] = -g * Bz
    G[v, v] = -K2
    G[v, z] = g * P
    G[z, u] = g * Q
    G[z, v] = -g * P
    G[z, z] = -K1
    if Sz_source is not None:
        G[z, -1] = species.Rp * np.asarray(Sz_source, dtype=float)
    return G


def full_system_eigenvalue(basis, coupling, species, B0):
    """Lab-frame s0 of the full generator, comparable with the RWA s0.

    The co-rotating eigenvector (largest weight on c+ of mode 0) has
    M+ ~ exp(-s t), so the lab precession frequency is -Im s.
    """
    M = coupling.size
    G = full_generator(basis, coupling, species, B0)[:-1, :-1]
    w, V = np.linalg.eig(G)
    corot = np.abs(V[0] + 1j * V[M]) / np.linalg.norm(V, axis=0)
    return complex(-w[int(np.argmax(corot))])


def integrate_full(basis, coupling, species, B0, Sz_profile, initial: ModeState, t_end,
                   dt_out, *, method="expm", rtol=1e-10, atol=1e-14, max_step=None):
    """Lab-frame evolution of (c+, cz) without the rotating-wave step.

    ``Sz_profile`` is the source overlap vector d_z (or None). The adaptive
    path caps the internal step at 1/(20 |gamma B0|) and fails loudly if the
    step collapses.
    """
    M = coupling.size
    if Sz_profile is None and coupling.d_z is not None:
        Sz_profile = coupling.d_z
    G = full_generator(basis, coupling, species, B0, Sz_profile)
    c0 = np.asarray(initial.c_plus, dtype=complex)
    cz0 = np.zeros(M) if initial.c_z is None else np.asarray(initial.c_z, dtype=float)
    y0 = np.concatenate([c0.real, c0.imag, cz0, [1.0]])
    times = _output_times(t_end, dt_out)
    if method == "expm":
        Y = _step_propagate(expm(G * dt_out), y0, len(times) - 1)
    elif method == "adaptive":
        larmor = abs(species.gamma * B0)
        cap = max_step or (1.0 / (20 * larmor) if larmor > 0 else np.inf)
        Y = _adaptive(lambda t, y: G @ y, y0, times, rtol, atol, max_step=cap)
    else:
        raise ValueError(f"unknown method {method!r}")
    cp = Y[:, :M] + 1j * Y[:, M:2 * M]
    return Trajectory(times + initial.t, cp, Y[:, 2 * M:3 * M], "lab")


def synthesize_fid(trajectory: Trajectory, basis, modes, meta=None):
    """Cell-integrated M+ = sum_a c+_a int phi_a."""
    w = mode_integrals(basis, modes)
    info = {"L": basis.L}
    info.update(meta or {})
    return FidTrace(trajectory.times, trajectory.c_plus @ w, trajectory.frame, info)


def default_discard(L, D):
    """Five lifetimes of the slowest excited mode, 5 L^2 / (pi^2 D)."""
    return 5 * L**2 / (math.pi**2 * D)


def _fft_peak(t, y):
    n = len(y)
    dt = t[1] - t[0]
    pad = 1 << int(math.ceil(math.log2(8 * n)))
    spec = np.abs(np.fft.fft(y, pad))
    freqs = np.fft.fftfreq(pad, dt) * 2 * math.pi
    k = int(np.argmax(spec))
    # parabolic refinement on the log spectrum
    if 0 < k < pad - 1:
        a, b, c = np.log(spec[k - 1:k + 2] + 1e-300)
        den = a - 2 * b + c
        off = 0.5 * (a - c) / den if den != 0 else 0.0
    else:
        off = 0.0
    return freqs[k] + off * (freqs[1] - freqs[0])


def fit_fid(trace: FidTrace, transient_discard=None, *, max_residual=1e-6, min_lifetimes=10.0):
    """Least-squares fit of a exp((-Gamma + i omega) t) to a complex trace.

    The default discard is 5 L^2/(pi^2 D) when the trace carries L and D in
    its meta, otherwise 0. Raises FitError when the relative RMS residual
    exceeds ``max_residual`` (leftover excited modes beating).
    """
    if transient_discard is None:
        m = trace.meta
        transient_discard = default_discard(m["L"], m["D"]) if "D" in m and "L" in m else 0.0
    t_all = np.asarray(trace.times, dtype=float)
    keep = t_all >= t_all[0] + transient_discard - 1e-12
    t, y = t_all[keep], np.asarray(trace.signal, dtype=complex)[keep]
    if len(t) < 8:
        raise FitError("fewer than 8 samples left after transient discard")
    t0 = t[0]
    tau = t - t0

    omega0 = _fft_peak(tau, y * 1.0)
    mag = np.abs(y)
    good = mag > mag.max() * 1e-8
    slope = np.polyfit(tau[good], np.log(mag[good]), 1)[0]
    gamma0 = max(-slope, 0.0)
    basis_fn = np.exp((-gamma0 + 1j * omega0) * tau)
    a0 = np.vdot(basis_fn, y) / np.vdot(basis_fn, basis_fn)

    scale = max(abs(a0), 1e-300)

    def resid(p):
        a = (p[0] + 1j * p[1]) * scale
        r = (y - a * np.exp((-p[2] + 1j * p[3]) * tau)) / scale
        return np.concatenate([r.real, r.imag])

    p0 = np.array([a0.real / scale, a0.imag / scale, gamma0, omega0])
    sol = least_squares(resid, p0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                        x_scale="jac", max_nfev=2000)
    if not np.all(np.isfinite(sol.x)):
        raise FitError("FID fit diverged")
    a = (sol.x[0] + 1j * sol.x[1]) * scale
    gamma2, omega = float(sol.x[2]), float(sol.x[3])
    rms = float(np.sqrt(np.mean(np.abs(y - a * np.exp((-gamma2 + 1j * omega) * tau)) ** 2)) / abs(a))

    if gamma2 > 0 and tau[-1] * gamma2 < min_lifetimes:
        warnings.warn(f"trace covers {tau[-1] * gamma2:.2g} decay times after discard; "
                      f"{min_lifetimes:g} recommended")
    if rms > max_residual:
        hint = ""
        if "D" in trace.meta and "L" in trace.meta:
            hint = f" (excited modes decay within ~{default_discard(trace.meta['L'], trace.meta['D']):.3g} s)"
        raise FitError(f"relative residual {rms:.3g} > {max_residual:g}: multi-mode beating; "
                       f"increase transient_discard{hint}")
    # report amplitude at t = 0 of the original time axis
    amp = complex(a * np.exp(-(-gamma2 + 1j * omega) * t0))
    return FidFit(omega, gamma2, amp, rms, float(transient_discard))


def simulate_fid(basis, coupling, species, B0, t_end, dt_out, *, system="rwa", dressed=True,
                 frame="rotating", method="expm", initial=None):
    """Convenience wrapper: uniform tip, propagate, integrate over the cell."""
    initial = initial or uniform_tip(basis, coupling.modes)
    if system == "rwa":
        traj = integrate_rwa(basis, coupling, species, B0, initial, t_end, dt_out,
                             dressed=dressed, frame=frame, method=method)
    elif system == "full":
        traj = integrate_full(basis, coupling, species, B0, coupling.d_z, initial, t_end, dt_out,
                              method=method)
    else:
        raise ValueError("system must be 'rwa' or 'full'")
    return synthesize_fid(traj, basis, coupling.modes, {"D": species.D})
