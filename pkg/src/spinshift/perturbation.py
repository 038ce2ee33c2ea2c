"""Fundamental-mode eigenvalue to third order, and an exact-diagonalization
check of the same truncated operator.

The transverse equation in mode space reads dc/dt = -A c with

    A = diag(D kappa_a^2 + Gamma2c + i gamma B0) + i gamma b,

and s0 is the eigenvalue of A continuously connected to mode 0. Its
Rayleigh-Schrodinger expansion (A is complex symmetric, not Hermitian):

    s0 = a0 + i g b00 + g^2 sum b0a ba0 / Da
         - i g^3 sum b0a bab bb0 / (Da Db) + i g^3 b00 sum b0a ba0 / Da^2

with Da = D (kappa_a^2 - kappa_0^2). Observed angular frequency is
omega = -Im s, so a purely imaginary correction s_k gives a shift i s_k.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .coupling import assemble_couplings
from .domain import CellGeometry, ValidityReport, validity_report
from .eigenbasis import EigenBasis


class PerturbationError(RuntimeError):
    pass


def _csum(values):
    """Correctly rounded sum of complex values (order independent)."""
    v = np.ravel(np.asarray(values, dtype=complex))
    return complex(math.fsum(v.real), math.fsum(v.imag))


@dataclass(frozen=True)
class EigenvalueReport:
    s0: tuple  # (order0, order1, order2, order3), complex, 1/s
    s3a: complex
    s3b: complex
    truncation_error: float
    n_modes: int
    coupling_choice: tuple  # matrix used for (1st, 2nd/3rd) order: "b" or "b_tot"
    validity: Optional[ValidityReport] = None

    @property
    def total(self):
        return sum(self.s0)

    @property
    def frequency_shift(self):
        """Per-order angular frequency shift -Im s_k (rad/s); order 0 is -gamma B0."""
        return tuple(-s.imag for s in self.s0)

    @property
    def relaxation(self):
        """Per-order decay rate Re s_k (1/s)."""
        return tuple(s.real for s in self.s0)

    @property
    def shift(self):
        """Total frequency shift away from -gamma B0 (orders 1-3)."""
        return -sum(s.imag for s in self.s0[1:])


def _choose(coupling, use_b_tot):
    has_tot = coupling.b_tot is not None
    b = coupling.b.astype(complex)
    if use_b_tot in (False, "none") or not has_tot:
        return b, b, ("b", "b")
    if use_b_tot in (True, "all"):
        return coupling.b_tot, coupling.b_tot, ("b_tot", "b_tot")
    if use_b_tot == "auto":
        longitudinal = np.any(coupling.b[0, 1:] != 0)
        if longitudinal:
            return coupling.b_tot, b, ("b_tot", "b")
        return coupling.b_tot, coupling.b_tot, ("b_tot", "b_tot")
    raise ValueError(f"use_b_tot must be 'auto', 'all', 'none' or a bool, got {use_b_tot!r}")


def eigenvalue_corrections(basis: EigenBasis, coupling, species, B0, use_b_tot="auto",
                           field_model=None):
    """Orders 0-3 of the fundamental eigenvalue s0.

    ``use_b_tot``: "auto" (default) dresses the first order with the
    transverse field and keeps plain b for orders 2-3 whenever b couples
    mode 0 to anything; "all" dresses every order; "none" never dresses.
    """
    modes = coupling.modes
    if tuple(modes[0]) != (0, 0, 0):
        raise PerturbationError("mode set must start with the fundamental mode")
    ksq = basis.kappa_sq_of(modes)
    g, D = species.gamma, species.D
    delta = D * (ksq[1:] - ksq[0])
    if np.any(delta <= 0):
        raise PerturbationError("kappa_a^2 <= kappa_0^2 for an excited mode; basis is invalid")

    B1, B2, choice = _choose(coupling, use_b_tot)

    s0 = D * ksq[0] + species.Gamma2c + 1j * g * B0
    s1 = 1j * g * B1[0, 0]

    row, col = B2[0, 1:], B2[1:, 0]
    t2 = row * col / delta
    s2 = g**2 * _csum(t2)

    u, v = row / delta, col / delta
    t3a = u[:, None] * B2[1:, 1:] * v[None, :]
    s3a = -1j * g**3 * _csum(t3a)
    t3b = row * col / delta**2
    s3b = 1j * g**3 * B2[0, 0] * _csum(t3b)

    # tail estimate: contribution of modes in the outermost retained shell
    top = np.max(modes[1:], axis=1) if len(modes) > 1 else np.zeros(0, int)
    shell = top >= top.max() - 1 if len(top) else np.zeros(0, bool)
    tail = abs(g**2 * _csum(t2[shell]))
    if np.any(shell):
        mask = shell[:, None] | shell[None, :]
        tail += abs(g**3 * _csum(t3a[mask])) + abs(g**3 * B2[0, 0] * _csum(t3b[shell]))

    validity = None
    if field_model is not None:
        validity = validity_report(species, CellGeometry(basis.L), field_model)
    return EigenvalueReport(
        s0=(complex(s0), complex(s1), complex(s2), complex(s3a + s3b)),
        s3a=complex(s3a), s3b=complex(s3b), truncation_error=float(tail),
        n_modes=len(modes), coupling_choice=choice, validity=validity,
    )


def mode_space_generator(basis, coupling, species, B0, use_b_tot=False):
    """A such that dc/dt = -A c in the lab frame (rotating frame: B0 = 0)."""
    ksq = basis.kappa_sq_of(coupling.modes)
    bm = coupling.b_tot if (use_b_tot and coupling.b_tot is not None) else coupling.b
    A = 1j * species.gamma * np.asarray(bm, dtype=complex)
    A[np.diag_indices_from(A)] += species.D * ksq + species.Gamma2c + 1j * species.gamma * B0
    return A


def exact_diagonalization_oracle(basis, coupling, species, B0, use_b_tot=False,
                                 min_overlap=0.9):
    """s0 from dense diagonalization of the truncated operator.

    Picks the eigenvector with the largest weight on mode 0. Returns s0 itself
    (the operator H0 + H1 has eigenvalue -s0).
    """
    # diagonalize without the uniform i gamma B0 shift for conditioning
    A = mode_space_generator(basis, coupling, species, 0.0, use_b_tot)
    w, V = np.linalg.eig(A)
    weight = np.abs(V[0, :]) / np.linalg.norm(V, axis=0)
    k = int(np.argmax(weight))
    if weight[k] < min_overlap:
        raise PerturbationError(
            f"largest fundamental-mode overlap {weight[k]:.3f} < {min_overlap}: "
            "outside perturbative regime"
        )
    return complex(w[k] + 1j * species.gamma * B0)


def solve(species, geometry, field_model, N=40, *, use_b_tot="auto", method="analytic",
          sum_mode="complete", hops=1):
    """Basis, couplings and eigenvalue report for one configuration."""
    basis = EigenBasis(geometry.L, species.lam, N)
    coupling = assemble_couplings(basis, field_model, species, hops=hops,
                                  method=method, sum_mode=sum_mode)
    report = eigenvalue_corrections(basis, coupling, species, field_model.B0,
                                    use_b_tot=use_b_tot, field_model=field_model)
    return basis, coupling, report
