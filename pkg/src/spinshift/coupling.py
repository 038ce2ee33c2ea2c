"""Field-coupling matrices over a truncated set of 3-D modes.

    b_ab   = int phi_a B1 phi_b                (longitudinal, real symmetric)
    b+-_ab = int phi_a (Bx +- i By) phi_b      (transverse)
    d_z,a  = int phi_a S_z                     (pumping source)

and the rotating-frame dressing

    b_tot_ab = b_ab + gamma / (2 [gamma B0 - i (D kappa_b^2 + Gamma2c)]) sum_g b+_ag b-_gb.

For polynomial fields every entry is a sum of products of closed-form 1-D
integrals. Modes are pruned to those reachable from the fundamental mode
through a fixed number of applications of the field's monomials.
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .fields import FieldModel, Polynomial, TabulatedField
from .integrals import (gauss_legendre, moment_matrices, monomial_mode_vector,
                        quadrature_mode_vector, quadrature_order)


class CouplingError(ValueError):
    pass


# ---------------------------------------------------------------- mode sets

def _moves(polys):
    moves = set()
    for poly in polys:
        for key in poly.terms:
            moves.add(key)
    return sorted(moves)


def reachable_modes(N, moves, hops):
    """Modes reachable from (0,0,0) in at most ``hops`` monomial applications.

    An axis with exponent 0 in the monomial keeps its index; an axis with a
    positive exponent can move to any index of parity (index + exponent).
    Per-axis state is either the exact index 0 or a parity class.
    """
    start = ("z", "z", "z")  # "z": exactly index 0; 0/1: any index of that parity
    frontier = {start}
    seen = {start}
    for _ in range(hops):
        new = set()
        for state in frontier:
            for mv in moves:
                nxt = []
                for s, e in zip(state, mv):
                    if e == 0:
                        nxt.append(s)
                    else:
                        par = 0 if s == "z" else s
                        nxt.append((par + e) % 2)
                nxt = tuple(nxt)
                if nxt not in seen:
                    seen.add(nxt)
                    new.add(nxt)
        frontier = new
    modes = set()
    for state in seen:
        axes = []
        for s in state:
            axes.append([0] if s == "z" else [i for i in range(N) if i % 2 == s])
        for m in axes[0]:
            for n in axes[1]:
                for p in axes[2]:
                    modes.add((m, n, p))
    return modes


def order_modes(basis, modes):
    """Array of mode triples with (0,0,0) first, then by kappa^2."""
    modes = set(map(tuple, modes))
    modes.discard((0, 0, 0))
    rest = sorted(modes, key=lambda a: (basis.kappa_sq(a), a))
    return np.array([(0, 0, 0)] + rest, dtype=int)


def select_modes(basis, field_model: FieldModel, hops=1, dressing=True, transverse=False):
    """Pruned mode set for a field; all N^3 modes for non-polynomial fields.

    ``dressing`` adds the monomials of Bx^2 + By^2 (what b_tot couples
    through); ``transverse`` adds those of Bx, By themselves (needed by the
    full non-rotating-frame system).
    """
    if not field_model.is_polynomial:
        return order_modes(basis, map(tuple, basis.all_modes()))
    polys = [field_model.bz1]
    if field_model.has_transverse:
        if dressing:
            polys.append(field_model.transverse_square())
        if transverse:
            polys += [field_model.bx, field_model.by]
    moves = _moves(polys)
    return order_modes(basis, reachable_modes(basis.N, moves, hops))


def one_hop(N, modes, moves):
    """All modes one monomial application away from any of ``modes``."""
    out = set()
    for alpha in map(tuple, np.asarray(modes)):
        for mv in moves:
            axes = [[a] if e == 0 else [i for i in range(N) if (i - a - e) % 2 == 0]
                    for a, e in zip(alpha, mv)]
            out.update((m, n, p) for m in axes[0] for n in axes[1] for p in axes[2])
    return out


# ---------------------------------------------------------------- assembly

def _poly_matrix(basis, poly: Polynomial, modes, method="analytic"):
    M = len(modes)
    out = np.zeros((M, M))
    if poly.is_zero():
        return out
    kmax = max(max(k) for k in poly.terms)
    I = moment_matrices(basis, kmax, method)
    m, n, p = modes[:, 0], modes[:, 1], modes[:, 2]
    for (i, j, k), c in poly.terms.items():
        out += c * I[i][np.ix_(m, m)] * I[j][np.ix_(n, n)] * I[k][np.ix_(p, p)]
    return out


def _grid_matrix(basis, func, modes, order=None):
    """Tensor Gauss-Legendre assembly for callables or tabulated fields."""
    order = order or quadrature_order(basis)
    used = np.unique(modes)
    if len(used) > 14:
        raise CouplingError("quadrature assembly limited to 14 axis modes in use; "
                            "reduce N or supply a polynomial field")
    z, w = gauss_legendre(order, basis.L / 2)
    X, Y, Z = np.meshgrid(z, z, z, indexing="ij")
    f = np.asarray(func(X, Y, Z), dtype=float) * np.ones(X.shape)
    tab = basis.phi_table(z)[used]  # [u, q]
    pair = tab[:, None, :] * tab[None, :, :] * w  # [u, u, q]
    V = np.einsum("abi,cdj,efk,ijk->abcdef", pair, pair, pair, f, optimize=True)
    pos = {u: i for i, u in enumerate(used)}
    idx = np.vectorize(pos.__getitem__)(modes)
    a, b_, c = idx[:, 0], idx[:, 1], idx[:, 2]
    return V[a[:, None], a[None, :], b_[:, None], b_[None, :], c[:, None], c[None, :]]


def _check_tabulated(basis, comp):
    if isinstance(comp, TabulatedField):
        need = 2 * basis.N + 1
        if min(comp.shape) < need:
            raise CouplingError(
                f"tabulated grid {comp.shape} under-resolves modes up to p={basis.N - 1}: "
                f"need at least {need} points per axis"
            )


def _component_matrix(basis, comp, modes, method):
    if isinstance(comp, Polynomial):
        return _poly_matrix(basis, comp, modes, method)
    _check_tabulated(basis, comp)
    return _grid_matrix(basis, comp, modes)


def assemble_b(basis, field_model: FieldModel, modes=None, method="analytic"):
    """Real symmetric longitudinal coupling matrix b over ``modes`` (nT)."""
    if modes is None:
        modes = select_modes(basis, field_model)
    b = _component_matrix(basis, field_model.bz1, modes, method)
    return 0.5 * (b + b.T)


def assemble_b_pm(basis, field_model: FieldModel, modes=None, method="analytic"):
    """(b_plus, b_minus) with b_minus = conj(b_plus)."""
    if modes is None:
        modes = select_modes(basis, field_model, transverse=True)
    bx = _component_matrix(basis, field_model.bx, modes, method)
    by = _component_matrix(basis, field_model.by, modes, method)
    bx, by = 0.5 * (bx + bx.T), 0.5 * (by + by.T)
    b_plus = bx + 1j * by
    return b_plus, np.conj(b_plus)


def transverse_product(basis, field_model, modes, method="analytic", sum_mode="complete"):
    """sum_g b+_ag b-_gb.

    ``complete`` sums over the whole (infinite) basis via completeness,
    which turns the sum into int phi_a (Bx^2 + By^2) phi_b. ``truncated``
    sums over the N^3 modes of the basis only.
    """
    if sum_mode == "complete":
        if not field_model.is_polynomial:
            sq = lambda x, y, z: field_model.bx(x, y, z) ** 2 + field_model.by(x, y, z) ** 2
            return _grid_matrix(basis, sq, modes).astype(complex)
        return _poly_matrix(basis, field_model.transverse_square(), modes, method).astype(complex)
    if sum_mode == "truncated":
        full = order_modes(basis, one_hop(basis.N, modes, _moves([field_model.bx, field_model.by]))
                           | set(map(tuple, modes)))
        bp_full, _ = assemble_b_pm(basis, field_model, modes=full, method=method)
        pos = {tuple(a): i for i, a in enumerate(full)}
        rows = [pos[tuple(a)] for a in modes]
        left = bp_full[rows]  # b+_{a g}
        right = np.conj(bp_full)[:, rows]  # b-_{g b}
        return left @ right
    raise ValueError(f"unknown sum_mode {sum_mode!r}")


def dress_b_tot(basis, coupling, species, B0):
    """Dressed coupling b_tot over the coupling set's modes."""
    if B0 == 0:
        raise CouplingError("B0 = 0: rotating-frame dressing undefined")
    if coupling.bperp_sq is None:
        raise CouplingError("coupling set has no transverse product")
    ksq = basis.kappa_sq_of(coupling.modes)
    g = species.gamma
    denom = 2 * (g * B0 - 1j * (species.D * ksq + species.Gamma2c))
    return coupling.b + (g / denom)[None, :] * coupling.bperp_sq


def assemble_dz(basis, Sz, modes):
    """d_z,a = int phi_a S_z d^3r.

    ``Sz`` may be a number (uniform), a Polynomial, a callable S(x, y, z),
    or a tuple of three 1-D callables for a separable profile.
    """
    modes = np.asarray(modes, dtype=int)
    if Sz is None:
        return np.zeros(len(modes))
    if isinstance(Sz, (int, float)):
        Sz = Polynomial.constant(float(Sz))
    if isinstance(Sz, Polynomial):
        if Sz.is_zero():
            return np.zeros(len(modes))
        kmax = max(max(k) for k in Sz.terms)
        vec = [monomial_mode_vector(basis, k) for k in range(kmax + 1)]
        out = np.zeros(len(modes))
        for (i, j, k), c in Sz.terms.items():
            out += c * vec[i][modes[:, 0]] * vec[j][modes[:, 1]] * vec[k][modes[:, 2]]
        return out
    if isinstance(Sz, tuple) and len(Sz) == 3:
        vx, vy, vz = (quadrature_mode_vector(basis, f) for f in Sz)
        return vx[modes[:, 0]] * vy[modes[:, 1]] * vz[modes[:, 2]]
    # general callable: tensor quadrature
    order = quadrature_order(basis)
    z, w = gauss_legendre(order, basis.L / 2)
    X, Y, Z = np.meshgrid(z, z, z, indexing="ij")
    f = np.asarray(Sz(X, Y, Z), dtype=float) * np.ones(X.shape)
    tab = basis.phi_table(z) * w
    full = np.einsum("ai,bj,ck,ijk->abc", tab, tab, tab, f, optimize=True)
    return full[modes[:, 0], modes[:, 1], modes[:, 2]]


def mode_integrals(basis, modes):
    """int phi_a d^3r for each mode (uniform-tip overlap)."""
    v = monomial_mode_vector(basis, 0)
    modes = np.asarray(modes, dtype=int)
    return v[modes[:, 0]] * v[modes[:, 1]] * v[modes[:, 2]]


# ---------------------------------------------------------------- container

@dataclass
class CouplingSet:
    """Coupling matrices over one ordered mode set (index 0 is the fundamental)."""

    modes: np.ndarray
    b: np.ndarray
    b_plus: np.ndarray
    b_minus: np.ndarray
    bperp_sq: Optional[np.ndarray]
    b_tot: Optional[np.ndarray] = None
    d_z: Optional[np.ndarray] = None
    truncation: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def size(self):
        return len(self.modes)


def assemble_couplings(basis, field_model: FieldModel, species=None, *, modes=None,
                       hops=1, transverse=False, Sz=None, method="analytic",
                       sum_mode="complete"):
    """Everything the solvers need for one (basis, field) pair.

    When ``species`` is given, b_tot is dressed with the field's B0.
    """
    if modes is None:
        modes = select_modes(basis, field_model, hops=hops, transverse=transverse)
    modes = np.asarray(modes, dtype=int)
    if not field_model.is_polynomial:
        warnings.warn("custom non-polynomial field: divergence-free condition not checked")
    b = assemble_b(basis, field_model, modes, method)
    if field_model.has_transverse:
        b_plus, b_minus = assemble_b_pm(basis, field_model, modes, method)
        bperp = transverse_product(basis, field_model, modes, method, sum_mode)
    else:
        b_plus = b_minus = np.zeros((len(modes), len(modes)), dtype=complex)
        bperp = np.zeros((len(modes), len(modes)), dtype=complex)
    cs = CouplingSet(
        modes=modes, b=b, b_plus=b_plus, b_minus=b_minus, bperp_sq=bperp,
        d_z=assemble_dz(basis, Sz, modes) if Sz is not None else None,
        truncation=basis.N,
        meta={"method": method if field_model.is_polynomial else "quadrature",
              "sum_mode": sum_mode, "hops": hops, "lam": basis.lam, "L": basis.L},
    )
    if species is not None and field_model.B0 != 0:
        cs.b_tot = dress_b_tot(basis, cs, species, field_model.B0)
    return cs
