import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinshift.analytic import (linG_relax_2nd, linG_shift_1st, quadG_relax_2nd, quadG_shift_1st,
                                quadG_shift_3rd, series_constants)
from spinshift.coupling import assemble_couplings
from spinshift.domain import XE129, XE131, CellGeometry, SpinSpecies
from spinshift.eigenbasis import EigenBasis
from spinshift.fields import linear_gradient, quadratic_gradient, scaled
from spinshift.perturbation import (PerturbationError, eigenvalue_corrections,
                                    exact_diagonalization_oracle, mode_space_generator, solve)

GEOM = CellGeometry(1.0)


def shifts(species, fm, N=24, geometry=GEOM, use_b_tot="none"):
    _, _, rep = solve(species, geometry, fm, N=N, use_b_tot=use_b_tot)
    return rep


def test_sign_convention_first_order():
    # omega = -gamma (B0 + b00): a positive quadratic bump raises |omega| for either sign of gamma
    rep = shifts(XE129.with_(lam=0.0), quadratic_gradient(20000, 10))
    assert rep.s0[1] == pytest.approx(1j * XE129.gamma * 10 / 12, rel=1e-13)
    assert rep.frequency_shift[1] == pytest.approx(-XE129.gamma * 10 / 12, rel=1e-13)
    assert rep.frequency_shift[0] == pytest.approx(-XE129.gamma * 20000)
    # second order only relaxes, it does not shift
    assert rep.relaxation[2] > 0 and rep.frequency_shift[2] == 0.0


gs = st.floats(0.5, 30.0)
ls = st.floats(0.5, 2.0)


@given(gs, st.sampled_from([1, -1]))
def test_orders_scale_as_powers_of_gradient(G, sign):
    fm = quadratic_gradient(20000, G)
    r1 = shifts(XE131, fm, N=12)
    r2 = shifts(XE131, scaled(fm, sign * 2.0), N=12)
    for k in (1, 2, 3):
        assert r2.s0[k] == pytest.approx(r1.s0[k] * (sign * 2.0) ** k, rel=1e-12)


@given(ls)
def test_orders_scale_with_cell_size(L):
    # at fixed lambda the k-th order goes as L^(4k - 2) / D^(k - 1)
    fm = quadratic_gradient(20000, 10)
    r1 = shifts(XE129, fm, N=12)
    r2 = shifts(XE129, fm, N=12, geometry=CellGeometry(L))
    for k in (1, 2, 3):
        assert r2.s0[k] == pytest.approx(r1.s0[k] * L ** (4 * k - 2), rel=1e-11)


def test_gamma_sign_flip():
    fm = quadratic_gradient(20000, 10)
    sp = SpinSpecies("x", gamma=0.07, D=0.45, lam=1e-2)
    a, b = shifts(sp, fm, N=16), shifts(sp.with_(gamma=-0.07), fm, N=16)
    assert b.frequency_shift[1] == pytest.approx(-a.frequency_shift[1], rel=1e-14)
    assert b.frequency_shift[3] == pytest.approx(-a.frequency_shift[3], rel=1e-12)
    assert b.relaxation[2] == pytest.approx(a.relaxation[2], rel=1e-14)


def test_fundamental_decay_is_wall_plus_bulk():
    sp = XE131.with_(Gamma20=0.01, Rp=0.002)
    rep = shifts(sp, quadratic_gradient(20000, 10), N=8)
    x0 = EigenBasis(1.0, sp.lam, 1).kappa[0]
    assert rep.relaxation[0] == pytest.approx(3 * sp.D * x0**2 + 0.012, rel=1e-14)


def test_third_order_coefficient_neumann():
    fm = quadratic_gradient(20000, 10)
    rep = shifts(XE129.with_(lam=0.0), fm, N=40, use_b_tot="auto")
    chi1 = series_constants().chi1
    ref = XE129.gamma**3 * 1000 / XE129.D**2 * chi1
    assert rep.frequency_shift[3] == pytest.approx(ref, rel=2e-6)


def test_third_order_lambda_slope():
    fm = quadratic_gradient(20000, 10)
    s3 = lambda lam: shifts(XE129.with_(lam=lam), fm, N=40, use_b_tot="auto").frequency_shift[3]
    base, h = s3(0.0), 1e-3
    slope = (4 * (s3(h) - base) - (s3(2 * h) - base)) / (2 * h * base)
    assert slope == pytest.approx(series_constants().chi2, rel=1e-5)


def test_truncation_estimate_is_conservative_and_shrinks():
    fm = quadratic_gradient(20000, 10)
    ref = shifts(XE129, fm, N=80, use_b_tot="auto").frequency_shift[3]
    prev = math.inf
    for N in (20, 40):
        rep = shifts(XE129, fm, N=N, use_b_tot="auto")
        err = abs(rep.frequency_shift[3] - ref)
        assert rep.truncation_error >= err
        assert rep.truncation_error < prev
        prev = rep.truncation_error


def test_use_b_tot_choices():
    fm = linear_gradient(2000, 10)
    b = EigenBasis(1.0, 5e-3, 10)
    cs = assemble_couplings(b, fm, XE129)
    auto = eigenvalue_corrections(b, cs, XE129, 2000, "auto")
    assert auto.coupling_choice == ("b_tot", "b")
    assert eigenvalue_corrections(b, cs, XE129, 2000, "all").coupling_choice == ("b_tot", "b_tot")
    assert eigenvalue_corrections(b, cs, XE129, 2000, "none").coupling_choice == ("b", "b")
    # the linear-gradient first-order shift comes entirely from the dressing
    assert cs.b[0, 0] == 0 and auto.frequency_shift[1] != 0
    with pytest.raises(ValueError):
        eigenvalue_corrections(b, cs, XE129, 2000, "sometimes")


def test_mode_order_guard():
    b = EigenBasis(1.0, 5e-3, 6)
    cs = assemble_couplings(b, quadratic_gradient(20000, 10), XE129)
    cs.modes = cs.modes[::-1].copy()
    with pytest.raises(PerturbationError):
        eigenvalue_corrections(b, cs, XE129, 20000)


@pytest.mark.parametrize("use_b_tot", ["none", "all"])
def test_diagonalization_residual_is_fourth_order(use_b_tot):
    b = EigenBasis(1.0, 5.3e-3, 20)
    res, res_im = [], []
    for G in (20.0, 10.0):
        fm = quadratic_gradient(20000, G)
        cs = assemble_couplings(b, fm, XE129)
        rep = eigenvalue_corrections(b, cs, XE129, 20000, use_b_tot)
        exact = exact_diagonalization_oracle(b, cs, XE129, 20000, use_b_tot=use_b_tot == "all")
        res.append(abs(exact - rep.total))
        res_im.append(abs((exact - rep.total).imag))
    # the first omitted order is real, so the frequency residual falls even faster
    assert 14 < res[0] / res[1] < 18
    assert res_im[0] / res_im[1] > 14


def test_generator_is_symmetric_plus_diagonal():
    b = EigenBasis(1.0, 5e-3, 6)
    cs = assemble_couplings(b, quadratic_gradient(20000, 10), XE129)
    A = mode_space_generator(b, cs, XE129, 0.0)
    assert np.allclose(A, A.T)
    assert np.allclose(A.real, np.diag(np.diag(A.real)))


def test_oracle_rejects_strong_mixing():
    b = EigenBasis(4.0, 0.0, 12)
    cs = assemble_couplings(b, quadratic_gradient(20000, 500.0), XE129)
    with pytest.raises(PerturbationError):
        exact_diagonalization_oracle(b, cs, XE129, 20000, min_overlap=0.999)


def test_report_against_closed_forms_neumann():
    sp = XE131.with_(lam=0.0)
    rq = shifts(sp, quadratic_gradient(20000, 10), N=40, use_b_tot="auto")
    bare = shifts(sp, quadratic_gradient(20000, 10), N=8, use_b_tot="none")
    assert bare.frequency_shift[1] == pytest.approx(quadG_shift_1st(sp, 10, 1.0), rel=1e-13)
    # dressing adds the transverse term, of relative size ~ G2 L^2 / B0
    dressed = rq.frequency_shift[1] / bare.frequency_shift[1] - 1
    assert 0 < dressed < 10 * 10 / 20000
    assert rq.relaxation[2] == pytest.approx(quadG_relax_2nd(sp, 10, 1.0), rel=1e-6)
    assert rq.frequency_shift[3] == pytest.approx(quadG_shift_3rd(sp, 10, 1.0), rel=1e-5)
    rl = shifts(sp, linear_gradient(20000, 10), N=40, use_b_tot="auto")
    assert rl.frequency_shift[1] == pytest.approx(linG_shift_1st(sp, 20000, 10, 1.0), rel=1e-6)
    assert rl.relaxation[2] == pytest.approx(linG_relax_2nd(sp, 10, 1.0), rel=1e-6)


def test_validity_attached_to_report():
    rep = shifts(XE129, quadratic_gradient(20000, 10), N=8)
    assert rep.validity is not None and rep.validity.ok
    assert rep.n_modes > 1 and rep.shift == pytest.approx(sum(rep.frequency_shift[1:]))
