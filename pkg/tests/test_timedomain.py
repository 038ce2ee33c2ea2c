import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinshift.analytic import linG_shift_1st
from spinshift.coupling import assemble_couplings
from spinshift.domain import XE129, XE131
from spinshift.eigenbasis import EigenBasis
from spinshift.fields import linear_gradient, quadratic_gradient, uniform
from spinshift.perturbation import eigenvalue_corrections, exact_diagonalization_oracle
from spinshift.timedomain import (FidTrace, FitError, ModeState, default_discard, fit_fid,
                                  full_system_eigenvalue, integrate_full, integrate_rwa,
                                  simulate_fid, synthesize_fid, uniform_tip)

FAST129 = XE129.with_(Gamma20=2.0, Gamma10=2.0)


def small_system(fm=None, N=6, sp=XE131, **kw):
    fm = fm or quadratic_gradient(20000, 10)
    b = EigenBasis(1.0, sp.lam, N)
    return b, assemble_couplings(b, fm, sp, **kw), fm


def test_expm_and_adaptive_agree():
    b, cs, fm = small_system()
    init = uniform_tip(b, cs.modes)
    a = integrate_rwa(b, cs, XE131, fm.B0, init, 5.0, 0.05, method="expm")
    c = integrate_rwa(b, cs, XE131, fm.B0, init, 5.0, 0.05, method="adaptive",
                      rtol=1e-12, atol=1e-15)
    assert np.max(np.abs(a.c_plus - c.c_plus)) < 1e-9


def test_trajectory_iteration():
    b, cs, fm = small_system(N=4)
    tr = integrate_rwa(b, cs, XE131, fm.B0, uniform_tip(b, cs.modes), 1.0, 0.25)
    states = list(tr)
    assert len(states) == len(tr) == 5
    assert isinstance(states[2], ModeState) and states[2].t == pytest.approx(0.5)


@given(st.floats(-50, 50), st.floats(0.05, 2.0), st.floats(0.1, 3.0))
def test_single_exponential_fit(omega, gamma, phase):
    dt = min(12.0 / gamma / 3000, 0.02)  # keeps |omega| well below Nyquist
    t = np.arange(0, 12.0 / gamma, dt)
    y = 0.7 * np.exp(1j * phase) * np.exp((-gamma + 1j * omega) * t)
    fit = fit_fid(FidTrace(t, y, "rotating", {}), 0.0)
    assert fit.omega == pytest.approx(omega, abs=1e-9 * max(1, abs(omega)))
    assert fit.gamma2 == pytest.approx(gamma, rel=1e-9)
    assert fit.amplitude == pytest.approx(0.7 * np.exp(1j * phase), rel=1e-9)


@pytest.mark.filterwarnings("ignore:trace covers")
def test_two_mode_trace_needs_discard():
    t = np.linspace(0, 30, 6001)
    y = np.exp((-0.2 + 3j) * t) + 0.3 * np.exp((-4.0 + 11j) * t)
    with pytest.raises(FitError, match="transient_discard"):
        fit_fid(FidTrace(t, y, "rotating", {}), 0.0)
    fit = fit_fid(FidTrace(t, y, "rotating", {}), 8.0)
    assert fit.omega == pytest.approx(3.0, rel=1e-10)
    assert fit.gamma2 == pytest.approx(0.2, rel=1e-10)
    assert fit.amplitude == pytest.approx(1.0, rel=1e-8)


def test_short_trace_warns():
    t = np.linspace(0, 1.0, 500)
    with pytest.warns(UserWarning, match="decay times"):
        fit_fid(FidTrace(t, np.exp((-0.5 + 2j) * t), "rotating", {}), 0.0)


@pytest.mark.filterwarnings("ignore:trace covers")
def test_rotating_fit_matches_diagonalization():
    b, cs, fm = small_system(N=10, sp=XE131)
    s = exact_diagonalization_oracle(b, cs, XE131, fm.B0, use_b_tot=True)
    tr = simulate_fid(b, cs, XE131, fm.B0, 40.0, 0.02)
    fit = fit_fid(tr)
    assert fit.transient_discard == pytest.approx(default_discard(1.0, XE131.D))
    assert fit.omega == pytest.approx(-s.imag + XE131.gamma * fm.B0, rel=1e-9)
    assert fit.gamma2 == pytest.approx(s.real, rel=1e-9)


@pytest.mark.filterwarnings("ignore:trace covers")
def test_lab_and_rotating_frames_differ_by_larmor():
    sp = FAST129
    b, cs, fm = small_system(fm=quadratic_gradient(200, 10), N=6, sp=sp)
    rot = fit_fid(simulate_fid(b, cs, sp, fm.B0, 4.0, 1e-3))
    lab = fit_fid(simulate_fid(b, cs, sp, fm.B0, 4.0, 1e-3, frame="lab"))
    assert lab.omega == pytest.approx(rot.omega - sp.gamma * fm.B0, rel=1e-10)
    assert lab.gamma2 == pytest.approx(rot.gamma2, rel=1e-9)


def test_longitudinal_only_field_decouples_full_system():
    sp = FAST129
    fm = uniform(300.0)
    b = EigenBasis(1.0, sp.lam, 4)
    cs = assemble_couplings(b, fm, sp, transverse=True)
    init = uniform_tip(b, cs.modes)
    full = integrate_full(b, cs, sp, fm.B0, None, init, 0.5, 1e-3)
    rwa = integrate_rwa(b, cs, sp, fm.B0, init, 0.5, 1e-3, frame="lab")
    assert np.max(np.abs(full.c_z)) == 0.0
    assert np.max(np.abs(full.c_plus - rwa.c_plus)) < 1e-12


def test_full_expm_and_adaptive_agree():
    sp = FAST129
    b = EigenBasis(1.0, sp.lam, 4)
    fm = linear_gradient(300.0, 10.0)
    cs = assemble_couplings(b, fm, sp, transverse=True, hops=2)
    init = uniform_tip(b, cs.modes)
    a = integrate_full(b, cs, sp, fm.B0, None, init, 0.2, 1e-3)
    c = integrate_full(b, cs, sp, fm.B0, None, init, 0.2, 1e-3, method="adaptive",
                       rtol=1e-12, atol=1e-15)
    assert np.max(np.abs(a.c_plus - c.c_plus)) < 1e-9
    assert np.max(np.abs(a.c_z - c.c_z)) < 1e-9


def full_vs_rwa(B0, N=12):
    sp = FAST129
    b = EigenBasis(1.0, sp.lam, N)
    cs = assemble_couplings(b, linear_gradient(B0, 10.0), sp, transverse=True,
                            sum_mode="truncated", hops=2)
    rep = eigenvalue_corrections(b, cs, sp, B0, use_b_tot="all")
    s = full_system_eigenvalue(b, cs, sp, B0)
    return -s.imag + sp.gamma * B0, rep.shift, (b, cs)


def test_full_system_approaches_rotating_wave_result():
    gaps = []
    for B0 in (4000.0, 8000.0, 16000.0):
        full, rwa, _ = full_vs_rwa(B0)
        gaps.append(abs(full / rwa - 1))
    assert gaps[0] > 2.5 * gaps[1] > 6 * gaps[2]
    assert gaps[2] < 1e-4
    full, _, _ = full_vs_rwa(16000.0)
    closed = linG_shift_1st(FAST129, 16000.0, 10.0, 1.0)
    assert full == pytest.approx(closed, rel=5e-4)


def test_full_system_fid_fit_matches_its_eigenvalue():
    sp = FAST129
    B0 = 2000.0
    _, _, (b, cs) = full_vs_rwa(B0)
    s = full_system_eigenvalue(b, cs, sp, B0)
    dt = 2 * math.pi / abs(sp.gamma * B0) / 20
    tr = simulate_fid(b, cs, sp, B0, 6.5, dt, system="full")
    fit = fit_fid(tr, 1.2)
    assert tr.frame == "lab"
    assert fit.omega == pytest.approx(-s.imag, rel=1e-10)
    # a counter-rotating admixture of relative size (G1 L / B0)^2 rides on the
    # trace; it barely moves the frequency but biases the decay rate slightly
    assert fit.gamma2 == pytest.approx(s.real, rel=2e-5)


def test_bad_arguments():
    b, cs, fm = small_system(N=3)
    init = uniform_tip(b, cs.modes)
    with pytest.raises(ValueError):
        integrate_rwa(b, cs, XE131, fm.B0, init, 1.0, 0.1, frame="tilted")
    with pytest.raises(ValueError):
        integrate_rwa(b, cs, XE131, fm.B0, init, -1.0, 0.1)
    with pytest.raises(ValueError):
        simulate_fid(b, cs, XE131, fm.B0, 1.0, 0.1, system="bloch")
    with pytest.raises(FitError):
        fit_fid(FidTrace(np.arange(5.0), np.ones(5, complex), "rotating", {}))


def test_uniform_tip_signal_starts_at_volume():
    b, cs, fm = small_system(N=8, sp=XE131.with_(lam=0.0))
    tr = simulate_fid(b, cs, XE131.with_(lam=0.0), fm.B0, 0.1, 0.05)
    assert tr.signal[0] == pytest.approx(1.0, abs=1e-14)
