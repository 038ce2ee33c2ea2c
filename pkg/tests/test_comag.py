import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinshift.comag import (ComagError, budget_terms, characteristic_length,
                             characteristic_length_detail, estimator_from_shifts, field_offset,
                             gamma_bar, gyro_estimator, invert_lambda_difference,
                             precession_frequency, ratio, systematic_errors)
from spinshift.domain import XE129, XE131, CellGeometry
from spinshift.fields import quadratic_gradient
from spinshift.units import TWO_PI


def test_ratio_and_gamma_bar():
    # frozen from mpmath with the signed gyromagnetic ratios
    assert ratio() == pytest.approx(-3.3734173092714567, rel=1e-14)
    assert gamma_bar() / (TWO_PI * 1e-3) == pytest.approx(-2.7118738417340095, rel=1e-14)


# the absolute-value estimator needs |Omega_rot| < |gamma_131 B0| (22 rad/s at 1000 nT)
@given(st.floats(-5.0, 5.0), st.floats(1000.0, 1e5))
def test_estimator_recovers_rotation(omega_rot, B0):
    w129 = precession_frequency(XE129.gamma, B0, 0.0, omega_rot)
    w131 = precession_frequency(XE131.gamma, B0, 0.0, omega_rot)
    assert gyro_estimator(w129, w131) == pytest.approx(omega_rot, abs=1e-9 * abs(XE129.gamma * B0))


@given(st.floats(-1e-3, 1e-3), st.floats(-1e-3, 1e-3))
def test_estimator_error_is_gamma_bar_times_differential_field(d129, d131):
    B0 = 20000.0
    err = estimator_from_shifts(d129, d131, XE129, XE131, B0)
    b_A = field_offset(d129, XE129.gamma) - field_offset(d131, XE131.gamma)
    assert err == pytest.approx(gamma_bar() * b_A, rel=1e-6, abs=1e-12)


def test_common_field_offset_cancels():
    dB = 0.37
    err = estimator_from_shifts(-XE129.gamma * dB, -XE131.gamma * dB, XE129, XE131, 20000.0)
    assert abs(err) < 1e-9


def test_budget_values_at_two_centimetres():
    lin1, q1, q3 = budget_terms(XE129, XE131, 2.0, 20000.0, 10.0, 10.0)
    # frozen from mpmath (scripts/derive_reference_values.py)
    assert q1 / TWO_PI == pytest.approx(-9.280634925045277e-6, rel=1e-12)
    assert q3 / TWO_PI == pytest.approx(4.64037257890916e-6, rel=1e-9)
    assert abs(lin1) < 1e-3 * abs(q1)


def test_characteristic_length_both_readings():
    d = characteristic_length_detail(XE129, XE131, 10.0)
    assert d.Lc == pytest.approx(2.1810122271660679, rel=1e-9)
    assert d.Lc_external == pytest.approx(2.4380231715508731, rel=1e-9)
    assert d.interpretations_differ
    lin1, q1, q3 = budget_terms(XE129, XE131, d.Lc, 20000.0, 10.0, 10.0)
    assert abs(q1) == pytest.approx(abs(q3), rel=1e-8)


@given(st.floats(1.0, 100.0))
def test_characteristic_length_decreases_with_g2(G2):
    assert characteristic_length(XE129, XE131, 1.01 * G2) < characteristic_length(XE129, XE131, G2)
    assert characteristic_length(XE129, XE131, G2) == pytest.approx(
        characteristic_length(XE129, XE131, 10.0) * (10.0 / G2) ** 0.25, rel=1e-8)


@given(st.floats(0.2, 4.0), st.floats(1.0, 50.0))
def test_lambda_difference_round_trip(L, G2):
    _, q1, _ = budget_terms(XE129, XE131, L, 20000.0, 0.0, G2)
    dl = invert_lambda_difference(q1, CellGeometry(L), G2)
    assert dl == pytest.approx(XE131.lam - XE129.lam, rel=1e-12)


def test_budget_signs_follow_inputs():
    base = budget_terms(XE129, XE131, 1.0, 20000.0, 10.0, 10.0)
    neg = budget_terms(XE129, XE131, 1.0, 20000.0, 10.0, -10.0)
    assert neg[1] == -base[1] and neg[2] == pytest.approx(-base[2])
    swapped = budget_terms(XE129.with_(lam=XE131.lam), XE131.with_(lam=XE129.lam),
                           1.0, 20000.0, 10.0, 10.0)
    assert swapped[0] == -base[0] and swapped[1] == -base[1]


def test_guards():
    with pytest.raises(ComagError):
        budget_terms(XE129, XE131, 1.0, -20000.0, 10.0, 10.0)
    with pytest.raises(ComagError):
        characteristic_length(XE129, XE131, 0.0)
    with pytest.raises(ComagError):
        invert_lambda_difference(1e-6, CellGeometry(1.0), 0.0)


def test_systematic_errors_defaults_from_field():
    bud = systematic_errors(XE129, XE131, CellGeometry(2.0), quadratic_gradient(20000, 10))
    assert bud.dOmega_linG_1st == 0.0
    assert bud.total == pytest.approx(bud.dOmega_quadG_1st + bud.dOmega_quadG_3rd)
    assert bud.b_A == pytest.approx(bud.total / bud.gamma_bar)
    assert set(bud.as_dict()) >= {"Lc_cm", "total", "b_A_nT"}
