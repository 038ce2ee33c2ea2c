import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinshift.domain import (XE129, XE131, CellGeometry, LambdaRangeError, SpinSpecies,
                              lambda_from_depolarization, validity_report)
from spinshift.fields import (FieldModel, Polynomial, TabulatedField, custom, is_divergence_free,
                              linear_gradient, quadratic_gradient, scaled, uniform)
from spinshift.units import (celsius_to_kelvin, gamma_from_mhz_per_nt, gamma_to_mhz_per_nt,
                             kelvin_to_celsius)

coef = st.floats(-50, 50, allow_nan=False)


@given(coef)
def test_gradient_fields_are_divergence_free(g):
    for fm in (linear_gradient(20000, g), quadratic_gradient(20000, g)):
        assert is_divergence_free(fm, 1e-12)
    for comp in linear_gradient(20000, g).curl():
        assert all(abs(c) < 1e-12 for c in comp.terms.values())


def test_quadratic_gradient_curl_is_azimuthal():
    # the built-in axial quadratic form is solenoidal but carries curl G2 (y, -x, 0)
    cx, cy, cz = quadratic_gradient(0.0, 3.0).curl()
    assert cx.terms == {(0, 1, 0): 3.0}
    assert cy.terms == {(1, 0, 0): -3.0}
    assert cz.is_zero()


def test_quadratic_gradient_at_corner():
    fm = quadratic_gradient(20000.0, 10.0)
    h = 0.5
    bx, by, bz = fm.evaluate(h, h, h)
    assert bx == pytest.approx(-10 * h * h)
    assert by == pytest.approx(-10 * h * h)
    assert bz == pytest.approx(20000 + 10 * h * h)


def test_linear_gradient_components():
    fm = linear_gradient(1000.0, 4.0)
    bx, by, bz = fm.evaluate(0.2, -0.3, 0.1)
    assert (bx, by, bz) == pytest.approx((-0.4, 0.6, 1000.4))


def test_polynomial_algebra():
    p = Polynomial({(1, 0, 0): 2.0, (0, 0, 2): -1.0})
    q = Polynomial({(1, 0, 0): -2.0})
    assert (p + q).terms == {(0, 0, 2): -1.0}
    assert (p * p)(0.3, 0.0, 0.2) == pytest.approx(p(0.3, 0.0, 0.2) ** 2)
    assert p.diff(2).terms == {(0, 0, 1): -2.0}
    assert Polynomial({(1, 2, 3): 1.0}).odd_axes() == (True, False, True)
    assert Polynomial.from_spec([[[0, 0, 1], 3.0]]).terms == {(0, 0, 1): 3.0}
    with pytest.raises(ValueError):
        Polynomial({(1, -1, 0): 1.0})


def test_scaled_and_custom_fields():
    fm = scaled(quadratic_gradient(20000, 10), 0.5)
    assert fm.strength == 5 and fm.bz1.terms == {(0, 0, 2): 5.0}
    c = custom(100.0, bz1={(0, 0, 1): 1.0})
    assert not c.has_transverse and c.bz1(0, 0, 2.0) == 2.0
    assert not uniform(5.0).has_transverse


def test_tabulated_field_interpolates_linear_data():
    g = np.linspace(-0.5, 0.5, 11)
    X, Y, Z = np.meshgrid(g, g, g, indexing="ij")
    tf = TabulatedField(3.0 * Z, 1.0)
    assert tf(0.0, 0.0, 0.123) == pytest.approx(0.369)


def test_gamma_unit_round_trip():
    g = gamma_from_mhz_per_nt(11.860156)
    assert g == pytest.approx(2 * math.pi * 11.860156e-3)
    assert gamma_to_mhz_per_nt(g) == pytest.approx(11.860156)
    assert kelvin_to_celsius(celsius_to_kelvin(110.0)) == pytest.approx(110.0)


def test_species_signs_and_validation():
    assert XE129.gamma < 0 < XE131.gamma
    with pytest.raises(ValueError):
        SpinSpecies("x", gamma=1.0, D=0.0)
    with pytest.raises(ValueError):
        SpinSpecies("x", gamma=1.0, D=1.0, lam=-1e-3)
    with pytest.raises(LambdaRangeError):
        XE129.with_(lam=2.0).require_small_lambda()
    with pytest.raises(ValueError):
        CellGeometry(0.0)
    assert CellGeometry(2.0).contains((1.0, -1.0, 0.0))
    assert not CellGeometry(2.0).contains((1.1, 0.0, 0.0))


def test_lambda_from_depolarization():
    # 3 L xi / (4 mean free path) with L = 1 cm, xi = 1e-7, mean free path = 1e-5 cm
    assert lambda_from_depolarization(1.0, 1e-5, 1e-7) == pytest.approx(7.5e-3, rel=1e-14)
    with pytest.raises(LambdaRangeError):
        lambda_from_depolarization(1.0, 1e-5, 0.2)
    with pytest.raises(ValueError):
        lambda_from_depolarization(1.0, 0.0, 1e-7)


def test_validity_report_numbers_and_flags():
    sp = SpinSpecies("x", gamma=gamma_from_mhz_per_nt(11.86), D=0.45, lam=5.3e-3)
    rep = validity_report(sp, CellGeometry(1.0), quadratic_gradient(20000, 10))
    # gamma B0 L^2 / D, frozen from an mpmath evaluation
    assert rep.high_pressure == pytest.approx(3311.9367885844398, rel=1e-12)
    assert rep.ok
    weak = validity_report(sp, CellGeometry(1.0), quadratic_gradient(1.0, 10))
    assert any("high-pressure" in f for f in weak.flags)
    strong = validity_report(sp, CellGeometry(4.0), quadratic_gradient(20000, 1000))
    assert any("perturbative" in f for f in strong.flags)
    slow = validity_report(sp.with_(Gamma20=100.0), CellGeometry(1.0), uniform(20000))
    assert any("fast-diffusion" in f for f in slow.flags)
