"""Density tables: masses, potentials, CSV round-trip."""

import math

import numpy as np
import pytest
from scipy import integrate

from eqm import onecut, twocut
from eqm.density import Band, DensityTable, chebyshev_angles

from conftest import quartic_field, semicircle_field, semicircle_radius


def _semicircle_table(t, n):
    field = semicircle_field(t)
    sol = onecut.solve_endpoints(field)
    return onecut.density(sol, field, n)


def test_chebyshev_angles_layout():
    th = chebyshev_angles(4)
    assert len(th) == 4
    assert th[0] == pytest.approx(math.pi / 8)
    assert th[-1] == pytest.approx(7 * math.pi / 8)


def test_band_mass_semicircle():
    tab = _semicircle_table(1.0, 400)
    assert tab.mass() == pytest.approx(1.0, abs=1e-10)


def test_log_potential_matches_quadrature_off_support():
    tab = _semicircle_table(1.0, 200)
    band = tab.bands[0]
    r = semicircle_radius(1.0)
    for xi in (1.7, -2.4, 0.9):
        direct, _ = integrate.quad(
            lambda mu: math.log(abs(xi - mu))
            * 2.0
            * math.sqrt(max(r * r - mu * mu, 0.0)),
            -r,
            r,
            limit=200,
        )
        assert tab.log_potential(xi) == pytest.approx(direct / math.pi, abs=1e-9)


def test_log_potential_on_support_semicircle():
    # L(psi) - V constant on the support for the equilibrium density
    tab = _semicircle_table(1.0, 300)
    xs = np.array([-0.3, 0.0, 0.2, 0.45])
    vals = tab.log_potential(xs) - xs * xs
    assert np.max(vals) - np.min(vals) < 1e-11


def test_interp_zero_outside():
    tab = _semicircle_table(1.0, 100)
    assert tab.interp(2.0) == 0.0
    assert tab.interp(-2.0) == 0.0
    band = tab.bands[0]
    assert band.interp(band.lo) == 0.0
    assert band.interp(band.hi) == 0.0


def test_endpoints_desc():
    field = quartic_field(-10.0)
    sol = twocut.solve_endpoints_symmetric(field)
    tab = twocut.density_symmetric(sol, field, 100)
    u = tab.endpoints_desc
    assert list(u) == sorted(u, reverse=True)
    assert len(u) == 4


def test_csv_roundtrip():
    fmt = lambda x: f"{x:.12g}"
    tab = _semicircle_table(1.0, 150)
    text = tab.to_csv(fmt)
    back = DensityTable.from_csv(text)
    assert len(back.bands) == 1
    np.testing.assert_allclose(back.bands[0].xs, tab.bands[0].xs, rtol=1e-11)
    np.testing.assert_allclose(back.bands[0].psis, tab.bands[0].psis, rtol=1e-11)
    assert back.lagrange_l == pytest.approx(tab.lagrange_l, rel=1e-11)
    assert back.mass() == pytest.approx(1.0, abs=1e-9)


def test_csv_roundtrip_two_bands():
    fmt = lambda x: f"{x:.12g}"
    field = quartic_field(-10.0)
    sol = twocut.solve_endpoints_symmetric(field)
    tab = twocut.density_symmetric(sol, field, 120)
    back = DensityTable.from_csv(tab.to_csv(fmt))
    assert len(back.bands) == 2
    assert back.mass() == pytest.approx(1.0, abs=1e-9)
