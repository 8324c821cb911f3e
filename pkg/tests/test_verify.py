"""Variational certification: passing reports and counter-tests."""

import math

import numpy as np
import pytest

from eqm import onecut, twocut, verify
from eqm.density import Band, DensityTable

from conftest import quartic_field, semicircle_field, sextic_field


def _scaled(table, factor):
    bands = [Band(b.lo, b.hi, b.xs.copy(), factor * b.psis) for b in table.bands]
    return DensityTable(bands, table.lagrange_l)


def _shifted(table, delta):
    bands = [
        Band(b.lo + delta, b.hi + delta, b.xs + delta, b.psis.copy())
        for b in table.bands
    ]
    return DensityTable(bands, table.lagrange_l)


def test_semicircle_passes():
    field = semicircle_field(1.0)
    sol = onecut.solve_endpoints(field)
    tab = onecut.density(sol, field, 400)
    rep = verify.check_variational(tab, field)
    assert rep.passed()
    assert rep.equality_deviation < 1e-9
    assert rep.inequality_margin > 0.0
    assert rep.mass_residual < 1e-10
    d = rep.as_dict()
    assert d["passed"] is True
    assert set(d) == {
        "equality_deviation",
        "inequality_margin",
        "mass_residual",
        "constraint_sign_ok",
        "gap_integral_ok",
        "passed",
    }


def test_quartic_twocut_passes_with_gap_probes():
    field = quartic_field(-10.0)
    sol = twocut.solve_endpoints_symmetric(field)
    tab = twocut.density_symmetric(sol, field, 400)
    rep = verify.check_variational(tab, field)
    assert rep.passed()
    assert rep.gap_integral_ok
    assert rep.constraint_sign_ok


def test_mis_scaled_density_fails():
    field = semicircle_field(1.0)
    sol = onecut.solve_endpoints(field)
    tab = onecut.density(sol, field, 400)
    rep = verify.check_variational(_scaled(tab, 1.01), field)
    assert not rep.passed()
    assert rep.mass_residual > 1e-3


def test_shifted_density_fails():
    field = semicircle_field(1.0)
    sol = onecut.solve_endpoints(field)
    tab = onecut.density(sol, field, 400)
    rep = verify.check_variational(_shifted(tab, 0.2), field)
    assert not rep.passed()


def test_wrong_ansatz_fails_every_tilt():
    # one band parked in one well of the symmetric double well: the
    # mirror well violates the inequality and the ray integrals
    for t in (-10.0, -316.227766017, -10000.0):
        field = quartic_field(t)
        sol = onecut.solve_endpoints(field)
        tab = onecut.density(sol, field, 400)
        rep = verify.check_variational(tab, field)
        assert not rep.passed()
        assert not rep.gap_integral_ok
        assert rep.inequality_margin < -1.0


def test_effective_potential_constant_inside_lower_outside():
    field = semicircle_field(1.0)
    sol = onecut.solve_endpoints(field)
    tab = onecut.density(sol, field, 400)
    mid = verify.effective_potential(tab, field, 0.0)
    near = verify.effective_potential(tab, field, 0.3 * sol.u1)
    outside = verify.effective_potential(tab, field, 2.0 * sol.u1)
    assert near == pytest.approx(mid, abs=1e-10)
    assert outside < mid - 0.1


def test_far_field_deviation_small():
    field = semicircle_field(1.0)
    sol = onecut.solve_endpoints(field)
    tab = onecut.density(sol, field, 400)
    assert verify.far_field_deviation(tab) < 1e-4
    # support far from the origin: centroid recentering keeps it small
    f6 = sextic_field(-1e4)
    sol6 = onecut.solve_endpoints(f6)
    tab6 = onecut.density(sol6, f6, 400)
    assert verify.far_field_deviation(tab6) < 1e-4


def test_report_passes_tolerance_overrides():
    field = semicircle_field(1.0)
    sol = onecut.solve_endpoints(field)
    tab = onecut.density(sol, field, 400)
    rep = verify.check_variational(tab, field)
    assert rep.passed()
    assert not rep.passed(tol_eq=1e-16)
