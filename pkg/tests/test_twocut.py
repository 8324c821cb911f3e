"""Symmetric two-band solver against the quartic closed form."""

import math

import numpy as np
import pytest

from eqm import twocut
from eqm.errors import NotEven

from conftest import quartic_field, sextic_field


U1_QUARTIC = math.sqrt((10.0 + math.sqrt(2.0 / math.pi)) / 2.0)
U2_QUARTIC = math.sqrt((10.0 - math.sqrt(2.0 / math.pi)) / 2.0)


def test_quartic_endpoints_closed_form():
    sol = twocut.solve_endpoints_symmetric(quartic_field(-10.0))
    assert sol.converged
    assert sol.u1 == pytest.approx(U1_QUARTIC, abs=1e-9)
    assert sol.u2 == pytest.approx(U2_QUARTIC, abs=1e-9)


def test_quartic_density_closed_form():
    field = quartic_field(-10.0)
    sol = twocut.solve_endpoints_symmetric(field)
    tab = twocut.density_symmetric(sol, field, 400)
    a, b = sol.u1, sol.u2
    xs = np.concatenate([band.xs for band in tab.bands])
    want = 4.0 * np.abs(xs) * np.sqrt(
        np.maximum((a * a - xs * xs) * (xs * xs - b * b), 0.0)
    )
    got = np.concatenate([band.psis for band in tab.bands])
    assert np.max(np.abs(got - want)) < 1e-6 * np.max(want)
    assert tab.mass() == pytest.approx(1.0, abs=1e-9)
    assert len(tab.bands) == 2


def test_two_bands_mirror():
    field = quartic_field(-10.0)
    sol = twocut.solve_endpoints_symmetric(field)
    tab = twocut.density_symmetric(sol, field, 200)
    left, right = tab.bands
    assert left.lo == pytest.approx(-right.hi, abs=1e-14)
    assert left.hi == pytest.approx(-right.lo, abs=1e-14)
    np.testing.assert_allclose(left.psis, right.psis[::-1], rtol=1e-12)


def test_scaled_endpoints_large_t():
    target = 1.0 / math.sqrt(2.0)
    for t in (-1e2, -1e4):
        sol = twocut.solve_endpoints_symmetric(quartic_field(t))
        s = math.sqrt(abs(t))
        assert sol.u1 / s == pytest.approx(target, rel=2e-2)
        assert sol.u2 / s == pytest.approx(target, rel=2e-2)


def test_rejects_odd_field():
    with pytest.raises(NotEven):
        twocut.solve_endpoints_symmetric(sextic_field(-10.0))
