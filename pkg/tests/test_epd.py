"""Kernel evaluators: PDE residuals, boundary data, identities."""

import math

import numpy as np
import pytest

from eqm.epd import (
    EpdSpec,
    epd2_eval,
    epd_residual,
    phi0_closed,
    phi1_symmetric_closed,
    phi_eval,
    phi_eval_grad,
    psi1_symmetric_sum,
)
from eqm.field import FieldSpec, PowerTerm

from conftest import quartic_field, semicircle_field, sextic_field


def monomial(k):
    return FieldSpec(vstar=(PowerTerm("monomial", float(k), 1.0),),
                     p_coeffs=(0.0, 1.0), t=0.0)


def test_diagonal_boundary_phi():
    # phi diagonal = V''(u)/2 at g = 0
    f = monomial(4)
    val = phi_eval(EpdSpec(0, "phi", f), 1.0, (1.0, 1.0))
    assert val == pytest.approx(6.0, abs=1e-9)
    # g = 1: V''''(u)/(2*2!)
    val = phi_eval(EpdSpec(1, "phi", f), 1.0, (1.0, 1.0, 1.0, 1.0))
    assert val == pytest.approx(24.0 / 4.0, abs=1e-9)


def test_diagonal_boundary_psi():
    # psi diagonal = V'(u)/2 at g = 0 (one derivative below phi)
    f = monomial(2)
    val = phi_eval(EpdSpec(0, "psi", f), 1.0, (1.0, 1.0))
    assert val == pytest.approx(1.0, abs=1e-9)
    # g = 1: V''(u)/(2*2!)
    f4 = monomial(4)
    val = phi_eval(EpdSpec(1, "psi", f4), 0.5, (0.5, 0.5, 0.5, 0.5))
    assert val == pytest.approx(12.0 * 0.25 / 4.0, abs=1e-9)


def test_semicircle_phi_constant():
    f = semicircle_field(1.3)
    spec = EpdSpec(0, "phi", f)
    for xi, u in ((0.0, (0.5, -0.5)), (2.0, (1.0, -0.3)), (-1.0, (0.2, -0.9))):
        assert phi_eval(spec, xi, u) == pytest.approx(1.3, rel=1e-13)


def test_cubic_phi_closed_form():
    # V = xi^3: Phi0 = (3/2)(xi + (u1+u2)/2)
    f = monomial(3)
    spec = EpdSpec(0, "phi", f)
    for xi, u1, u2 in ((1.5, 1.0, -1.0), (3.0, 1.0, -1.0), (0.3, 0.8, -0.2)):
        want = 1.5 * (xi + 0.5 * (u1 + u2))
        assert phi_eval(spec, xi, (u1, u2)) == pytest.approx(want, rel=1e-12)
        assert phi0_closed(f, xi, u1, u2) == pytest.approx(want, rel=1e-12)


def test_quartic_phi1_closed_form():
    # symmetric quartic at g = 1: Phi1 = 2*xi
    f = quartic_field(-10.0)
    spec = EpdSpec(1, "phi", f)
    u = (2.3, 2.1, -2.1, -2.3)
    for xi in (3.0, 0.7, -4.2):
        assert phi_eval(spec, xi, u) == pytest.approx(2.0 * xi, rel=1e-11)
        assert phi1_symmetric_closed(f, xi, 2.3, 2.1) == pytest.approx(
            2.0 * xi, rel=1e-11
        )


def test_psi1_symmetric_sum_matches_tensor():
    # Psi1(u1) + Psi1(u2) equals the closed band-integral form; at
    # equilibrium endpoints this sum is the vanishing hodograph residual
    f = quartic_field(-10.0)
    spec = EpdSpec(1, "psi", f)
    u1, u2 = 2.5, 1.8
    u = (u1, u2, -u2, -u1)
    total = phi_eval(spec, u1, u) + phi_eval(spec, u2, u)
    assert psi1_symmetric_sum(f, u1, u2) == pytest.approx(total, rel=1e-10)
    assert abs(psi1_symmetric_sum(f, 2.3235624, 2.1450076)) < 1e-5


def test_pde_residual_decay_g0():
    rng = np.random.default_rng(7)
    fields = [monomial(4), sextic_field(-2.0), quartic_field(1.5)]
    for f in fields:
        spec = EpdSpec(0, "phi", f)
        for _ in range(5):
            u1 = rng.uniform(0.5, 1.5)
            u2 = u1 - rng.uniform(0.5, 1.5)
            xi = rng.uniform(-2.0, 2.0)
            scale = max(1.0, abs(phi_eval(spec, xi, (u1, u2))))
            pairs = [(1, 2), (0, 1), (0, 2)]
            for i, j in pairs:
                r2 = abs(epd_residual(spec, xi, (u1, u2), i, j, 1e-2))
                r3 = abs(epd_residual(spec, xi, (u1, u2), i, j, 1e-3))
                assert r3 < 0.05 * r2 + 1e-9 * scale


def test_pde_residual_decay_g1():
    f = quartic_field(-8.0)
    spec = EpdSpec(1, "phi", f)
    u = (2.2, 1.9, -1.8, -2.3)
    for i, j in ((1, 3), (0, 2)):
        r2 = abs(epd_residual(spec, 0.4, u, i, j, 1e-2))
        r3 = abs(epd_residual(spec, 0.4, u, i, j, 1e-3))
        scale = max(1.0, abs(phi_eval(spec, 0.4, u)))
        assert r3 < 0.05 * r2 + 1e-9 * scale


def test_identity_endpoint_pair():
    # Psi0(u1; u1, u2) - Psi0(u2; u1, u2) = 2 (u1 - u2) dPsi0/du2(u1; u1, u2)
    f = sextic_field(-3.0)
    spec = EpdSpec(0, "psi", f)
    u1, u2 = 1.4, -0.6
    a = phi_eval(spec, u1, (u1, u2))
    b = phi_eval(spec, u2, (u1, u2))
    _, grad = phi_eval_grad(spec, u1, (u1, u2))
    resid = a - b - 2.0 * (u1 - u2) * grad[2]
    assert abs(resid) < 1e-8 * max(1.0, abs(a))


def _phi_from_psi_residual(g, field, xi, u):
    # the higher kernel equals the xi-derivative of the lower one plus
    # half the divided differences against every endpoint
    phi = phi_eval(EpdSpec(g, "phi", field), xi, u)
    psi_spec = EpdSpec(g, "psi", field)
    val, grad = phi_eval_grad(psi_spec, xi, u)
    acc = grad[0]
    for ui in u:
        acc += 0.5 * (val - phi_eval(psi_spec, ui, u)) / (xi - ui)
    return phi - acc


def test_phi_from_psi_recurrence():
    f = sextic_field(-2.0)
    r0 = _phi_from_psi_residual(0, f, 2.2, (1.1, -0.7))
    assert abs(r0) < 1e-7 * max(1.0, abs(phi_eval(EpdSpec(0, "phi", f), 2.2, (1.1, -0.7))))
    fq = quartic_field(-6.0)
    u = (2.0, 1.7, -1.6, -2.1)
    r1 = _phi_from_psi_residual(1, fq, 2.8, u)
    assert abs(r1) < 1e-7 * max(1.0, abs(phi_eval(EpdSpec(1, "phi", fq), 2.8, u)))


def test_homogeneity():
    lam = 1.7
    for k, g in ((4, 0), (6, 0), (4, 1)):
        f = monomial(k)
        u = (1.2, 0.3, -0.5, -1.1)[: 2 * g + 2]
        for which, drop in (("phi", g + 2), ("psi", g + 1)):
            spec = EpdSpec(g, which, f)
            base = phi_eval(spec, 0.8, u)
            scaled = phi_eval(spec, lam * 0.8, tuple(lam * x for x in u))
            assert scaled == pytest.approx(lam ** (k - drop) * base, rel=1e-10)


def test_epd2_diagonal_exact():
    assert epd2_eval(lambda x: x * x + 1.0, 2.5, 0.7, 0.7) == pytest.approx(
        0.7 * 0.7 + 1.0, rel=1e-14
    )


def test_epd2_linear_moment():
    # linear data: value is x2 + (x1 - x2) * rho/(rho + 1)
    rho = 1.0
    x1, x2 = 3.0, 1.0
    assert epd2_eval(lambda x: x, rho, x1, x2) == pytest.approx(2.0, rel=1e-12)
    rho = 2.5
    want = x2 + (x1 - x2) * rho / (rho + 1.0)
    assert epd2_eval(lambda x: x, rho, x1, x2) == pytest.approx(want, rel=1e-12)


def test_epd2_validates_rho():
    with pytest.raises(ValueError):
        epd2_eval(lambda x: x, 0.0, 1.0, 0.0)


def test_gradient_matches_finite_differences():
    f = sextic_field(-2.0)
    spec = EpdSpec(0, "phi", f)
    xi, u = 1.9, (1.2, -0.4)
    _, grad = phi_eval_grad(spec, xi, u)
    h = 1e-6
    fd0 = (phi_eval(spec, xi + h, u) - phi_eval(spec, xi - h, u)) / (2 * h)
    fd1 = (phi_eval(spec, xi, (u[0] + h, u[1])) - phi_eval(spec, xi, (u[0] - h, u[1]))) / (2 * h)
    fd2 = (phi_eval(spec, xi, (u[0], u[1] + h)) - phi_eval(spec, xi, (u[0], u[1] - h))) / (2 * h)
    np.testing.assert_allclose(grad, [fd0, fd1, fd2], rtol=1e-6, atol=1e-8)
