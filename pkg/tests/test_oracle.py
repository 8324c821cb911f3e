"""Discretized direct minimizer: projection, energy, comparisons."""

import math

import numpy as np
import pytest

from eqm import onecut, oracle, twocut

from conftest import quartic_field, semicircle_field


def test_matvec_matches_dense():
    field = semicircle_field(1.0)
    prob = oracle.discretize(field, -1.0, 1.0, 257)
    rng = np.random.default_rng(3)
    v = rng.standard_normal(prob.n)
    np.testing.assert_allclose(prob.matvec(v), prob.kernel @ v, atol=1e-10)


def test_simplex_projection_properties():
    rng = np.random.default_rng(5)
    v = rng.standard_normal(200)
    total = 37.5
    p = oracle._project_scaled_simplex(v, total)
    assert np.all(p >= 0.0)
    assert np.sum(p) == pytest.approx(total, rel=1e-12)
    # projection is idempotent
    np.testing.assert_allclose(oracle._project_scaled_simplex(p, total), p, atol=1e-12)
    # feasible points project to themselves
    q = np.abs(rng.standard_normal(50))
    q *= total / q.sum()
    np.testing.assert_allclose(oracle._project_scaled_simplex(q, total), q, atol=1e-12)


def test_energy_gradient_consistency():
    field = semicircle_field(1.0)
    prob = oracle.discretize(field, -1.0, 1.0, 101)
    rng = np.random.default_rng(11)
    psi = np.abs(rng.standard_normal(prob.n))
    psi /= prob.h * psi.sum()
    d = rng.standard_normal(prob.n)
    eps = 1e-6
    fd = (prob.energy(psi + eps * d) - prob.energy(psi - eps * d)) / (2 * eps)
    assert fd == pytest.approx(prob.h * float(prob.gradient(psi) @ d), rel=1e-5)


def test_semicircle_oracle_agreement():
    field = semicircle_field(1.0)
    sol = onecut.solve_endpoints(field)
    tab = onecut.density(sol, field, 400)
    prob = oracle.discretize(field, -1.0, 1.0, 801)
    res = oracle.direct_minimize(prob)
    assert res.converged
    metrics = oracle.compare(tab, res)
    assert metrics["l1_distance"] < 2e-2
    assert metrics["band_count"] == 1
    assert metrics["edge_error"] < 2.0 * prob.h
    assert metrics["optimality_gap"] > -1e-8
    assert metrics["active_gradient_spread"] < 1e-3
    assert metrics["inactive_gradient_margin"] > -1e-3
    # multiplier approximates -l
    assert metrics["multiplier"] == pytest.approx(-sol.lagrange_l, abs=5e-3)


def test_quartic_oracle_band_detection():
    field = quartic_field(-10.0)
    sol = twocut.solve_endpoints_symmetric(field)
    tab = twocut.density_symmetric(sol, field, 400)
    prob = oracle.discretize(field, -3.0, 3.0, 1001)
    res = oracle.direct_minimize(prob)
    metrics = oracle.compare(tab, res)
    assert metrics["band_count"] == 2
    assert metrics["edge_error"] < 2.0 * prob.h
    assert metrics["optimality_gap"] > -1e-8
    assert metrics["active_gradient_spread"] < 1e-3
    assert metrics["inactive_gradient_margin"] > -1e-3


def test_self_comparison_is_exact():
    field = semicircle_field(1.0)
    prob = oracle.discretize(field, -1.0, 1.0, 301)
    res = oracle.direct_minimize(prob, iters=5000)
    metrics = oracle.compare(res.psi, res)
    assert metrics["l1_distance"] == 0.0
    assert abs(metrics["optimality_gap"]) < 1e-12


def test_energy_shift_invariance_of_minimizer():
    # adding a constant to V shifts energies, not the minimizer
    f0 = semicircle_field(1.0)
    prob0 = oracle.discretize(f0, -1.0, 1.0, 301)
    res0 = oracle.direct_minimize(prob0, iters=20000)
    prob1 = oracle.discretize(f0, -1.0, 1.0, 301)
    prob1.potential += 5.0
    res1 = oracle.direct_minimize(prob1, iters=20000)
    np.testing.assert_allclose(res0.psi, res1.psi, atol=1e-8)


def test_not_converged_flag():
    field = semicircle_field(1.0)
    prob = oracle.discretize(field, -1.0, 1.0, 301)
    res = oracle.direct_minimize(prob, iters=3)
    assert not res.converged
    assert res.iterations == 3
