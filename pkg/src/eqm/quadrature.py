"""Gauss-Chebyshev band quadrature, principal values, and log kernels.

All band integrals carry the weight 1/sqrt((u1 - mu)(mu - u2)) on the
interval (u2, u1) with u1 > u2.  Principal values use the standard
subtraction trick; the smooth part of the subtracted kernel then falls
to regular Gauss-Chebyshev quadrature.

Field-aware variants (``field_band_integral`` and friends) integrate a
derivative of an external field using local band coordinates throughout,
which preserves accuracy when the band is many orders of magnitude
narrower than its distance from the origin.  The ``*_delta`` forms take
a prebuilt ``LocalField`` plus endpoint offsets in its local coordinate;
solvers that track endpoints as anchor-plus-offset call these directly,
so the offsets never round through a single absolute float.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .density import DensityTable
from .errors import InvalidInterval, SingularPoint
from .field import LocalField

__all__ = [
    "band_integral",
    "symmetric_band_integral",
    "pv_band_integral",
    "log_kernel_integral",
    "field_band_integral",
    "field_symmetric_band_integral",
    "field_pv_band_integral",
    "field_band_integral_delta",
    "field_symmetric_band_integral_delta",
    "field_pv_band_integral_delta",
    "pv_band_integral_delta",
    "r_branch",
    "chebyshev_rule",
]

_DEFAULT_M = 64
_MAX_M = 4096
_REL_TOL = 1e-12


@lru_cache(maxsize=64)
def chebyshev_rule(m):
    """First-kind Gauss-Chebyshev nodes (ascending) and uniform weight."""
    j = np.arange(1, m + 1)
    x = np.cos((2.0 * j - 1.0) * np.pi / (2.0 * m))[::-1].copy()
    return x, np.pi / m


def _check_interval(u1, u2):
    if not u1 > u2:
        raise InvalidInterval(f"need u1 > u2, got u1={u1}, u2={u2}")


def _adaptive(evaluate, m):
    """Run evaluate(m) with doubling until the relative change is tiny."""
    if m is not None:
        return evaluate(m)
    m = _DEFAULT_M
    prev = evaluate(m)
    while m < _MAX_M:
        m *= 2
        cur = evaluate(m)
        if abs(cur - prev) <= _REL_TOL * max(1.0, abs(cur)):
            return cur
        prev = cur
    return prev


def band_integral(f, u1, u2, m=None):
    """Integral of f(mu)/sqrt((u1-mu)(mu-u2)) over (u2, u1).

    Parameters
    ----------
    f : callable
        Smooth function of a float array.
    u1, u2 : float
        Band endpoints, u1 > u2.
    m : int, optional
        Number of nodes; adaptive doubling from 64 when omitted.

    Returns
    -------
    float
    """
    _check_interval(u1, u2)
    mid = 0.5 * (u1 + u2)
    half = 0.5 * (u1 - u2)

    def evaluate(mm):
        x, w = chebyshev_rule(mm)
        return w * float(np.sum(f(mid + half * x)))

    return _adaptive(evaluate, m)


def symmetric_band_integral(f, u1, u2, m=None):
    """Integral of f(mu)/sqrt((u1^2-mu^2)(mu^2-u2^2)) over (u2, u1).

    Requires 0 < u2 < u1.  Uses the substitution s = mu^2.
    """
    if not 0.0 < u2 < u1:
        raise InvalidInterval(f"need 0 < u2 < u1, got u1={u1}, u2={u2}")

    def g(s):
        mu = np.sqrt(s)
        return f(mu) / (2.0 * mu)

    return band_integral(g, u1 * u1, u2 * u2, m=m)


def _pv_core(fdelta, d1, d2, dxi, m, guard_scale):
    """PV of fdelta(d)/((dxi-d) sqrt((d1-d)(d-d2))) in a local coordinate."""
    if not d1 > d2:
        raise InvalidInterval(f"need d1 > d2, got d1={d1}, d2={d2}")
    if min(abs(dxi - d1), abs(dxi - d2)) < 1e-12 * guard_scale:
        raise SingularPoint("evaluation point coincides with a band endpoint")
    dmid = 0.5 * (d1 + d2)
    half = 0.5 * (d1 - d2)
    inside = d2 < dxi < d1

    if inside:
        fxi = float(np.asarray(fdelta(np.full(1, float(dxi))))[0])

        def evaluate(mm):
            x, w = chebyshev_rule(mm)
            d = dmid + half * x
            return w * float(np.sum((fdelta(d) - fxi) / (dxi - d)))

    else:

        def evaluate(mm):
            x, w = chebyshev_rule(mm)
            d = dmid + half * x
            return w * float(np.sum(fdelta(d) / (dxi - d)))

    return _adaptive(evaluate, m)


def _guard_scale(u1, u2):
    return max(u1 - u2, 1e-6 * max(1.0, abs(u1), abs(u2)))


def pv_band_integral(f, u1, u2, xi, m=None):
    """Principal value of f(mu)/((xi-mu) sqrt((u1-mu)(mu-u2))) over (u2, u1).

    For xi inside the band the pole is removed by subtracting f(xi),
    whose own principal value vanishes.  For xi outside, the integrand
    is regular.  Raises SingularPoint when xi sits on an endpoint.
    """
    _check_interval(u1, u2)
    mid = 0.5 * (u1 + u2)
    half = 0.5 * (u1 - u2)
    return _pv_core(
        lambda d: f(mid + d), half, -half, xi - mid, m, _guard_scale(u1, u2)
    )


def pv_band_integral_delta(fdelta, d1, d2, dxi, m=None, guard_scale=None):
    """PV of fdelta(d)/((dxi-d) sqrt((d1-d)(d-d2))) in offset coordinates.

    fdelta consumes offsets from the caller's anchor; d1 > d2 bracket the
    band and dxi places the pole, all in the same offset coordinate.
    """
    if guard_scale is None:
        guard_scale = max(d1 - d2, 1e-12)
    return _pv_core(fdelta, d1, d2, dxi, m, guard_scale)


def field_band_integral_delta(lf, d1, d2, order=1, m=None, dtype=np.float64):
    """Integral of V^(order)/sqrt weight with the band given as offsets.

    The band is (center + d2, center + d1) for the LocalField's center;
    nodes are formed directly in the offset coordinate.
    """
    if not d1 > d2:
        raise InvalidInterval(f"need d1 > d2, got d1={d1}, d2={d2}")
    dmid = 0.5 * (d1 + d2)
    half = 0.5 * (d1 - d2)

    def evaluate(mm):
        x, w = chebyshev_rule(mm)
        return w * float(np.sum(lf.deriv(dmid + half * x, order, dtype=dtype)))

    return _adaptive(evaluate, m)


def field_band_integral(field, u1, u2, order=1, m=None):
    """Integral of V^(order)(mu)/sqrt((u1-mu)(mu-u2)) in band coordinates."""
    _check_interval(u1, u2)
    lf = LocalField(field, u2, u1, max_order=order)
    d1 = float(lf.to_delta(u1))
    d2 = float(lf.to_delta(u2))
    return field_band_integral_delta(lf, d1, d2, order=order, m=m)


def field_symmetric_band_integral_delta(
    lf, d1, d2, order=1, m=None, dtype=np.float64
):
    """Integral of V^(order)/sqrt((u1^2-mu^2)(mu^2-u2^2)) in offsets.

    Requires the band (center + d2, center + d1) to sit strictly in the
    positive half line.  The vanishing factors (u1-mu)(mu-u2) are formed
    from offsets alone; the smooth factors (u1+mu)(mu+u2) from the
    center in a plain float sum.
    """
    if not d1 > d2:
        raise InvalidInterval(f"need d1 > d2, got d1={d1}, d2={d2}")
    twoc = float(2.0 * lf.center_long)
    dmid = 0.5 * (d1 + d2)
    half = 0.5 * (d1 - d2)

    def evaluate(mm):
        x, w = chebyshev_rule(mm)
        d = dmid + half * x
        plus = (twoc + d + d1) * (twoc + d + d2)
        vals = lf.deriv(d, order, dtype=dtype) / np.sqrt(plus)
        return w * float(np.sum(vals))

    return _adaptive(evaluate, m)


def field_symmetric_band_integral(field, u1, u2, order=1, m=None):
    """Integral of V^(order)(mu)/sqrt((u1^2-mu^2)(mu^2-u2^2)) over (u2, u1)."""
    if not 0.0 < u2 < u1:
        raise InvalidInterval(f"need 0 < u2 < u1, got u1={u1}, u2={u2}")
    lf = LocalField(field, u2, u1, max_order=order)
    d1 = float(lf.to_delta(u1))
    d2 = float(lf.to_delta(u2))
    return field_symmetric_band_integral_delta(lf, d1, d2, order=order, m=m)


def field_pv_band_integral_delta(
    lf, d1, d2, dxi, order=1, m=None, dtype=np.float64, guard_scale=None
):
    """PV of V^(order)/((xi-mu) sqrt weight) with band and pole as offsets."""

    def fdelta(d):
        return lf.deriv(d, order, dtype=dtype)

    if guard_scale is None:
        guard_scale = max(d1 - d2, 1e-12)
    return _pv_core(fdelta, d1, d2, dxi, m, guard_scale)


def field_pv_band_integral(field, u1, u2, xi, order=1, m=None):
    """PV of V^(order)(mu)/((xi-mu) sqrt((u1-mu)(mu-u2))) in band coordinates.

    Inside the band the subtracted difference quotient is evaluated from
    local coordinates, keeping full accuracy on very narrow bands.
    """
    _check_interval(u1, u2)
    lf = LocalField(field, min(u2, xi), max(u1, xi), max_order=order)
    d1 = float(lf.to_delta(u1))
    d2 = float(lf.to_delta(u2))
    dxi = float(lf.to_delta(xi))
    return field_pv_band_integral_delta(
        lf, d1, d2, dxi, order=order, m=m, guard_scale=_guard_scale(u1, u2)
    )


def log_kernel_integral(density, xi):
    """Logarithmic potential (1/pi) * integral log|xi-mu| psi(mu) dmu.

    Parameters
    ----------
    density : DensityTable
    xi : float or array_like

    Notes
    -----
    Exact sine-series evaluation against the Chebyshev samples of each
    band; accurate on and off the support.
    """
    return density.log_potential(xi)


def r_branch(xi, u):
    """Real branch of R(xi) = sqrt(prod (xi - u_i)) off the support.

    The branch is positive for xi above the largest endpoint and is
    continued so that R(xi) ~ xi^(g+1) at infinity: the sign alternates
    with the parity of the number of endpoints to the right of xi.

    Parameters
    ----------
    xi : float or array_like
        Points off the support (gaps and exterior).
    u : sequence of float
        Endpoints in descending order, even count.

    Raises
    ------
    SingularPoint
        If xi lies strictly inside a band, where R is imaginary.
    """
    u = np.asarray(u, dtype=float)
    xs = np.atleast_1d(np.asarray(xi, dtype=float))
    prod = np.ones(xs.shape)
    for ui in u:
        prod = prod * (xs - ui)
    if np.any(prod < 0.0):
        raise SingularPoint("r_branch called inside a band")
    nright = (xs[:, None] < u[None, :]).sum(axis=1)
    sign = np.where(nright % 4 >= 2, -1.0, 1.0)
    out = sign * np.sqrt(prod)
    return out if np.ndim(xi) else float(out[0])
