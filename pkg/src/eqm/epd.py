"""Mean-value evaluators for the band-count-g density and potential kernels.

The central objects are two functions Phi_g and Psi_g of a point xi and
an endpoint vector u (length 2g+2, descending).  Both are weighted means
of a derivative of the external field over nested affine pullbacks of
the arguments:

    a_0 = xi,   a_k = (1+m_k)/2 * a_{k-1} + (1-m_k)/2 * u_k,

with m_k drawn from a Jacobi weight (1-m)^(-1/2) (1+m)^((k-1)/2) on
(-1, 1).  Phi_g uses the (g+2)-th derivative of V, Psi_g the (g+1)-th.
The normalization is fixed numerically by the diagonal (boundary)
condition: on the full diagonal xi = u_1 = ... = u_{2g+2},

    Phi_g = V^(g+2)(xi) / (2 (g+1)!),   Psi_g = V^(g+1)(xi) / (2 (g+1)!).

Both satisfy the same hyperbolic Euler-Poisson-Darboux-type system in
(xi, u); ``epd_residual`` measures it by finite differences.

The density on band j (counting from the right) of a valid solution is
psi(xi) = 2 (-1)^(j-1) sqrt(-prod(xi - u_i)) Phi_g(xi), and closed
one-dimensional reductions of Phi are provided for g = 0 and for the
reflection-symmetric g = 1 case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .errors import InvalidInterval, NotEven, SingularPoint
from .field import FieldSpec, LocalField
from .quadrature import (
    band_integral,
    field_pv_band_integral,
    field_symmetric_band_integral,
    pv_band_integral,
    r_branch,
)

__all__ = [
    "EpdSpec",
    "phi_eval",
    "phi_eval_grad",
    "phi_eval_anchored",
    "epd_residual",
    "epd2_eval",
    "phi0_closed",
    "phi1_symmetric_closed",
    "psi1_symmetric_sum",
    "default_nodes",
]

LONG = np.longdouble

_DEFAULT_NODES = {0: 32, 1: 24}


def default_nodes(g):
    """Default per-dimension node count of the tensor rule."""
    return _DEFAULT_NODES[g]


@dataclass(frozen=True)
class EpdSpec:
    """Selects the kernel: band count g, 'phi' or 'psi', and the field."""

    g: int
    which: str
    field: FieldSpec

    def __post_init__(self):
        if self.g not in (0, 1):
            raise ValueError("only g in {0, 1} is supported")
        if self.which not in ("phi", "psi"):
            raise ValueError("which must be 'phi' or 'psi'")

    @property
    def order(self):
        return self.g + (2 if self.which == "phi" else 1)


def _jacobi_poly(n, alpha, beta, x):
    """Jacobi polynomial P_n and derivative at x, by the recurrence.

    Extended precision throughout; x may be an array.
    """
    a = LONG(alpha)
    b = LONG(beta)
    x = np.asarray(x, dtype=LONG)
    p_prev = np.ones_like(x)
    d_prev = np.zeros_like(x)
    if n == 0:
        return p_prev, d_prev
    slope = 0.5 * (a + b + 2.0)
    p = slope * x + 0.5 * (a - b)
    d = np.full_like(x, slope)
    for j in range(2, n + 1):
        c1 = 2.0 * j * (j + a + b) * (2.0 * j + a + b - 2.0)
        c2 = (2.0 * j + a + b - 1.0) * (a * a - b * b)
        c3 = (
            (2.0 * j + a + b - 2.0)
            * (2.0 * j + a + b - 1.0)
            * (2.0 * j + a + b)
        )
        c4 = 2.0 * (j + a - 1.0) * (j + b - 1.0) * (2.0 * j + a + b)
        lin = c3 * x + c2
        p_new = (lin * p - c4 * p_prev) / c1
        d_new = (lin * d + c3 * p - c4 * d_prev) / c1
        p_prev, p = p, p_new
        d_prev, d = d, d_new
    return p, d


@lru_cache(maxsize=32)
def _jacobi_rule(m, k):
    """Nodes/weights for variable slot k (1-based): Jacobi(-1/2, (k-1)/2).

    Float64 nodes from scipy are sharpened by Newton steps on the
    recurrence in extended precision, and weights rebuilt from
    w ~ 1/((1-x^2) P'^2).  The rule's relative accuracy bounds how well
    the tensor mean can resolve a cancelling integrand, so float64
    nodes would floor Phi/Psi at ~1e-16 of the largest V-derivative.
    """
    alpha, beta = -0.5, 0.5 * (k - 1)
    x, _ = roots_jacobi(m, alpha, beta)
    x = x.astype(LONG)
    for _ in range(3):
        p, d = _jacobi_poly(m, alpha, beta, x)
        x = x - p / d
    _, d = _jacobi_poly(m, alpha, beta, x)
    w = 1.0 / ((1.0 - x * x) * d * d)
    mass = LONG(2.0) ** LONG(0.5 * k) * LONG(
        math.exp(
            math.lgamma(0.5)
            + math.lgamma(0.5 * (k + 1))
            - math.lgamma(0.5 * k + 1.0)
        )
    )
    w *= mass / np.sum(w)
    return x, w


@lru_cache(maxsize=8)
def _normalization(g, m):
    """Normalization constant fixed by the diagonal boundary condition.

    With V = xi^(g+2), the unnormalized tensor mean on the full diagonal
    at xi = 1 equals (g+2)! times the product of the weight masses, while
    the boundary condition requires (g+2)!/(2 (g+1)!) = (g+2)/2.
    Computed from the same cached rules, so any common factor in a
    slot's weights cancels exactly against the tensor contraction.
    """
    wtot = LONG(1.0)
    for k in range(1, 2 * g + 3):
        _, w = _jacobi_rule(m, k)
        wtot *= np.sum(w)
    unnorm = wtot * math.factorial(g + 2)
    return (LONG(0.5) * (g + 2)) / unnorm


def _validate_u(g, u):
    u = np.asarray(u)
    if u.shape != (2 * g + 2,):
        raise ValueError(f"endpoint vector must have length {2 * g + 2}")
    if np.any(np.diff(u.astype(float)) > 0.0):
        raise ValueError("endpoints must be in descending order")
    return u


def _tensor_eval(field, g, order, xi, u, m, want_grad=False, dtype=np.float64):
    """Nested-affine tensor quadrature at absolute coordinates.

    Builds a local expansion over the hull of the points and hands the
    exact local offsets to the core.  Longdouble inputs keep their
    precision through the offset computation.
    """
    pts = np.concatenate(
        [np.atleast_1d(np.asarray(xi, dtype=LONG)), np.asarray(u, dtype=LONG)]
    )
    lo = float(min(pts))
    hi = float(max(pts))
    lf = LocalField(field, lo, hi, max_order=order + (1 if want_grad else 0))
    d = pts - lf.center_long
    return _tensor_core(lf, g, order, d, m, want_grad=want_grad, dtype=dtype)


def _tensor_core(lf, g, order, d, m, want_grad=False, dtype=np.float64):
    """Core nested-affine tensor quadrature in local offsets d[0]=xi, d[1:]=u."""
    nvar = 2 * g + 2
    d = np.asarray(d).astype(dtype)

    avecs, bvecs, wvecs = [], [], []
    for k in range(1, nvar + 1):
        x, w = _jacobi_rule(m, k)
        avecs.append((0.5 * (1.0 + x)).astype(dtype))
        bvecs.append((0.5 * (1.0 - x)).astype(dtype))
        wvecs.append(w.astype(dtype))

    arg = d[0]
    for k in range(nvar):
        arg = np.multiply.outer(arg, avecs[k]) + d[k + 1] * bvecs[k]

    m0 = dtype(_normalization(g, m))
    fvals = lf.deriv(arg, order, dtype=dtype)

    def contract(tensor, axis_vecs):
        out = tensor
        for vec in reversed(axis_vecs):
            out = np.tensordot(out, vec, axes=([-1], [0]))
        return float(out)

    value = m0 * contract(fvals, wvecs)
    if not want_grad:
        return value

    fprime = lf.deriv(arg, order + 1, dtype=dtype)
    grads = np.empty(nvar + 1)
    # d(arg)/d(xi) factorizes as prod_k a_k over the tensor axes
    grads[0] = m0 * contract(fprime, [w * a for w, a in zip(wvecs, avecs)])
    for j in range(1, nvar + 1):
        vecs = []
        for k in range(nvar):
            if k + 1 < j:
                vecs.append(wvecs[k])
            elif k + 1 == j:
                vecs.append(wvecs[k] * bvecs[k])
            else:
                vecs.append(wvecs[k] * avecs[k])
        grads[j] = m0 * contract(fprime, vecs)
    return value, grads


def phi_eval(spec, xi, u, m=None, dtype=np.float64):
    """Canonical tensor-quadrature value of Phi_g or Psi_g.

    Parameters
    ----------
    spec : EpdSpec
    xi : float
    u : sequence of float
        Endpoint vector, descending, length 2g+2 (ties allowed).
    m : int, optional
        Nodes per dimension (default 32 for g=0, 24 for g=1).
    dtype : numpy dtype
        float64, or longdouble for extended-precision accumulation.
    """
    u = _validate_u(spec.g, u)
    if m is None:
        m = _DEFAULT_NODES[spec.g]
    return _tensor_eval(spec.field, spec.g, spec.order, xi, u, m, dtype=dtype)


def phi_eval_grad(spec, xi, u, m=None, dtype=np.float64):
    """Value and gradient of Phi_g/Psi_g w.r.t. (xi, u_1, ..., u_{2g+2}).

    The gradient differentiates under the integral sign, which is exact
    for the quadrature at hand (the integrand's argument is affine in
    every variable).
    """
    u = _validate_u(spec.g, u)
    if m is None:
        m = _DEFAULT_NODES[spec.g]
    return _tensor_eval(
        spec.field, spec.g, spec.order, xi, u, m, want_grad=True, dtype=dtype
    )


def phi_eval_anchored(spec, lf, dxi, du, m=None, want_grad=False,
                      dtype=np.float64):
    """Phi/Psi evaluation with the point and endpoints as local offsets.

    Parameters
    ----------
    spec : EpdSpec
    lf : LocalField
        Prebuilt expansion whose center is the caller's anchor; its
        max_order must cover spec.order (+1 with gradients).
    dxi : float
        Offset of the evaluation point from the anchor.
    du : sequence of float
        Endpoint offsets, descending, length 2g+2 (ties allowed).

    Solvers that keep endpoints as anchor-plus-offset use this entry so
    the tensor arguments are formed from offsets exactly, without the
    absolute coordinates ever rounding through a float.
    """
    du = np.asarray(du, dtype=float)
    if du.shape != (2 * spec.g + 2,):
        raise ValueError(f"offset vector must have length {2 * spec.g + 2}")
    if np.any(np.diff(du) > 0.0):
        raise ValueError("offsets must be in descending order")
    need = spec.order + (1 if want_grad else 0)
    if lf.mode == "series" and lf.max_order < need:
        raise ValueError(f"LocalField max_order {lf.max_order} < {need}")
    if m is None:
        m = _DEFAULT_NODES[spec.g]
    d = np.concatenate([[float(dxi)], du])
    return _tensor_core(lf, spec.g, spec.order, d, m, want_grad=want_grad,
                        dtype=dtype)


def epd_residual(spec, xi, u, i, j, h):
    """Finite-difference residual of the hyperbolic pair equation.

    Index 0 denotes the xi slot, indices 1..2g+2 the endpoint slots.
    For i, j >= 1 the residual is

        2 (u_i - u_j) d2F/du_i du_j - dF/du_i + dF/du_j,

    and for a pair involving xi (i = 0 or j = 0, endpoint index i0)

        2 (xi - u_i0) d2F/dxi du_i0 - dF/dxi + 2 dF/du_i0.

    Central differences with step h; the residual of the analytic
    kernels decays as O(h^2).
    """
    if i == j:
        raise ValueError("need two distinct slots")
    u = np.asarray(u, dtype=float)
    mm = _DEFAULT_NODES[spec.g]

    def f(dxi, du):
        # bypasses ordering validation: difference stencils may cross ties
        return _tensor_eval(
            spec.field, spec.g, spec.order, float(xi + dxi), u + du, mm
        )

    def unit(idx):
        e = np.zeros(len(u))
        e[idx - 1] = 1.0
        return e

    if i == 0 or j == 0:
        i0 = i + j  # the endpoint slot of the pair
        e = unit(i0)
        mixed = (
            f(h, h * e) - f(h, -h * e) - f(-h, h * e) + f(-h, -h * e)
        ) / (4.0 * h * h)
        dxi = (f(h, 0.0 * e) - f(-h, 0.0 * e)) / (2.0 * h)
        dui = (f(0.0, h * e) - f(0.0, -h * e)) / (2.0 * h)
        return 2.0 * (xi - u[i0 - 1]) * mixed - dxi + 2.0 * dui
    ei, ej = unit(i), unit(j)
    mixed = (
        f(0.0, h * ei + h * ej)
        - f(0.0, h * ei - h * ej)
        - f(0.0, -h * ei + h * ej)
        + f(0.0, -h * ei - h * ej)
    ) / (4.0 * h * h)
    di = (f(0.0, h * ei) - f(0.0, -h * ei)) / (2.0 * h)
    dj = (f(0.0, h * ej) - f(0.0, -h * ej)) / (2.0 * h)
    return 2.0 * (u[i - 1] - u[j - 1]) * mixed - di + dj


def epd2_eval(boundary, rho, x1, x2, m=64):
    """Two-variable mean-value solution with parameter rho > 0.

    Averages the boundary function over the affine pullback
    (1+s)/2 * x1 + (1-s)/2 * x2 against the Jacobi weight
    (1-s)^(-1/2) (1+s)^((rho-2)/2); returns boundary(x1) exactly on the
    diagonal x1 == x2.
    """
    if not rho > 0.0:
        raise ValueError("rho must be positive")
    if x1 == x2:
        return float(boundary(x1))
    x, w = roots_jacobi(m, -0.5, 0.5 * (rho - 2.0))
    args = 0.5 * (1.0 + x) * x1 + 0.5 * (1.0 - x) * x2
    vals = np.asarray([boundary(a) for a in args], dtype=float)
    return float(np.dot(w, vals) / np.sum(w))


def _window(u1, u2):
    return 1e-6 * (u1 - u2)


def phi0_closed(field, xi, u1, u2, m=None):
    """Closed one-dimensional form of Phi_0 away from the endpoints.

    Inside the band this is the principal-value reduction; outside it
    carries the extra residue term V'(xi)/(2 R(xi)) with the real branch
    of R.  Within 1e-6 band widths of an endpoint the evaluation routes
    to the canonical tensor quadrature.
    """
    if not u1 > u2:
        raise InvalidInterval(f"need u1 > u2, got ({u1}, {u2})")
    w = _window(u1, u2)
    if min(abs(xi - u1), abs(xi - u2)) < w:
        spec = EpdSpec(0, "phi", field)
        return phi_eval(spec, xi, (u1, u2))
    pv = field_pv_band_integral(field, u1, u2, xi, order=1, m=m)
    if u2 < xi < u1:
        return -pv / (2.0 * math.pi)
    r = r_branch(xi, (u1, u2))
    vp = float(field.eval(xi, 1))
    return vp / (2.0 * r) - pv / (2.0 * math.pi)


def phi1_symmetric_closed(field, xi, u1, u2, m=None):
    """Closed form of Phi_1 for even fields on symmetric endpoints.

    Endpoint vector (u1, u2, -u2, -u1) with 0 < u2 < u1.  Odd in xi.
    Routes to the canonical evaluator near the four endpoints.
    """
    if not field.is_even:
        raise NotEven("phi1_symmetric_closed requires an even field")
    if not 0.0 < u2 < u1:
        raise InvalidInterval(f"need 0 < u2 < u1, got ({u1}, {u2})")
    ax = abs(xi)
    w = _window(u1, u2)
    if min(abs(ax - u1), abs(ax - u2)) < w:
        spec = EpdSpec(1, "phi", field)
        return phi_eval(spec, xi, (u1, u2, -u2, -u1))
    if xi == 0.0:
        return 0.0
    lf = LocalField(field, u2, u1, max_order=1)

    if u2 < ax < u1:
        def gfun(mu):
            return lf.deriv(lf.to_delta(mu), 1) / (
                (mu + ax) * np.sqrt((u1 + mu) * (mu + u2))
            )

        pv = pv_band_integral(gfun, u1, u2, ax, m=m)
        return -math.copysign(1.0, xi) * ax / math.pi * pv

    def f(mu):
        return lf.deriv(lf.to_delta(mu), 1) / (
            (mu * mu - xi * xi) * np.sqrt((u1 + mu) * (mu + u2))
        )

    uvec = (u1, u2, -u2, -u1)
    r = r_branch(xi, uvec)
    vp = float(field.eval(xi, 1))
    integral = band_integral(f, u1, u2, m=m)
    return vp / (2.0 * r) + xi / math.pi * integral


def psi1_symmetric_sum(field, u1, u2, m=None):
    """Psi_1(u1) + Psi_1(u2) on symmetric endpoints, via one band integral."""
    if not field.is_even:
        raise NotEven("psi1_symmetric_sum requires an even field")
    return field_symmetric_band_integral(field, u1, u2, order=1, m=m) / math.pi
