"""Independent certification that a constructed density minimizes the energy.

Checks, on finite probe grids plus a structural tail argument:

* the equality of the effective potential ``L(psi) - V`` across the
  support (constant Lagrange multiplier),
* the inequality ``L(psi) - V <= l`` off the support,
* unit mass,
* the pointwise sign condition on the band factor and the strict signs
  of the running integrals of ``R * Phi`` over gaps and exterior rays.

Large external fields make ``L(psi) - V - l`` a difference of huge,
nearly equal numbers, so all potential differences are taken relative
to a reference point on the support, with the field part accumulated
termwise in extended precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import chebyshev_angles
from .epd import EpdSpec, phi_eval
from .field import eval_derivative, potential_difference
from .quadrature import r_branch
from .rhp import EndpointVector
from .wells import global_minimizer

__all__ = [
    "VariationalReport",
    "effective_potential",
    "check_variational",
    "check_sign_and_gaps",
    "far_field_deviation",
]

_TOL_EQ = 1e-6
_TOL_INEQ = 1e-8
_TOL_MASS = 1e-8
_SIGN_POINTS = 50
_REGION_POINTS = 20
_TAIL_DOUBLINGS = 9
_SEGMENT_NODES = 12


@dataclass(frozen=True)
class VariationalReport:
    """Outcome of the variational checks on one density.

    A passing report has ``equality_deviation < tol_eq``,
    ``inequality_margin > -tol_ineq``, ``mass_residual < tol_mass`` and
    both booleans true.
    """

    equality_deviation: float
    inequality_margin: float
    mass_residual: float
    constraint_sign_ok: bool
    gap_integral_ok: bool

    def passed(self, tol_eq=_TOL_EQ, tol_ineq=_TOL_INEQ, tol_mass=_TOL_MASS):
        return (
            self.equality_deviation < tol_eq
            and self.inequality_margin > -tol_ineq
            and self.mass_residual < tol_mass
            and self.constraint_sign_ok
            and self.gap_integral_ok
        )

    def as_dict(self):
        return {
            "equality_deviation": self.equality_deviation,
            "inequality_margin": self.inequality_margin,
            "mass_residual": self.mass_residual,
            "constraint_sign_ok": self.constraint_sign_ok,
            "gap_integral_ok": self.gap_integral_ok,
            "passed": self.passed(),
        }


def effective_potential(density, field, xi):
    """``L(psi)(xi) - V(xi)``: constant on the support of a minimizer."""
    lp = density.log_potential(xi)
    return lp - eval_derivative(field, xi, 0)


def _reference_point(density):
    widest = max(density.bands, key=lambda b: b.hi - b.lo)
    return widest.mid


def _probe_grid(density, field, probe_n):
    """Off-support probes: a window around the support, the potential
    wells, and far points.  The wells are where a misplaced density
    violates the inequality hardest, so they are probed explicitly even
    when they fall outside the window."""
    u = density.endpoints_desc
    umax, umin = float(u[0]), float(u[-1])
    diam = umax - umin
    window = np.linspace(umin - 2.0 * diam, umax + 2.0 * diam, probe_n)
    ufar = max(abs(umax), abs(umin))
    far = np.array([-100.0, -10.0, 10.0, 100.0]) * ufar
    try:
        well = float(global_minimizer(field)[0])
        wells = [well, -well] if field.is_even else [well]
    except Exception:
        wells = []
    pts = np.concatenate([window, far, np.array(wells)])
    buf = 1e-9 * max(1.0, diam)
    keep = np.ones(pts.shape, dtype=bool)
    for b in density.bands:
        keep &= (pts < b.lo - buf) | (pts > b.hi + buf)
    return pts[keep]


def check_variational(
    density,
    field,
    probe_n=120,
    tol_eq=_TOL_EQ,
    tol_ineq=_TOL_INEQ,
    tol_mass=_TOL_MASS,
):
    """Run all variational checks and collect them in a report.

    Failures are reported, never raised: a deliberately wrong density
    yields a failing report.
    """
    mass_residual = abs(density.mass() - 1.0)

    ref = _reference_point(density)
    lref = density.log_potential(ref)

    pts = np.concatenate([b.xs for b in density.bands])
    dev = (density.log_potential(pts) - lref) - potential_difference(
        field, pts, ref
    )
    equality_deviation = float(np.max(np.abs(dev)))

    probes = _probe_grid(density, field, probe_n)
    margins = potential_difference(field, probes, ref) - (
        density.log_potential(probes) - lref
    )
    inequality_margin = float(np.min(margins))

    try:
        u = EndpointVector(len(density.bands) - 1, tuple(density.endpoints_desc))
        sign_ok, gaps_ok = check_sign_and_gaps(u, field)
    except Exception:
        sign_ok, gaps_ok = False, False

    return VariationalReport(
        equality_deviation=equality_deviation,
        inequality_margin=inequality_margin,
        mass_residual=mass_residual,
        constraint_sign_ok=sign_ok,
        gap_integral_ok=gaps_ok,
    )


def far_field_deviation(density):
    """Deviation of L(psi) from the recentered mass-1 far field.

    ``L(psi)(xi) - (1/pi) log|xi - m1|`` tends to zero as ``|xi|`` grows
    (unit mass, first moment ``m1``); recentering on ``m1`` removes the
    leading ``1/xi`` term, which dominates at affordable probe distances
    for supports away from the origin.  Returns the larger absolute
    deviation at the two probes ``+-100 * max|endpoint|``.
    """
    m1 = 0.0
    for b in density.bands:
        theta = chebyshev_angles(len(b.xs))
        xs = b.mid + b.half * np.cos(theta)
        m1 += (np.pi * b.half / len(b.xs)) * float(
            np.dot(xs * b.psis_by_angle(), np.sin(theta))
        )
    u = density.endpoints_desc
    ufar = float(max(abs(u[0]), abs(u[-1])))
    out = 0.0
    for xi in (-100.0 * ufar, 100.0 * ufar):
        d = density.log_potential(xi) - math.log(abs(xi - m1)) / math.pi
        out = max(out, abs(d))
    return out


def _phi_factory(u: EndpointVector, field):
    spec = EpdSpec(u.g, "phi", field)
    uprec = u.precise

    def phi(x):
        return phi_eval(spec, float(x), uprec)

    return phi


def _band_signs_ok(u: EndpointVector, phi):
    """Band factor sign test at Chebyshev points of every band.

    On the k-th band from the right the boundary value of ``i R`` has
    real part of sign ``(-1)^k``, so a positive density needs
    ``(-1)^k Phi > 0`` there (k counted from 0).
    """
    theta = chebyshev_angles(_SIGN_POINTS)
    for k, (lo, hi) in enumerate(u.bands):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        want = 1.0 if k % 2 == 0 else -1.0
        for x in mid + half * np.cos(theta):
            if not want * phi(x) > 0.0:
                return False
    return True


def _segment_integral(f, a, b):
    nodes, weights = np.polynomial.legendre.leggauss(_SEGMENT_NODES)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return half * sum(w * f(mid + half * x) for x, w in zip(nodes, weights))


def _phi_real_roots(u: EndpointVector, field, phi):
    """Real roots of the band factor, or None for non-polynomial fields.

    For a polynomial field of degree M the band factor is a polynomial
    of degree M - g - 2 in the evaluation point, so interpolating it at
    degree+1 Chebyshev points recovers it exactly.  The running
    integrals of R*Phi are monotone between consecutive real roots,
    which turns the strict-sign checks on probe grids into certificates:
    every interior extremum is probed, and past the largest root the
    integrand cannot change sign again.
    """
    if not field.is_polynomial:
        return None
    deg = max(0, int(field.max_degree) - u.g - 2)
    if deg == 0:
        return np.empty(0)
    scale = 2.0 * max(1.0, abs(u.u[0]), abs(u.u[-1]), u.u[0] - u.u[-1])
    ys = np.cos(chebyshev_angles(deg + 1))
    vals = np.array([phi(scale * y) for y in ys])
    coef = np.polynomial.chebyshev.cheb2poly(
        np.polynomial.chebyshev.chebfit(ys, vals, deg)
    )
    floor = 1e-13 * float(np.max(np.abs(coef)))
    while len(coef) > 1 and abs(coef[-1]) < floor:
        coef = coef[:-1]
    if len(coef) <= 1:
        return np.empty(0)
    roots = np.polynomial.polynomial.polyroots(coef)
    real = roots[np.abs(roots.imag) < 1e-7 * np.maximum(1.0, np.abs(roots.real))]
    return np.sort(real.real) * scale


def _gap_running_ok(u: EndpointVector, phi, lo, hi, roots):
    """Strict positivity of the running integral of R*Phi across a gap.

    The integral starts at the lower gap edge; the square-root vanishing
    of R at both edges is absorbed by the angle substitution.  Real
    roots of the band factor inside the gap are added to the probe set:
    the running integral turns exactly there.
    """
    uvals = u.u
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)

    def f(theta):
        x = mid + half * math.cos(theta)
        return r_branch(x, uvals) * phi(x) * half * math.sin(theta)

    angles = list(chebyshev_angles(_REGION_POINTS))
    if roots is not None:
        for r in roots:
            if lo < r < hi:
                angles.append(math.acos(min(1.0, max(-1.0, (r - mid) / half))))
    total = 0.0
    upper = math.pi
    for th in sorted(angles, reverse=True):
        total += _segment_integral(f, th, upper)
        if not total > 0.0:
            return False
        upper = th
    return True


def _doubling_lock(integrand, edge, base, direction, want):
    """Heuristic tail lock for non-polynomial fields: the first of a
    doubling sequence past which the integrand keeps the demanded sign
    with strictly growing magnitude."""
    xs = [edge + direction * base * 2.0**m for m in range(_TAIL_DOUBLINGS)]
    vals = [integrand(x) for x in xs]
    for m in range(len(vals)):
        tail = vals[m:]
        if all(want * v > 0.0 for v in tail) and all(
            abs(tail[i + 1]) > abs(tail[i]) for i in range(len(tail) - 1)
        ):
            return xs[m]
    return None


def _ray_running_ok(u: EndpointVector, phi, edge, diam, direction, roots):
    """Strict sign of the running integral of R*Phi on an exterior ray.

    With the real roots of the band factor known, the ray is truncated
    just past the outermost root (no further sign change is possible)
    and the running integral is checked at nested probes, at every
    turning point, and at the truncation point.  Without root data a
    monotone doubling scan picks the truncation point instead.
    """
    uvals = u.u
    want = 1.0 if direction > 0 else -1.0

    def integrand(x):
        return r_branch(x, uvals) * phi(x)

    base = max(1.0, diam, abs(edge))
    turning = []
    if roots is not None:
        outer = [abs(r) for r in roots]
        reach = 1.05 * max(outer) + 0.05 * base if outer else 0.0
        lock = edge + direction * base
        if direction > 0:
            lock = max(lock, reach)
            turning = [r for r in roots if edge < r < lock]
        else:
            lock = min(lock, -reach)
            turning = [r for r in roots if lock < r < edge]
    else:
        lock = _doubling_lock(integrand, edge, base, direction, want)
        if lock is None:
            return False
    if not want * integrand(lock) > 0.0:
        return False

    def f(s):
        return 2.0 * s * integrand(edge + direction * s * s)

    span = abs(lock - edge)
    offsets = {span * (j / _REGION_POINTS) ** 2 for j in range(1, _REGION_POINTS + 1)}
    offsets.update(abs(r - edge) for r in turning)
    total = 0.0
    s_prev = 0.0
    for off in sorted(offsets):
        s_stop = math.sqrt(off)
        total += _segment_integral(f, s_prev, s_stop)
        if not want * total > 0.0:
            return False
        s_prev = s_stop
    return True


def check_sign_and_gaps(u: EndpointVector, field):
    """Sign condition on bands and strict gap/exterior integral signs.

    Returns ``(constraint_sign_ok, gap_integral_ok)``.  For polynomial
    fields the gap and ray checks probe every turning point of the
    running integrals and certify the tails root-free; non-polynomial
    fields fall back to a monotone doubling scan for the tail.
    """
    phi = _phi_factory(u, field)
    sign_ok = _band_signs_ok(u, phi)
    roots = _phi_real_roots(u, field, phi)

    diam = u.u[0] - u.u[-1]
    gaps_ok = True
    for lo, hi in u.gaps:
        if not _gap_running_ok(u, phi, lo, hi, roots):
            gaps_ok = False
    if not _ray_running_ok(u, phi, u.u[0], diam, +1, roots):
        gaps_ok = False
    if not _ray_running_ok(u, phi, u.u[-1], diam, -1, roots):
        gaps_ok = False
    return sign_ok, gaps_ok
