"""Closed-form large-tilt limits and endpoint scaling studies.

For V = Vstar + t*p with monic p of degree n and a dominant power
C*xi^M of Vstar on the side the well drifts to, the support endpoints
scale like |t|^(1/(M-n)) with limit constant (n/(C*M))^(1/(M-n)) when
the tilt deepens the well (odd n, or even n with t < 0), and shrink
onto the well like t^(-1/n) with a universal constant when a convex
even tilt dominates (t > 0).
"""

from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedRegime
from .onecut import density, solve_endpoints
from .twocut import density_symmetric, solve_endpoints_symmetric
from .verify import check_variational
from .wells import global_minimizer

__all__ = [
    "AsymptoticPrediction",
    "ScalingStudy",
    "predict",
    "scaling_study",
]

_REGIMES = (
    "odd-n-neg-t",
    "odd-n-pos-t",
    "even-n-neg-t",
    "even-n-pos-t-convex",
)


@dataclass(frozen=True)
class AsymptoticPrediction:
    """Large-|t| endpoint scaling for one field family and tilt sign.

    ``scaling_exponent`` is 1/(M-n) for deepening tilts and -1/n for the
    convex shrinking regime; endpoints behave like
    ``limit_constant * |t|**scaling_exponent`` (mirrored to the negative
    axis for odd n with t > 0).  ``well_location`` is the argmin of V at
    the field's own tilt magnitude (the positive one in the symmetric
    two-band regime).
    """

    regime: str
    scaling_exponent: float
    limit_constant: float
    well_location: float

    def __post_init__(self):
        if self.regime not in _REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if not self.limit_constant > 0.0:
            raise ValueError("limit_constant must be positive")

    def as_dict(self):
        return {
            "regime": self.regime,
            "scaling_exponent": self.scaling_exponent,
            "limit_constant": self.limit_constant,
            "well_location": self.well_location,
        }


def _double_factorial(k):
    """k!! with the empty-product convention (-1)!! = 0!! = 1."""
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def _side_dominant(field, side):
    """Dominant growth (C, M) of Vstar toward side * infinity.

    The effective coefficient of xi^k on the negative side flips sign
    for odd monomials; absolute powers grow identically on both sides.
    """
    best_m = None
    coeff = 0.0
    for term in field.vstar:
        a = term.exponent
        c = term.coefficient
        if term.kind == "monomial" and side < 0 and int(a) % 2 == 1:
            c = -c
        if best_m is None or a > best_m:
            best_m, coeff = a, c
        elif a == best_m:
            coeff += c
    if best_m is None or not coeff > 0.0:
        raise UnsupportedRegime(
            "the fixed field has no dominant growth on the tilted side"
        )
    return coeff, best_m


def _p_convex(p_coeffs):
    """Convexity of the tilt polynomial: p'' >= 0 on a sample grid."""
    n = len(p_coeffs) - 1
    if n < 2:
        return False
    dd = [j * (j - 1) * c for j, c in enumerate(p_coeffs) if j >= 2]
    lead = dd[-1]
    if not lead > 0.0:
        return False
    bound = 1.0 + sum(abs(c) for c in dd[:-1]) / lead
    xs = np.linspace(-bound, bound, 401)
    vals = np.zeros_like(xs)
    for j, c in enumerate(dd):
        vals += c * xs**j
    return bool(np.all(vals >= 0.0))


def predict(field, sign_of_t):
    """Scaling exponent and limit constant for one tilt sign.

    Raises UnsupportedRegime when no closed-form constant exists (a
    non-convex even tilt with t > 0, or a fixed field that does not
    dominate the tilt).
    """
    sign = 1 if sign_of_t > 0 else -1
    n = field.n
    if n < 1:
        raise UnsupportedRegime("constant tilt polynomials have no regime")

    if n % 2 == 1:
        side = 1 if sign < 0 else -1
        c, m = _side_dominant(field, side)
        if not m > n:
            raise UnsupportedRegime(
                f"fixed-field growth {m} does not dominate the tilt degree {n}"
            )
        exponent = 1.0 / (m - n)
        constant = (n / (c * m)) ** (1.0 / (m - n))
        regime = "odd-n-neg-t" if sign < 0 else "odd-n-pos-t"
    elif sign < 0:
        c, m = _side_dominant(field, 1)
        if not m > n:
            raise UnsupportedRegime(
                f"fixed-field growth {m} does not dominate the tilt degree {n}"
            )
        exponent = 1.0 / (m - n)
        constant = (n / (c * m)) ** (1.0 / (m - n))
        regime = "even-n-neg-t"
    else:
        if not _p_convex(field.p_coeffs):
            raise UnsupportedRegime(
                "no closed-form constant for a non-convex tilt with t > 0"
            )
        exponent = -1.0 / n
        constant = (
            _double_factorial(n - 2) / (math.pi * _double_factorial(n - 1))
        ) ** (1.0 / n)
        regime = "even-n-pos-t-convex"

    tmag = abs(field.t) if field.t != 0.0 else 1.0
    tilted = dataclasses.replace(field, t=sign * tmag)
    well, _ = global_minimizer(tilted, positive=(regime == "even-n-neg-t"))
    return AsymptoticPrediction(
        regime=regime,
        scaling_exponent=exponent,
        limit_constant=constant,
        well_location=float(well),
    )


def _endpoint_targets(prediction):
    """Scaled limits of (u1, u2): the signs depend on the regime."""
    c = prediction.limit_constant
    if prediction.regime == "odd-n-pos-t":
        return -c, -c
    if prediction.regime == "even-n-pos-t-convex":
        return c, -c
    return c, c


def _fmt(x):
    return f"{x:.12g}"


@dataclass
class ScalingStudy:
    """Per-decade solver endpoints against the predicted scaling."""

    prediction: AsymptoticPrediction
    rows: list

    def to_csv(self):
        twocut = self.prediction.regime == "even-n-neg-t"
        cols = ["t", "u1", "u2"]
        if twocut:
            cols += ["-u2", "-u1"]
        cols += [
            "scaled_u1",
            "scaled_u2",
            "deviation",
            "width",
            "gaps",
            "well_inside",
        ]
        lines = [",".join(cols)]
        for row in self.rows:
            if row["error"] is not None:
                cells = [_fmt(row["t"])] + [""] * (len(cols) - 1)
            else:
                u1, u2 = row["u1"], row["u2"]
                cells = [_fmt(row["t"]), _fmt(u1), _fmt(u2)]
                if twocut:
                    cells += [_fmt(-u2), _fmt(-u1)]
                cells += [
                    _fmt(row["scaled_u1"]),
                    _fmt(row["scaled_u2"]),
                    _fmt(row["deviation"]),
                    _fmt(row["width"]),
                    str(row["gaps"]),
                    str(row["well_inside"]).lower(),
                ]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def worker_count(n_jobs, default=4):
    env = os.environ.get("EQM_THREADS", "")
    try:
        cap = int(env)
    except ValueError:
        cap = 0
    if cap < 1:
        cap = default
    return max(1, min(cap, n_jobs))


def _study_row(field, prediction, sign, decade, grid_n):
    t = sign * 10.0**decade
    row = {
        "t": t,
        "u1": None,
        "u2": None,
        "scaled_u1": None,
        "scaled_u2": None,
        "deviation": None,
        "width": None,
        "gaps": None,
        "well_inside": None,
        "error": None,
    }
    tilted = dataclasses.replace(field, t=t)
    twocut = prediction.regime == "even-n-neg-t"
    try:
        if twocut:
            sol = solve_endpoints_symmetric(tilted)
        else:
            sol = solve_endpoints(tilted)
        if not sol.converged:
            row["error"] = "no convergence"
            return row
        tab = (
            density_symmetric(sol, tilted, grid_n)
            if twocut
            else density(sol, tilted, grid_n)
        )
        report = check_variational(tab, tilted, probe_n=80)
        scale = abs(t) ** prediction.scaling_exponent
        su1, su2 = sol.u1 / scale, sol.u2 / scale
        t1, t2 = _endpoint_targets(prediction)
        well, _ = global_minimizer(tilted, positive=twocut)
        wellf = float(well)
        row.update(
            u1=sol.u1,
            u2=sol.u2,
            scaled_u1=su1,
            scaled_u2=su2,
            deviation=max(abs(su1 - t1), abs(su2 - t2)),
            width=sol.u1 - sol.u2,
            gaps=1 if twocut else 0,
            well_inside=bool(sol.u2 <= wellf <= sol.u1),
        )
        if not report.passed():
            row["error"] = "verification failed"
    except Exception as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def scaling_study(field, sign_of_t, decades, grid_n=401):
    """Solve at |t| = 10^1 .. 10^decades and compare with the prediction.

    Rows of the study are independent and run on a small thread pool
    (capped by the EQM_THREADS environment variable); failures are
    recorded per row, never raised.
    """
    if decades < 3:
        raise ValueError("a scaling study needs at least 3 decades")
    sign = 1 if sign_of_t > 0 else -1
    prediction = predict(field, sign)
    ks = list(range(1, decades + 1))
    with ThreadPoolExecutor(max_workers=worker_count(len(ks))) as pool:
        rows = list(
            pool.map(
                lambda k: _study_row(field, prediction, sign, k, grid_n), ks
            )
        )
    return ScalingStudy(prediction=prediction, rows=rows)
