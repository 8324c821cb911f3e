"""Density tables: banded square-root densities sampled on Chebyshev nodes.

A ``DensityTable`` stores one or more support bands (lo, hi) together
with samples of the density at first-kind Chebyshev angles inside each
band.  The density of interest behaves like
``psi(mid + half*cos(theta)) = half * sin(theta) * w(theta)`` with a
smooth, analytic factor ``w``; the table therefore also exposes the
sine-series coefficients of ``sin(theta) * w(theta)``, from which the
mass and the logarithmic potential are obtained spectrally.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ParseError

__all__ = ["Band", "DensityTable", "chebyshev_angles"]


def chebyshev_angles(n):
    """First-kind Chebyshev angles (2j-1)pi/(2n), j = 1..n, ascending."""
    j = np.arange(1, n + 1)
    return (2.0 * j - 1.0) * np.pi / (2.0 * n)


@dataclass
class Band:
    """One support band with density samples at Chebyshev nodes.

    ``xs`` ascend inside (lo, hi); ``psis`` are the density values.  The
    node layout is xs = mid + half*cos(theta) with theta descending, so
    xs[j] corresponds to angle theta[n-1-j].
    """

    lo: float
    hi: float
    xs: np.ndarray
    psis: np.ndarray
    _coeffs: np.ndarray = dc_field(default=None, repr=False, compare=False)

    @property
    def mid(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def half(self):
        return 0.5 * (self.hi - self.lo)

    @classmethod
    def from_angles(cls, lo, hi, psis_at_angles):
        """Build from density values ordered by ascending angle."""
        n = len(psis_at_angles)
        theta = chebyshev_angles(n)
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        xs = mid + half * np.cos(theta)
        return cls(lo, hi, xs[::-1].copy(), np.asarray(psis_at_angles)[::-1].copy())

    def angles(self):
        return chebyshev_angles(len(self.xs))

    def psis_by_angle(self):
        """Density samples ordered by ascending angle (descending x)."""
        return self.psis[::-1]

    def sine_coeffs(self):
        """Coefficients b_m of sin(theta)*w = sum b_m sin((m+1) theta)."""
        if self._coeffs is None:
            n = len(self.xs)
            theta = self.angles()
            q = self.psis_by_angle() / self.half
            m = np.arange(n)
            sines = np.sin(np.outer(m + 1.0, theta))
            self._coeffs = (2.0 / n) * sines.dot(q)
        return self._coeffs

    def mass(self):
        """Integral of the density over the band (spectral quadrature)."""
        n = len(self.xs)
        theta = self.angles()
        return (np.pi * self.half / n) * float(
            np.dot(self.psis_by_angle(), np.sin(theta))
        )

    def log_potential(self, xi):
        """(1/pi) * integral of log|xi - mu| psi(mu) dmu over this band."""
        b = self.sine_coeffs()
        n = len(b)
        y = np.atleast_1d((np.asarray(xi, dtype=float) - self.mid) / self.half)
        out = np.empty(y.shape)
        ks = np.arange(1, n + 3)
        for i, yi in enumerate(y):
            if abs(yi) <= 1.0:
                phi = math.acos(min(1.0, max(-1.0, yi)))
                rho = np.cos(ks * phi)
                c0 = -math.log(2.0)
            else:
                v = math.copysign(abs(yi) + math.sqrt(yi * yi - 1.0), yi)
                rho = np.power(v, -ks)
                c0 = math.log(abs(v) / 2.0)
            total = 0.5 * b[0] * (math.log(self.half) + c0) + 0.25 * b[0] * rho[1]
            if n > 1:
                m = np.arange(1, n)
                total -= 0.5 * float(
                    np.dot(b[1:], rho[m - 1] / m - rho[m + 1] / (m + 2.0))
                )
            out[i] = self.half**2 * total
        return out if np.ndim(xi) else float(out[0])

    def interp(self, x):
        """Piecewise-linear interpolation with exact zeros at the edges."""
        xs = np.concatenate([[self.lo], self.xs, [self.hi]])
        ps = np.concatenate([[0.0], self.psis, [0.0]])
        return np.interp(x, xs, ps, left=0.0, right=0.0)


@dataclass
class DensityTable:
    """Banded density with optional Lagrange multiplier estimate.

    Parameters
    ----------
    bands : list of Band
        Ascending, non-overlapping support bands.
    lagrange_l : float or None
        Constant value of L(psi) - V on the support, if known.
    """

    bands: list
    lagrange_l: float = None

    def __post_init__(self):
        self.bands = sorted(self.bands, key=lambda b: b.lo)
        for a, b in zip(self.bands, self.bands[1:]):
            if b.lo <= a.hi:
                raise ValueError("bands must be disjoint and ascending")

    @property
    def support(self):
        return [(b.lo, b.hi) for b in self.bands]

    @property
    def endpoints_desc(self):
        u = []
        for b in reversed(self.bands):
            u.extend([b.hi, b.lo])
        return np.asarray(u)

    def mass(self):
        return sum(b.mass() for b in self.bands)

    def log_potential(self, xi):
        """Integral of log|xi - mu| against the density (all bands)."""
        vals = [b.log_potential(xi) for b in self.bands]
        return sum(vals[1:], start=vals[0])

    def interp(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for b in self.bands:
            mask = (x >= b.lo) & (x <= b.hi)
            if np.any(mask):
                out[mask] = b.interp(x[mask])
        return out

    def to_csv(self, fmt):
        """Render as CSV text with columns xi,psi plus support headers."""
        buf = io.StringIO()
        supp = ";".join(f"{fmt(b.lo)},{fmt(b.hi)}" for b in self.bands)
        buf.write(f"# support: {supp}\n")
        if self.lagrange_l is not None:
            buf.write(f"# lagrange-l: {fmt(self.lagrange_l)}\n")
        buf.write("xi,psi\n")
        for b in self.bands:
            for x, p in zip(b.xs, b.psis):
                buf.write(f"{fmt(x)},{fmt(p)}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        """Parse CSV produced by ``to_csv`` (support headers optional)."""
        support = None
        lagrange = None
        xs, ps = [], []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("support:"):
                    support = []
                    for piece in body[len("support:"):].split(";"):
                        lo, hi = piece.split(",")
                        support.append((float(lo), float(hi)))
                elif body.startswith("lagrange-l:"):
                    lagrange = float(body[len("lagrange-l:"):])
                continue
            if line.lower().startswith("xi"):
                continue
            try:
                sx, sp = line.split(",")
                xs.append(float(sx))
                ps.append(float(sp))
            except ValueError as exc:
                raise ParseError(f"bad density row {line!r}") from exc
        if not xs:
            raise ParseError("density CSV holds no samples")
        xs = np.asarray(xs)
        ps = np.asarray(ps)
        order = np.argsort(xs)
        xs, ps = xs[order], ps[order]
        if support is None:
            support = _infer_support(xs)
        bands = []
        for lo, hi in support:
            mask = (xs >= lo) & (xs <= hi)
            bx, bp = xs[mask], ps[mask]
            interior = (bx > lo) & (bx < hi)
            bands.append(Band(lo, hi, bx[interior], bp[interior]))
        return cls(bands, lagrange_l=lagrange)


def _infer_support(xs):
    """Split sorted samples into bands at spacing outliers, then invert
    the first-kind Chebyshev layout to recover band edges."""
    gaps = np.diff(xs)
    groups = [[0]]
    for i, g in enumerate(gaps):
        window = gaps[max(0, i - 3): i + 4]
        if g > 6.0 * np.median(window) and g > 0:
            groups.append([])
        groups[-1].append(i + 1)
    support = []
    for idx in groups:
        seg = xs[idx]
        n = len(seg)
        if n < 2:
            raise ParseError("cannot infer support from a single sample")
        c = math.cos(math.pi / (2 * n))
        half = (seg[-1] - seg[0]) / (2.0 * c)
        mid = 0.5 * (seg[0] + seg[-1])
        support.append((mid - half, mid + half))
    return support
