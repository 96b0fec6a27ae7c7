"""Quadratic Wasserstein distance through quantile functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .functionals import derivative
from .grid import GridDensity, GridError, ProductMeasure

DEFAULT_QUAD_NODES = 512
_MAX_QUAD_NODES = 16384
_REFINE_TOL = 1e-5


@dataclass(frozen=True, eq=False)
class CdfTable:
    x: np.ndarray
    cdf_values: np.ndarray

    def __call__(self, pts):
        return np.interp(pts, self.x, self.cdf_values, left=0.0, right=1.0)


def cdf(g: GridDensity) -> CdfTable:
    c = cumulative_trapezoid(g.values, dx=g.h, initial=0.0)
    c = np.clip(c / c[-1], 0.0, 1.0)
    return CdfTable(g.x, c)


def quantile(c: CdfTable, u):
    """Inverse of the piecewise-linear cdf; ``u`` must lie in (0, 1)."""
    u_arr = np.asarray(u, dtype=np.float64)
    if np.any(u_arr <= 0.0) or np.any(u_arr >= 1.0):
        raise ValueError("quantile levels must lie strictly inside (0, 1)")
    xs, cs = _strict_table(c)
    out = np.interp(u_arr, cs, xs)
    return float(out) if np.ndim(u) == 0 else out


CDF_REFINE = 16


def fine_cdf(g: GridDensity, refine: int = CDF_REFINE) -> CdfTable:
    """Fourth-order cdf table with ``refine`` points per grid cell.

    Node values are the cumulative trapezoid sums with the Euler-Maclaurin
    end correction ``-h²/12 (p'(x) - p'(lo))``; inside each cell the cdf
    follows the cubic Hermite interpolant of ``(F, p)``.  A piecewise-linear
    reading of this table is accurate to ``O(h²/refine²)``, against
    ``O(h²)`` for :func:`cdf`.  Laws with jumps at the ends (the uniform)
    have ``p' = 0`` and are unaffected.
    """
    h = g.h
    p = g.values
    c = cumulative_trapezoid(p, dx=h, initial=0.0)
    dp = derivative(p, h)
    c = c - h * h / 12.0 * (dp - dp[0])
    total = c[-1]
    F = c / total
    slope = h * p / total
    s = np.arange(refine) / refine
    h00 = (1.0 + 2.0 * s) * (1.0 - s) ** 2
    h10 = s * (1.0 - s) ** 2
    h01 = s * s * (3.0 - 2.0 * s)
    h11 = s * s * (s - 1.0)
    fine = (
        h00[None, :] * F[:-1, None]
        + h10[None, :] * slope[:-1, None]
        + h01[None, :] * F[1:, None]
        + h11[None, :] * slope[1:, None]
    ).ravel()
    xs = (g.x[:-1, None] + h * s[None, :]).ravel()
    fine = np.append(fine, F[-1])
    xs = np.append(xs, g.x[-1])
    fine = np.maximum.accumulate(np.clip(fine, 0.0, 1.0))
    return CdfTable(xs, fine)


def _strict_table(c: CdfTable) -> tuple[np.ndarray, np.ndarray]:
    # Flat stretches make the inverse ambiguous: keep the last node of each
    # flat run on the left and the first on the right.
    cv = c.cdf_values
    keep = np.ones(cv.shape[0], dtype=bool)
    keep[1:] = np.diff(cv) > 0.0
    idx = np.nonzero(keep)[0]
    # shift left-edge plateau node to the end of the plateau
    if idx.size > 1 and idx[1] > 1:
        idx[0] = idx[1] - 1
    return c.x[idx], cv[idx]


_PANEL_NODES = 32


@lru_cache(maxsize=1)
def _panel_rule() -> tuple[np.ndarray, np.ndarray]:
    xi, wi = np.polynomial.legendre.leggauss(_PANEL_NODES)
    return 0.5 * (xi + 1.0), 0.5 * wi


def gauss_legendre_unit(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Open Gauss-Legendre rule on (0, 1).

    Up to 512 nodes this is the plain rule; beyond that it is the composite
    32-point rule on ``n / 32`` equal panels (building a huge single rule
    costs O(n³)).
    """
    if n <= DEFAULT_QUAD_NODES:
        return _single_rule(n)
    panels = max(1, n // _PANEL_NODES)
    x, w = _panel_rule()
    edges = np.arange(panels)[:, None] / panels
    return (edges + x[None, :] / panels).ravel(), np.tile(w / panels, panels)


@lru_cache(maxsize=8)
def _single_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    xi, wi = np.polynomial.legendre.leggauss(n)
    return 0.5 * (xi + 1.0), 0.5 * wi


def _w2_sq_fixed(qa: CdfTable, qb: CdfTable, n_nodes: int) -> float:
    u, w = gauss_legendre_unit(n_nodes)
    diff = quantile(qa, u) - quantile(qb, u)
    return float(np.dot(w, diff * diff))


def w2_sq_quadrature(a: GridDensity, b: GridDensity, n_nodes: int = DEFAULT_QUAD_NODES) -> float:
    """Squared W₂ by Gauss-Legendre in the quantile level.

    The node count doubles until the value moves by less than 1e-5 (capped
    at 16384 nodes).
    """
    ca, cb = fine_cdf(a), fine_cdf(b)
    val = _w2_sq_fixed(ca, cb, n_nodes)
    while n_nodes < _MAX_QUAD_NODES:
        n_nodes *= 2
        new = _w2_sq_fixed(ca, cb, n_nodes)
        done = abs(new - val) < _REFINE_TOL
        val = new
        if done:
            break
    return val


def w2_sq_1d(a: GridDensity, b: GridDensity) -> float:
    """Squared W₂ between two grid densities.

    Both cdfs are read piecewise linearly from :func:`fine_cdf` tables, so
    both quantile functions are piecewise linear in ``u`` with breakpoints at
    the tabulated cdf levels.  On the merged breakpoints the squared
    difference is a quadratic in ``u`` and integrates exactly.
    """
    xa, ua = _strict_table(fine_cdf(a))
    xb, ub = _strict_table(fine_cdf(b))
    u = np.union1d(ua, ub)
    d = np.interp(u, ua, xa) - np.interp(u, ub, xb)
    du = np.diff(u)
    d0, d1 = d[:-1], d[1:]
    return float(np.sum(du * (d0 * d0 + d0 * d1 + d1 * d1)) / 3.0)


def w2_1d(a: GridDensity, b: GridDensity) -> float:
    return math.sqrt(max(w2_sq_1d(a, b), 0.0))


def w2_product(a: ProductMeasure, b: ProductMeasure) -> float:
    if a.d != b.d:
        raise GridError(f"dimension mismatch: {a.d} vs {b.d}")
    if a.iid_flag and b.iid_flag:
        return math.sqrt(a.d) * w2_1d(a.coords[0], b.coords[0])
    return math.sqrt(sum(w2_sq_1d(x, y) for x, y in zip(a.coords, b.coords)))
