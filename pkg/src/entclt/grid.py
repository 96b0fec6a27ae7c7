"""Uniform-grid representation of one-dimensional probability densities.

A :class:`GridDensity` stores density values at equally spaced nodes on
``[lo, hi]``.  All integrals in the package use the trapezoid rule on these
nodes.  Affine maps (:func:`scale`, :func:`shift`, :func:`standardize`) act
exactly by relabelling the nodes; :func:`resample` is the only place where
values are interpolated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

DEFAULT_N_POINTS = 4096
MIN_N_POINTS = 64
TAIL_MASS_TARGET = 1e-10
# Spacing is never coarser than this half-width (in units of scale_hint)
# divided by the node count; heavier tails extend the grid at that spacing.
RESOLUTION_HALF_WIDTH = 200.0
_MAX_DOUBLINGS = 40


class GridError(ValueError):
    """Invalid grid density or failed construction."""


class ResolutionError(GridError):
    """The grid is too coarse for the requested operation."""


def trapezoid_weights(n: int) -> np.ndarray:
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Density tabulated at ``n_points`` uniformly spaced nodes on ``[lo, hi]``.

    ``tail_mass`` records the probability mass of the source law that lies
    outside the grid (zero when unknown or when the support is compact).
    ``scoreable`` is false for laws without a score function (the uniform
    law); score-based functionals refuse such grids.
    """

    lo: float
    hi: float
    values: np.ndarray
    tail_mass: float = 0.0
    scoreable: bool = True
    label: str = ""

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.ndim != 1 or vals.shape[0] < 3:
            raise GridError("values must be a 1-D array with at least 3 nodes")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.hi <= self.lo:
            raise GridError(f"invalid grid endpoints [{self.lo}, {self.hi}]")
        if not np.all(np.isfinite(vals)):
            raise GridError("density values must be finite")
        if np.any(vals < 0.0):
            raise GridError("density values must be nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        object.__setattr__(self, "values", vals)

    @property
    def n_points(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return self.lo + self.h * np.arange(self.n_points)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid quadrature weights (including the spacing)."""
        return self.h * trapezoid_weights(self.n_points)

    def integrate(self, f: np.ndarray) -> float:
        """Trapezoid integral of the nodal array ``f`` over the grid."""
        return float(np.dot(self.weights, f))

    def mass(self) -> float:
        return self.integrate(self.values)

    def expect(self, f: np.ndarray) -> float:
        """``∫ f p`` for nodal values ``f``."""
        return self.integrate(f * self.values)

    def grid_meta(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "n_points": self.n_points,
            "h": self.h,
            "tail_mass": self.tail_mass,
        }

    def with_values(self, values: np.ndarray, **changes) -> "GridDensity":
        params = dict(
            lo=self.lo,
            hi=self.hi,
            values=values,
            tail_mass=self.tail_mass,
            scoreable=self.scoreable,
            label=self.label,
        )
        params.update(changes)
        return GridDensity(**params)

    def __call__(self, pts) -> np.ndarray:
        """Linear interpolation of the density, zero outside the grid."""
        return np.interp(pts, self.x, self.values, left=0.0, right=0.0)


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    variance: float


@dataclass(frozen=True, eq=False)
class ProductMeasure:
    """Independent coordinates, each a :class:`GridDensity`."""

    coords: tuple
    iid_flag: bool = False

    def __post_init__(self):
        coords = tuple(self.coords)
        if len(coords) < 1:
            raise GridError("a product measure needs at least one coordinate")
        if self.iid_flag:
            first = coords[0]
            for c in coords[1:]:
                if not _same_nodes(first, c):
                    raise GridError("iid_flag set but coordinates differ")
        object.__setattr__(self, "coords", coords)

    @property
    def d(self) -> int:
        return len(self.coords)


def _same_nodes(a: GridDensity, b: GridDensity) -> bool:
    return (
        a is b
        or (
            a.lo == b.lo
            and a.hi == b.hi
            and a.n_points == b.n_points
            and np.array_equal(a.values, b.values)
        )
    )


def _tail_integral(pdf, a: float, b: float) -> float:
    out = integrate.quad(pdf, a, b, epsabs=1e-14, epsrel=1e-8, limit=200, full_output=1)
    value, abserr = out[0], out[1]
    # a fourth element is quadpack's failure message
    msg = out[3] if len(out) > 3 else ""
    if "diverg" in msg or abserr > 1e-6:
        raise GridError("pdf tail integral does not converge")
    return value


def _tail_mass(pdf: Callable[[float], float], lo: float, hi: float) -> float:
    total = _tail_integral(pdf, -np.inf, lo) + _tail_integral(pdf, hi, np.inf)
    if not math.isfinite(total):
        raise GridError("pdf tail integral is not finite")
    return max(total, 0.0)


def build_from_pdf(
    pdf: Callable,
    center_hint: float = 0.0,
    scale_hint: float = 1.0,
    n_points: int = DEFAULT_N_POINTS,
    *,
    tail_target: float = TAIL_MASS_TARGET,
    scoreable: bool = True,
    label: str = "",
) -> GridDensity:
    """Tabulate ``pdf`` on a grid whose tails carry less than ``tail_target``.

    The half-width starts at ``scale_hint`` and doubles until the mass of
    ``pdf`` outside the window (by adaptive quadrature) is below
    ``tail_target``.  A node always sits at ``center_hint``.  The spacing is
    ``2 L / (n_points - 2)`` with ``L`` the half-width, capped at
    ``RESOLUTION_HALF_WIDTH * scale_hint``; wider windows (polynomial tails)
    keep that spacing and get more nodes.

    ``pdf`` must accept numpy arrays.
    """
    if scale_hint <= 0 or not math.isfinite(scale_hint):
        raise GridError("scale_hint must be positive")
    if n_points < MIN_N_POINTS:
        raise GridError(f"n_points must be at least {MIN_N_POINTS}")

    def scalar_pdf(t):
        return float(pdf(np.array([t]))[0])

    probe = center_hint + scale_hint * np.linspace(-3.0, 3.0, 13)
    with np.errstate(all="ignore"):
        if np.any(np.isnan(np.asarray(pdf(probe), dtype=np.float64))):
            raise GridError("pdf returned NaN")

    half = float(scale_hint)
    tail = math.inf
    for _ in range(_MAX_DOUBLINGS):
        tail = _tail_mass(scalar_pdf, center_hint - half, center_hint + half)
        if tail < tail_target:
            break
        half *= 2.0
    else:
        raise GridError("pdf tails do not become negligible; is it integrable?")

    res_half = min(half, RESOLUTION_HALF_WIDTH * scale_hint)
    h = 2.0 * res_half / (n_points - 2)
    m = int(math.ceil(half / h - 1e-9))
    x = center_hint + h * np.arange(-m, m + 2)
    with np.errstate(all="ignore"):
        vals = np.asarray(pdf(x), dtype=np.float64)
    if vals.shape != x.shape:
        raise GridError("pdf must be vectorized over numpy arrays")
    if np.any(np.isnan(vals)):
        raise GridError("pdf returned NaN")
    if np.any(vals < 0) or not np.all(np.isfinite(vals)):
        raise GridError("pdf must be finite and nonnegative")
    g = GridDensity(
        x[0], x[-1], vals, tail_mass=tail, scoreable=scoreable, label=label
    )
    return normalize(g)


def normalize(g: GridDensity) -> GridDensity:
    total = g.mass()
    if not (total > 0.0) or not math.isfinite(total):
        raise GridError("cannot normalize a density with nonpositive integral")
    return g.with_values(g.values / total)


def moments(g: GridDensity) -> MomentSummary:
    x = g.x
    mean = g.expect(x)
    var = g.expect((x - mean) ** 2)
    return MomentSummary(mean, var)


def shift(g: GridDensity, b: float) -> GridDensity:
    """Density of ``X + b``."""
    return g.with_values(g.values, lo=g.lo + b, hi=g.hi + b)


def scale(g: GridDensity, a: float) -> GridDensity:
    """Density of ``aX``: nodes multiplied by ``a``, values divided by ``|a|``."""
    if a == 0 or not math.isfinite(a):
        raise GridError("scale factor must be a nonzero finite number")
    if a > 0:
        out = g.with_values(g.values / a, lo=g.lo * a, hi=g.hi * a)
    else:
        out = g.with_values(g.values[::-1] / -a, lo=g.hi * a, hi=g.lo * a)
    return normalize(out)


def standardize(g: GridDensity) -> GridDensity:
    """Affine image with mean 0 and variance 1 (shift, then scale)."""
    mom = moments(g)
    if not mom.variance > 0.0:
        raise GridError("cannot standardize a density with zero variance")
    return scale(shift(g, -mom.mean), 1.0 / math.sqrt(mom.variance))


def resample(g: GridDensity, lo: float, hi: float, n_points: int) -> GridDensity:
    """Linear interpolation of density values onto a fresh uniform grid.

    Values are clamped at zero and renormalized.
    """
    x = np.linspace(lo, hi, n_points)
    vals = np.maximum(g(x), 0.0)
    return normalize(g.with_values(vals, lo=lo, hi=hi))


def trim_tails(g: GridDensity, mass: float) -> GridDensity:
    """Drop end nodes whose cumulative mass (per side) stays below ``mass``."""
    w = g.weights * g.values
    left = np.cumsum(w)
    right = np.cumsum(w[::-1])
    i0 = int(np.searchsorted(left, mass, side="right"))
    i1 = g.n_points - int(np.searchsorted(right, mass, side="right"))
    i0 = max(0, i0 - 1)
    i1 = min(g.n_points, i1 + 1)
    if i1 - i0 < MIN_N_POINTS or (i0 == 0 and i1 == g.n_points):
        return g
    dropped = float(left[i0 - 1] if i0 > 0 else 0.0) + float(
        right[g.n_points - i1 - 1] if i1 < g.n_points else 0.0
    )
    h = g.h
    out = g.with_values(
        g.values[i0:i1],
        lo=g.lo + i0 * h,
        hi=g.lo + (i1 - 1) * h,
        tail_mass=g.tail_mass + dropped,
    )
    return normalize(out)


def decimate(g: GridDensity, target_points: int) -> GridDensity:
    """Keep every k-th node so that at least ``target_points`` nodes remain.

    Node-aligned, so no interpolation error is introduced.
    """
    stride = max(1, (g.n_points - 1) // max(target_points - 1, 1))
    if stride == 1:
        return g
    idx = np.arange(0, g.n_points, stride)
    h = g.h
    out = g.with_values(g.values[idx], lo=g.lo, hi=g.lo + idx[-1] * h)
    return normalize(out)


def retighten(g: GridDensity, target_points: int, mass: float = 1e-13) -> GridDensity:
    """Trim negligible tails and thin the grid back to about ``target_points``."""
    return decimate(trim_tails(g, mass), target_points)


def product(coords: Sequence[GridDensity]) -> ProductMeasure:
    coords = tuple(coords)
    iid = len(coords) > 0 and all(_same_nodes(coords[0], c) for c in coords)
    return ProductMeasure(coords, iid_flag=iid)
