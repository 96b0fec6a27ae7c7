"""Score function and information functionals of grid densities.

All functionals are trapezoid quadratures on the grid nodes.  The score is
the derivative of the log-density by sixth-order central differences, with
lower-order stencils toward the ends of the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GridDensity, GridError, ProductMeasure, moments, standardize

P_FLOOR_REL = 1e-12
SCORE_MEAN_TOL = 1e-4
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def derivative(y: np.ndarray, h: float) -> np.ndarray:
    """First derivative of nodal values by central differences.

    Sixth order in the interior, falling back to fourth and second order
    within three nodes of the ends and to one-sided second order at the
    end nodes themselves.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    if n < 3:
        raise GridError("need at least 3 nodes to differentiate")
    d = np.empty(n)
    d[1:-1] = (y[2:] - y[:-2]) / (2.0 * h)
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h)
    d[-1] = (3.0 * y[-1] - 4.0 * y[-2] + y[-3]) / (2.0 * h)
    if n >= 5:
        d[2:-2] = (-y[4:] + 8.0 * y[3:-1] - 8.0 * y[1:-3] + y[:-4]) / (12.0 * h)
    if n >= 7:
        d[3:-3] = (
            y[6:] - 9.0 * y[5:-1] + 45.0 * y[4:-2] - 45.0 * y[2:-4] + 9.0 * y[1:-5] - y[:-6]
        ) / (60.0 * h)
    return d


@dataclass(frozen=True, eq=False)
class ScoreField:
    """Score ``(log p)'`` at the grid nodes of a density."""

    lo: float
    hi: float
    scores: np.ndarray
    valid_mask: np.ndarray
    density: GridDensity = field(repr=False)

    def __post_init__(self):
        if not np.all(np.isfinite(self.scores[self.valid_mask])):
            raise GridError("score is not finite on the valid nodes")
        m = self.mean()
        if abs(m) >= SCORE_MEAN_TOL:
            raise GridError(f"score has nonzero mean {m:.3e}; grid too coarse?")

    @property
    def x(self) -> np.ndarray:
        return self.density.x

    def masked_integral(self, f: np.ndarray) -> float:
        """``∫ f p`` restricted to the valid nodes."""
        g = self.density
        return g.integrate(np.where(self.valid_mask, f * g.values, 0.0))

    def mean(self) -> float:
        return self.masked_integral(self.scores)


def p_floor(g: GridDensity) -> float:
    return P_FLOOR_REL * float(g.values.max())


def score(g: GridDensity) -> ScoreField:
    if not g.scoreable:
        raise GridError(f"density {g.label or '?'} has no score function")
    if g.n_points < 3:
        raise GridError("need at least 3 grid points for a score")
    floor = p_floor(g)
    logp = np.log(np.maximum(g.values, floor))
    rho = derivative(logp, g.h)
    mask = g.values >= floor
    return ScoreField(g.lo, g.hi, rho, mask, g)


def fisher_information(g: GridDensity) -> float:
    """``I(X) = ∫ ρ² p``."""
    s = score(g)
    return s.masked_integral(s.scores**2)


def relative_fisher(g: GridDensity) -> float:
    """Relative Fisher information ``J = I(standardized X) - 1``."""
    if not moments(g).variance > 0.0:
        raise GridError("zero variance")
    return fisher_information(standardize(g)) - 1.0


def relative_fisher_direct(g: GridDensity) -> float:
    """``σ² ∫ (ρ + (x - μ)/σ²)² p`` evaluated straight from the definition."""
    mom = moments(g)
    if not mom.variance > 0.0:
        raise GridError("zero variance")
    s = score(g)
    resid = s.scores + (g.x - mom.mean) / mom.variance
    return mom.variance * s.masked_integral(resid**2)


def _plogp(p: np.ndarray) -> np.ndarray:
    # p log p -> 0 as p -> 0; no floor needed, unlike the score
    out = np.zeros_like(p)
    pos = p > 0.0
    out[pos] = p[pos] * np.log(p[pos])
    return out


def differential_entropy(g: GridDensity) -> float:
    return -g.integrate(_plogp(g.values))


def relative_entropy_to_gaussian(g: GridDensity) -> float:
    """KL divergence from the standard normal law.

    Uses ``-H(p) + ½ log 2π + ½ E[X²]``; the comparison law is always
    N(0, 1), so standardize first when that is the intended reference.
    """
    second = g.expect(g.x**2)
    return -differential_entropy(g) + _HALF_LOG_2PI + 0.5 * second


def relative_entropy_direct(g: GridDensity) -> float:
    # ∫ p log(p/φ) node by node; independent of the cross-term formula
    p = g.values
    x = g.x
    pos = p > 0.0
    vals = np.zeros_like(p)
    vals[pos] = p[pos] * (np.log(p[pos]) + _HALF_LOG_2PI + 0.5 * x[pos] ** 2)
    return g.integrate(vals)


@dataclass(frozen=True)
class InfoProfile:
    mean: float
    variance: float
    diff_entropy: float
    rel_entropy: float
    fisher: float
    rel_fisher: float
    grid_meta: dict

    def as_row(self) -> dict:
        row = {
            "mean": self.mean,
            "variance": self.variance,
            "diff_entropy": self.diff_entropy,
            "rel_entropy": self.rel_entropy,
            "fisher": self.fisher,
            "rel_fisher": self.rel_fisher,
        }
        row.update({f"grid_{k}": v for k, v in self.grid_meta.items()})
        return row


def profile(g: GridDensity) -> InfoProfile:
    mom = moments(g)
    return InfoProfile(
        mean=mom.mean,
        variance=mom.variance,
        diff_entropy=differential_entropy(g),
        rel_entropy=relative_entropy_to_gaussian(g),
        fisher=fisher_information(g),
        rel_fisher=relative_fisher(g),
        grid_meta=g.grid_meta(),
    )


def product_profile(m: ProductMeasure) -> InfoProfile:
    """Profile of a product law; entropies and informations add up.

    ``mean`` is the largest coordinate mean in absolute value and
    ``variance`` the largest coordinate variance (the operator norm of the
    diagonal covariance).
    """
    if not m.coords:
        raise GridError("empty product measure")
    if m.iid_flag:
        one = profile(m.coords[0])
        parts = [one] * m.d
    else:
        parts = [profile(c) for c in m.coords]
    meta = dict(parts[0].grid_meta)
    meta["d"] = m.d
    return InfoProfile(
        mean=max(abs(p.mean) for p in parts),
        variance=max(p.variance for p in parts),
        diff_entropy=sum(p.diff_entropy for p in parts),
        rel_entropy=sum(p.rel_entropy for p in parts),
        fisher=sum(p.fisher for p in parts),
        rel_fisher=sum(p.rel_fisher for p in parts),
        grid_meta=meta,
    )


def score_moments(g: GridDensity) -> tuple[float, float]:
    """``(∫ρp, ∫xρp)``; equal to ``(0, -1)`` for any smooth density."""
    s = score(g)
    return s.mean(), s.masked_integral(g.x * s.scores)
