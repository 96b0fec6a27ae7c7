"""Poincaré constants of one-dimensional grid densities.

The spectral gap ``inf ∫f'²p / ∫f²p`` over centred ``f`` is discretized with
piecewise-linear ``f``: the energy uses midpoint weights on grid edges, the
mass term trapezoid weights on nodes.  After the symmetric scaling
``M^{-1/2} K M^{-1/2}`` this is a symmetric tridiagonal eigenproblem whose
lowest eigenvalue (zero) belongs to the constants; the gap is the second
one, found by Sturm-sequence bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import GridDensity, GridError, ProductMeasure, trapezoid_weights
from .transport import cdf

SUPPORT_REL = 1e-10
CONVERGENCE_RTOL = 5e-3


@dataclass(frozen=True)
class PoincareEstimate:
    c_p: float
    gap: float
    method: str
    grid_meta: dict
    converged: bool
    c_p_coarse: float = math.nan


def effective_support(g: GridDensity, rel: float = SUPPORT_REL) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and values where ``p >= rel * max p``; must be one contiguous block."""
    keep = g.values >= rel * g.values.max()
    idx = np.nonzero(keep)[0]
    if idx.size < 3:
        raise GridError("effective support has fewer than 3 nodes")
    if idx[-1] - idx[0] + 1 != idx.size:
        raise GridError("effective support is disconnected; spectral gap would be spurious")
    return g.x[idx], g.values[idx]


def gap_matrix(p: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and squared off-diagonal of the scaled tridiagonal operator."""
    mass = p * trapezoid_weights(p.shape[0]) * h
    k = 0.5 * (p[:-1] + p[1:]) / h
    diag = np.zeros(p.shape[0])
    diag[:-1] += k
    diag[1:] += k
    diag /= mass
    off_sq = k * k / (mass[:-1] * mass[1:])
    return diag, off_sq


def _second_eigenvalue(diag: np.ndarray, off_sq: np.ndarray) -> float:
    off = np.sqrt(off_sq)
    radius = np.zeros_like(diag)
    radius[:-1] += off
    radius[1:] += off
    upper = float(np.max(diag + radius))
    return _kernels.bisect_eigenvalue(diag, off_sq, 1, 0.0, upper)


def _aligned(p: np.ndarray, stride: int) -> np.ndarray:
    """Drop trailing nodes so every stride up to ``stride`` keeps both end nodes."""
    m = (p.shape[0] - 1) // stride * stride
    return p[: m + 1]


def _gap_on_nodes(p: np.ndarray, h: float) -> float:
    diag, off_sq = gap_matrix(p / p.max(), h)
    return _second_eigenvalue(diag, off_sq)


def spectral_gap_1d(g: GridDensity) -> PoincareEstimate:
    """Poincaré constant ``1/λ₁`` from the discretized spectral gap.

    ``converged`` compares against the same problem on every other node
    (double spacing) and is true when the two differ by less than 0.5 %.
    """
    _, p = effective_support(g)
    h = g.h
    lam = _gap_on_nodes(p, h)
    if not lam > 0.0:
        raise GridError("nonpositive spectral gap")
    coarse = math.nan
    if p.shape[0] >= 7:
        # an odd trailing node is dropped so both ends stay on the coarse grid
        lam2 = _gap_on_nodes(_aligned(p, 2)[::2], 2.0 * h)
        coarse = 1.0 / lam2
    c_p = 1.0 / lam
    converged = bool(math.isfinite(coarse) and abs(coarse - c_p) < CONVERGENCE_RTOL * c_p)
    return PoincareEstimate(c_p, lam, "spectral", g.grid_meta(), converged, coarse)


def refinement_sequence(g: GridDensity, levels: int = 3) -> list[float]:
    """``c_p`` at spacings ``2^k h`` for ``k = levels-1, ..., 0`` (coarse to fine)."""
    _, p = effective_support(g)
    p = _aligned(p, 2 ** (levels - 1))
    out = []
    for k in reversed(range(levels)):
        stride = 2**k
        out.append(1.0 / _gap_on_nodes(p[::stride], stride * g.h))
    return out


def muckenhoupt_constant(g: GridDensity) -> float:
    """``B = max(B₊, B₋)`` of the Hardy-type criterion around the median.

    ``B₊ = sup_{x>m} P(X > x) ∫_m^x 1/p``; computed for the law restricted to
    its effective support, the same measure seen by :func:`spectral_gap_1d`.
    """
    x, p = effective_support(g)
    h = g.h
    sub = GridDensity(x[0], x[-1], p)
    c = cdf(sub).cdf_values
    m_idx = int(np.searchsorted(c, 0.5))
    m_idx = min(max(m_idx, 1), x.shape[0] - 2)
    inv = 1.0 / (p / sub.mass())
    # right side: cumulative ∫_m^x 1/p, tail mass 1 - F(x)
    right_int = np.concatenate(([0.0], np.cumsum(0.5 * (inv[m_idx:-1] + inv[m_idx + 1 :]) * h)))
    b_plus = float(np.max((1.0 - c[m_idx:]) * right_int))
    left_inv = inv[: m_idx + 1][::-1]
    left_int = np.concatenate(([0.0], np.cumsum(0.5 * (left_inv[:-1] + left_inv[1:]) * h)))
    b_minus = float(np.max(c[: m_idx + 1][::-1] * left_int))
    return max(b_plus, b_minus)


def muckenhoupt_bound(g: GridDensity) -> float:
    """Upper bound ``4B`` on the Poincaré constant."""
    return 4.0 * muckenhoupt_constant(g)


def poincare_product(m: ProductMeasure) -> float:
    """Largest coordinate constant (tensorization of independent factors)."""
    if not m.coords:
        raise GridError("empty product measure")
    coords = m.coords[:1] if m.iid_flag else m.coords
    return max(spectral_gap_1d(c).c_p for c in coords)


def restrict_to_support(g: GridDensity, rel: float = SUPPORT_REL) -> GridDensity:
    """The law of ``X`` conditioned on its effective support (renormalized).

    This is the measure whose Poincaré constant :func:`spectral_gap_1d`
    actually computes; for polynomially tailed laws the unrestricted
    constant is infinite.
    """
    x, p = effective_support(g, rel)
    sub = GridDensity(float(x[0]), float(x[-1]), p, scoreable=g.scoreable, label=g.label)
    return sub.with_values(p / sub.mass())
