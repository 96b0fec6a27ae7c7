"""Ornstein-Uhlenbeck smoothing ``X(t) = e^{-t} X + sqrt(1 - e^{-2t}) Z``.

The law of ``X(t)`` is computed exactly as a rescaling followed by a
convolution with a Gaussian kernel; no paths are simulated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .convolve import convolve
from .functionals import relative_entropy_to_gaussian, relative_fisher
from .grid import GridDensity, GridError, decimate, retighten, scale

SMALL_T = 1e-6
DEFAULT_GL_NODES = 16
_KERNEL_SDS = 9.0
_MAX_KERNEL_NODES = 1 << 20


def gaussian_kernel(sd: float, h: float) -> GridDensity:
    """N(0, sd²) tabulated at spacing ``h`` on ``±9 sd`` (odd node count, node at 0)."""
    half = max(int(math.ceil(_KERNEL_SDS * sd / h)), 1)
    j = np.arange(-half, half + 1)
    z = j * h / sd
    vals = np.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi))
    return GridDensity(-half * h, half * h, vals, label=f"N(0,{sd * sd:.3g})")


def ou_evolve(g: GridDensity, t: float, n_points: int | None = None) -> GridDensity:
    """Law of ``X(t)`` for ``X ~ g``.

    For ``t < 1e-6`` the kernel is narrower than any practical grid and the
    input is returned unchanged.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t < SMALL_T:
        return g
    target = n_points or g.n_points
    a = math.exp(-t)
    sd = math.sqrt(-math.expm1(-2.0 * t))
    shrunk = scale(g, a)
    # Keep the kernel at a manageable size for large t by thinning the
    # (by then very narrow) rescaled input first.
    while 2.0 * _KERNEL_SDS * sd / shrunk.h > _MAX_KERNEL_NODES and shrunk.n_points > 64:
        shrunk = decimate(shrunk, max(64, (shrunk.n_points + 1) // 2))
    kernel = gaussian_kernel(sd, shrunk.h)
    out = retighten(convolve(shrunk, kernel), target)
    return out.with_values(out.values, label=f"{g.label}(t={t:g})")


@dataclass(frozen=True)
class FlowTrace:
    t_nodes: tuple
    ent_values: tuple
    j_values: tuple
    debruijn_residuals: tuple
    ent0: float
    j0: float


def _gauss_legendre(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    xi, wi = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * xi + 0.5 * (a + b), 0.5 * (b - a) * wi


def integrated_fisher(g: GridDensity, t: float, nodes_per_unit: int = DEFAULT_GL_NODES) -> float:
    """``∫_0^t J(X(s)) ds`` by composite Gauss-Legendre (one panel per unit of t)."""
    if t <= 0:
        return 0.0
    panels = max(1, int(math.ceil(t - 1e-12)))
    edges = np.linspace(0.0, t, panels + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        s, w = _gauss_legendre(a, b, nodes_per_unit)
        total += sum(wk * relative_fisher(ou_evolve(g, sk)) for sk, wk in zip(s, w))
    return float(total)


def flow_trace(g: GridDensity, t_nodes, nodes_per_unit: int = DEFAULT_GL_NODES) -> FlowTrace:
    """Entropy and relative Fisher information along the flow, with de Bruijn residuals.

    The residual at ``t`` is ``|Ent(X) - Ent(X(t)) - ∫_0^t J(X(s)) ds|``.
    """
    ts = tuple(sorted(float(t) for t in t_nodes))
    if any(t < 0 for t in ts):
        raise ValueError("flow times must be nonnegative")
    ent0 = relative_entropy_to_gaussian(g)
    j0 = relative_fisher(g)
    ents, js, res = [], [], []
    for t in ts:
        gt = ou_evolve(g, t)
        e = relative_entropy_to_gaussian(gt)
        ents.append(e)
        js.append(relative_fisher(gt))
        res.append(abs(ent0 - e - integrated_fisher(g, t, nodes_per_unit)))
    return FlowTrace(ts, tuple(ents), tuple(js), tuple(res), ent0, j0)


def fisher_decay_check(g: GridDensity, t_nodes) -> list[tuple[float, float]]:
    """Slack ``e^{-2t} J(X) - J(X(t))`` at each time (nonnegative in theory)."""
    j0 = relative_fisher(g)
    return [(float(t), math.exp(-2.0 * t) * j0 - relative_fisher(ou_evolve(g, t))) for t in t_nodes]


def entropy_cost_check(g: GridDensity, t: float, w2_sq: float) -> float:
    """Slack ``W₂²/(2(e^{2t}-1)) - Ent(X(t)|Z)``."""
    if not t > 0:
        raise ValueError("t must be positive")
    return w2_sq / (2.0 * math.expm1(2.0 * t)) - relative_entropy_to_gaussian(ou_evolve(g, t))


def ent_w2_fi_bound(g: GridDensity, t: float, w2_sq: float, j: float | None = None) -> float:
    """Right-hand side ``W₂²/(2(e^{2t}-1)) + (1-e^{-2t}) J / 2``; ``t = inf`` allowed."""
    if not t > 0:
        raise ValueError("t must be positive")
    if j is None:
        j = relative_fisher(g)
    if math.isinf(t):
        return 0.5 * j
    return w2_sq / (2.0 * math.expm1(2.0 * t)) - 0.5 * math.expm1(-2.0 * t) * j


def hwi_optimal_time(w2_sq: float, j: float) -> float:
    """Minimizer of :func:`ent_w2_fi_bound` over ``t``.

    With ``u = e^{2t} - 1`` the bound is ``W²/(2u) + u J / (2(1+u))``, minimized
    at ``u = W/(√J - W)`` where it equals ``W√J - W²/2``.  Needs ``W² < J``;
    otherwise the infimum is approached as ``t → ∞``.
    """
    w = math.sqrt(max(w2_sq, 0.0))
    rj = math.sqrt(max(j, 0.0))
    if w == 0.0:
        return math.inf
    if rj <= w:
        return math.inf
    return 0.5 * math.log1p(w / (rj - w))


def hwi_value(w2_sq: float, j: float) -> float:
    w = math.sqrt(max(w2_sq, 0.0))
    return w * math.sqrt(max(j, 0.0)) - 0.5 * w2_sq
