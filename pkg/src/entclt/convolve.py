"""Densities of independent sums and of the normalized sums Z_n."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import signal

from .distributions import DistributionSpec, make_density
from .grid import (
    DEFAULT_N_POINTS,
    GridDensity,
    GridError,
    ResolutionError,
    normalize,
    resample,
    retighten,
    scale,
    trapezoid_weights,
    trim_tails,
)

CLAMP_MASS_LIMIT = 1e-9
_SPACING_RTOL = 1e-9
# Intermediate partial sums drop tails lighter than this (per side).
_PARTIAL_TRIM = 1e-15


@dataclass(frozen=True)
class RawConvolution:
    lo: float
    h: float
    values: np.ndarray
    mass: float
    clamped_mass: float


def _common_spacing(a: GridDensity, b: GridDensity) -> tuple[GridDensity, GridDensity]:
    if abs(a.h - b.h) <= _SPACING_RTOL * max(a.h, b.h):
        return a, b
    h = min(a.h, b.h)

    def refit(g):
        n = int(math.ceil((g.hi - g.lo) / h - 1e-9)) + 1
        return resample(g, g.lo, g.lo + (n - 1) * h, n)

    return refit(a), refit(b)


def raw_convolution(a: GridDensity, b: GridDensity) -> RawConvolution:
    """Zero-padded FFT convolution on the grid covering ``[a.lo+b.lo, a.hi+b.hi]``.

    Both inputs carry their trapezoid end weights.  Negative ringing is
    clamped to zero; the clamped mass and the pre-normalization mass are
    reported.
    """
    if a.n_points < 3 or b.n_points < 3:
        raise GridError("empty grid")
    a, b = _common_spacing(a, b)
    h = a.h
    va = a.values * trapezoid_weights(a.n_points)
    vb = b.values * trapezoid_weights(b.n_points)
    c = signal.fftconvolve(va, vb) * h
    neg = c < 0.0
    clamped = float(-c[neg].sum() * h)
    c[neg] = 0.0
    mass = float(np.dot(trapezoid_weights(c.shape[0]), c) * h)
    return RawConvolution(a.lo + b.lo, h, c, mass, clamped)


def convolve(a: GridDensity, b: GridDensity) -> GridDensity:
    """Density of ``X + Y`` for independent ``X ~ a`` and ``Y ~ b``."""
    raw = raw_convolution(a, b)
    if raw.clamped_mass > CLAMP_MASS_LIMIT:
        raise ResolutionError(
            f"convolution clamped mass {raw.clamped_mass:.2e} exceeds {CLAMP_MASS_LIMIT:g}"
        )
    n = raw.values.shape[0]
    out = GridDensity(
        raw.lo,
        raw.lo + (n - 1) * raw.h,
        raw.values,
        tail_mass=a.tail_mass + b.tail_mass,
        scoreable=a.scoreable and b.scoreable,
        label=f"({a.label}*{b.label})" if a.label or b.label else "",
    )
    return normalize(out)


def _sum_density(base: GridDensity, n: int) -> GridDensity:
    """Density of ``S_n`` by binary decomposition of ``n``."""
    result = None
    power = base
    k = n
    while True:
        if k & 1:
            result = power if result is None else trim_tails(convolve(result, power), _PARTIAL_TRIM)
        k >>= 1
        if not k:
            break
        power = trim_tails(convolve(power, power), _PARTIAL_TRIM)
    return result


def clt_density(base: GridDensity, n: int, n_points: int | None = None) -> GridDensity:
    """Density of ``Z_n = (X_1 + ... + X_n)/√n`` for iid ``X_i ~ base``.

    The output grid is re-tightened to roughly ``n_points`` nodes (default:
    the node count of ``base``).
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if n == 1:
        return base
    target = n_points or base.n_points
    s = _sum_density(base, n)
    z = scale(s, 1.0 / math.sqrt(n))
    out = retighten(z, target)
    return out.with_values(out.values, label=f"Z_{n}[{base.label}]")


def clt_density_direct(base: GridDensity, n: int, n_points: int | None = None) -> GridDensity:
    """Slow oracle: ``n - 1`` sequential direct (non-FFT) convolutions."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if n == 1:
        return base
    w = trapezoid_weights(base.n_points)
    vb = base.values * w
    acc = base.values.copy()
    for _ in range(n - 1):
        acc = np.convolve(acc * trapezoid_weights(acc.shape[0]), vb) * base.h
    m = acc.shape[0]
    s = normalize(base.with_values(acc, lo=n * base.lo, hi=n * base.lo + (m - 1) * base.h))
    z = scale(s, 1.0 / math.sqrt(n))
    return retighten(z, n_points or base.n_points)


@dataclass(frozen=True)
class CltSweep:
    base: DistributionSpec
    n_list: tuple
    densities: dict = field(repr=False)
    d: int = 1


@lru_cache(maxsize=256)
def cached_clt_density(spec: DistributionSpec, n: int, n_points: int = DEFAULT_N_POINTS) -> GridDensity:
    return clt_density(make_density(spec, n_points), n)


def clt_sweep(base: DistributionSpec, n_list, d: int = 1, n_points: int = DEFAULT_N_POINTS) -> CltSweep:
    """Per-coordinate ``Z_n`` densities for each ``n`` (identical across coordinates)."""
    if d < 1:
        raise ValueError("d must be at least 1")
    ns = tuple(sorted(int(n) for n in n_list))
    if not ns:
        raise ValueError("n_list is empty")
    dens = {n: cached_clt_density(base, n, n_points) for n in ns}
    return CltSweep(base, ns, dens, d)
