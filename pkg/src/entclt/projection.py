"""Exact quadrature checks of the score-projection identities for two summands.

Everything here is specialised to ``Z_2 = (X_1 + X_2)/√2`` in one dimension,
where all conditional expectations are one- or two-dimensional integrals
over the base grid.  Pairs ``(x_i, x_j)`` of base nodes land on the node
``i + j`` of the grid of ``S_2 = X_1 + X_2`` (same spacing), so sums over
pairs are evaluated exactly with no interpolation.

Notation: ``ρ`` is the score of ``X_1``, ``f₂ = ρ_{Z_2}``,
``f₁(v) = E f₂(v + X_2/√2)`` and ``g(u) = √2 E[ρ_{Z_2}(Z_2) | X_1 = u]``.
The ridge field is ``V = ρ_{Z_2}(Z_2) + Z_2`` and its additive projection
``V̂ = (g(X_1) + X_1 + g(X_2) + X_2)/√2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .convolve import clt_density, raw_convolution
from .functionals import P_FLOOR_REL, derivative, fisher_information, p_floor, relative_fisher, score
from .grid import GridDensity, GridError, ResolutionError, normalize
from .poincare import spectral_gap_1d

R_INFLATION = 1.01
EXCLUDED_MASS_LIMIT = 1e-8
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class ConditionalScore:
    """``s ↦ E[ρ_{X_1}(X_1) | S_2 = s]`` tabulated on the grid of ``S_2``."""

    s: np.ndarray
    values: np.ndarray
    valid_mask: np.ndarray
    density: GridDensity = field(repr=False)

    def __call__(self, pts):
        return np.interp(pts, self.s, self.values)


@dataclass(frozen=True, eq=False)
class ProjectionReport:
    n: int
    identity_residual: float
    delta2: float
    ridge_minus_additive: float
    g_x: np.ndarray = field(repr=False)
    g_table: np.ndarray = field(repr=False)
    m_scalar: float
    fisher_z2: float
    lower_bound_slack: float
    j_x1: float
    j_z2: float
    i_x1: float
    vhat_sq: float
    gdev_sq: float
    orthogonality: float
    r_used: float
    excluded_mass: float

    @property
    def telescoping_rel_error(self) -> float:
        return abs(self.ridge_minus_additive - self.delta2) / max(self.delta2, 1e-12)

    @property
    def m_scalar_error(self) -> float:
        return abs(self.m_scalar + self.fisher_z2)

    def as_row(self) -> dict:
        return {
            "n": self.n,
            "identity_residual": self.identity_residual,
            "delta2": self.delta2,
            "ridge_minus_additive": self.ridge_minus_additive,
            "telescoping_rel_error": self.telescoping_rel_error,
            "m_scalar": self.m_scalar,
            "fisher_z2": self.fisher_z2,
            "lower_bound_slack": self.lower_bound_slack,
            "j_x1": self.j_x1,
            "j_z2": self.j_z2,
            "vhat_sq": self.vhat_sq,
            "orthogonality": self.orthogonality,
            "r_used": self.r_used,
            "excluded_mass": self.excluded_mass,
        }


def _core(base: GridDensity) -> tuple[GridDensity, float]:
    """Restrict ``base`` to nodes with ``p >= p_floor``; return it with the excluded mass."""
    keep = np.nonzero(base.values >= p_floor(base))[0]
    i0, i1 = int(keep[0]), int(keep[-1]) + 1
    total = base.mass()
    h = base.h
    core = base.with_values(base.values[i0:i1], lo=base.lo + i0 * h, hi=base.lo + (i1 - 1) * h)
    excluded = max(0.0, 1.0 - core.mass() / total)
    return normalize(core), excluded


def _pair_weights(g: GridDensity) -> np.ndarray:
    return g.values * g.weights


def _sum_grid(core: GridDensity) -> GridDensity:
    raw = raw_convolution(core, core)
    if raw.clamped_mass > 1e-9:
        raise ResolutionError(f"clamped mass {raw.clamped_mass:.2e} in the S_2 convolution")
    n = raw.values.shape[0]
    out = GridDensity(raw.lo, raw.lo + (n - 1) * raw.h, raw.values, label="S_2")
    return normalize(out)


def conditional_score(base: GridDensity) -> ConditionalScore:
    """``∫ρ(x)p(x)p(s−x)dx / ∫p(x)p(s−x)dx`` on the nodes of the ``S_2`` grid."""
    core, _ = _core(base)
    rho = score(core).scores
    w = core.values * core.weights
    num = np.convolve(w * rho, w)
    den = np.convolve(w, w)
    s2 = _sum_grid(core)
    valid = den >= P_FLOOR_REL * den.max()
    vals = np.where(valid, num / np.where(valid, den, 1.0), 0.0)
    return ConditionalScore(s2.x, vals, valid, s2)


def identity_residual(base: GridDensity) -> float:
    """Weighted L² distance between the conditional score and ``ρ_{S_2}``."""
    cs = conditional_score(base)
    s2 = cs.density
    rho = score(s2)
    mask = cs.valid_mask & rho.valid_mask
    diff = np.where(mask, cs.values - rho.scores, 0.0)
    return math.sqrt(max(s2.integrate(diff * diff * s2.values), 0.0))


def projection_moment_pair(base: GridDensity, phi) -> tuple[float, float]:
    """``(∫φ(s) E[ρ_{X_1}|S_2=s] p_{S_2}, ∫φ(s) ρ_{S_2}(s) p_{S_2})`` for a test function."""
    cs = conditional_score(base)
    s2 = cs.density
    rho = score(s2)
    ph = phi(s2.x)
    mask = cs.valid_mask & rho.valid_mask
    lhs = s2.integrate(np.where(mask, ph * cs.values * s2.values, 0.0))
    rhs = s2.integrate(np.where(mask, ph * rho.scores * s2.values, 0.0))
    return lhs, rhs


def score_moments_check(g: GridDensity) -> tuple[float, float]:
    """``(∫ρp, ∫xρp)``, expected ``(0, -1)``."""
    s = score(g)
    return s.mean(), s.masked_integral(g.x * s.scores)


def _f1_offset(f2_z: np.ndarray, f2_vals: np.ndarray, core: GridDensity) -> tuple[np.ndarray, np.ndarray]:
    """``f₁(v) = Σ_j w_j p_j f₂(v + x_j/√2)`` on a grid offset by half a node from ``x/√2``."""
    x = core.x
    w = _pair_weights(core)
    v = (x + 0.5 * core.h) / _SQRT2
    out = np.empty_like(v)
    shift = x / _SQRT2
    block = max(1, 1_000_000 // x.shape[0])
    for start in range(0, v.shape[0], block):
        vv = v[start : start + block, None] + shift[None, :]
        out[start : start + block] = np.interp(vv, f2_z, f2_vals) @ w
    return v, out


def projection_report_n2(base: GridDensity, R: float | None = None) -> ProjectionReport:
    """All two-summand projection quantities for a standardized, scoreable base."""
    if not base.scoreable:
        raise GridError("projection checks need a score")
    core, excluded = _core(base)
    if excluded > EXCLUDED_MASS_LIMIT:
        raise ResolutionError(f"excluded mass {excluded:.2e} above {EXCLUDED_MASS_LIMIT:g}")
    x = core.x
    h = core.h
    wp = _pair_weights(core)
    i_x1 = fisher_information(core)
    j_x1 = relative_fisher(core)
    if R is None:
        R = spectral_gap_1d(base).c_p
    r_used = R * R_INFLATION

    # Route 1: everything on the exact S_2 lattice.
    s2 = _sum_grid(core)
    rho_s2 = score(s2).scores
    # g_i = 2 Σ_j w_j p_j h ρ_{S_2}(x_i + x_j)
    g = 2.0 * np.correlate(rho_s2, wp, mode="valid")[: core.n_points]
    ridge = _SQRT2 * rho_s2
    add = g / _SQRT2
    ridge_minus_additive = _kernels.pair_residual(wp, wp, ridge, add, add)

    # Route 2: f₂ from the independently built Z_2 density, f₁ by quadrature
    # on a half-node offset grid, Δ₂ = E|f₂(Z_2) - f₁(X_1/√2) - g(X_2)/√2|².
    z2 = clt_density(base, 2)
    sc = score(z2)
    zv = z2.x[sc.valid_mask]
    fv = sc.scores[sc.valid_mask]
    v, f1 = _f1_offset(zv, fv, core)
    f1_at = np.interp(x / _SQRT2, v, f1)
    lattice = (2.0 * core.lo + h * np.arange(2 * core.n_points - 1)) / _SQRT2
    ridge2 = np.interp(lattice, zv, fv)
    delta2 = _kernels.pair_residual(wp, wp, ridge2, f1_at, f1_at)

    fisher_z2 = fisher_information(z2)
    j_z2 = relative_fisher(z2)
    gprime = derivative(g, h)
    m_scalar = float(np.dot(wp, gprime))
    gdev_sq = float(np.dot(wp, (g - m_scalar * x) ** 2))
    lower_bound_slack = delta2 - gdev_sq / (2.0 * i_x1 * r_used)
    vhat_sq = float(np.dot(wp, (g + x) ** 2))
    orth = float(np.dot(wp, (g + x) * x))
    return ProjectionReport(
        n=2,
        identity_residual=identity_residual(base),
        delta2=float(delta2),
        ridge_minus_additive=float(ridge_minus_additive),
        g_x=x,
        g_table=g,
        m_scalar=m_scalar,
        fisher_z2=fisher_z2,
        lower_bound_slack=float(lower_bound_slack),
        j_x1=j_x1,
        j_z2=j_z2,
        i_x1=i_x1,
        vhat_sq=vhat_sq,
        gdev_sq=gdev_sq,
        orthogonality=orth,
        r_used=r_used,
        excluded_mass=excluded,
    )


def prop_fi_chain_check_n2(rep: ProjectionReport) -> float:
    """Slack of ``J(Z_2) - J(Z_2)²/J(X_1) >= E|g(X_1) - M X_1|² / (2 R I(X_1))``."""
    if rep.j_x1 <= 1e-10:
        # Gaussian base: every term vanishes; J(Z_2)²/J(X_1) is 0/0.
        lhs = 0.0
    else:
        lhs = rep.j_z2 - rep.j_z2**2 / rep.j_x1
    return lhs - rep.gdev_sq / (2.0 * rep.r_used * rep.i_x1)


def pythagoras_gap(rep: ProjectionReport) -> float:
    """``(E|V|² - E|V̂|²) - E|V - V̂|²`` with ``E|V|² = J(Z_2)``."""
    return (rep.j_z2 - rep.vhat_sq) - rep.ridge_minus_additive


def cauchy_schwarz_slack(rep: ProjectionReport) -> float:
    """``E|V̂|² - J(Z_2)²/J(X_1)``."""
    if rep.j_x1 <= 1e-10:
        return rep.vhat_sq
    return rep.vhat_sq - rep.j_z2**2 / rep.j_x1
