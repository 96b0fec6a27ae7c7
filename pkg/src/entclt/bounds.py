"""Closed-form right-hand sides of the entropic and Fisher-information CLT bounds,
and the sweep that compares them with measured values.

Every bound is a pure function of ``(d, n, R, Ent(X_1|Z), J(X_1))``.  Measured
quantities for a product of ``d`` iid coordinates are ``d`` times the
one-dimensional values (entropy, relative Fisher information and W₂² are all
additive over independent coordinates).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .convolve import cached_clt_density
from .distributions import DistributionSpec, make_density
from .functionals import relative_entropy_to_gaussian, relative_fisher
from .grid import DEFAULT_N_POINTS
from .poincare import spectral_gap_1d
from .transport import w2_sq_1d

DEFAULT_TOL = 1e-4
R_INFLATION = 1.01
R_DEFLATION = 0.99
CFP19_MIN_R = 1.01

VERDICT_NAMES = {
    "a": "theorem1",
    "b": "propfi",
    "c": "logsobolev",
    "d": "hwi",
    "e": "lemma33",
    "f": "talagrand_j",
    "g": "cfp19",
    "h": "talagrand_ent",
}


def _check_args(d: int, n: int, R: float) -> None:
    if d < 1 or n < 1:
        raise ValueError("d and n must be positive integers")
    if not R >= 1.0:
        raise ValueError(f"Poincaré constant {R} below 1 is impossible for an isotropic law")


def contraction_factor(d: int, n: int, R: float) -> float:
    """``2dR / (2dR + n - 1)``."""
    _check_args(d, n, R)
    return 2.0 * d * R / (2.0 * d * R + (n - 1))


def theorem1_bound(d: int, n: int, R: float, ent1: float, j1: float) -> float:
    """``min{κ Ent(X_1|Z), sqrt(d(R-1)/n · κ J(X_1))}`` with ``κ = 2dR/(2dR+n-1)``."""
    k = contraction_factor(d, n, R)
    first = k * ent1
    second = math.sqrt(max(d * (R - 1.0) / n * k * j1, 0.0))
    return min(first, second)


def propfi_bound(d: int, n: int, R: float, j1: float) -> float:
    """``κ J(X_1)``."""
    return contraction_factor(d, n, R) * j1


def cfp19_bound(d: int, n: int, R: float, j1: float) -> float:
    """``d(R-1)/(2n) · log(1 + J(X_1) n / ((R-1) d))``.

    At ``R = 1`` the expression is a ``0·∞`` form; ``inf`` is returned as a
    sentinel and callers skip the comparison.
    """
    _check_args(d, n, R)
    if j1 == 0.0:
        return 0.0
    if R <= 1.0:
        return math.inf
    a = (R - 1.0) * d
    return a / (2.0 * n) * math.log1p(j1 * n / a)


def logsobolev_bound(j: float) -> float:
    return 0.5 * j


def hwi_bound(w2_sq: float, j: float) -> float:
    """``W₂ sqrt(J)`` (the HWI bound without the ``-W₂²/2`` refinement)."""
    return math.sqrt(max(w2_sq, 0.0) * max(j, 0.0))


def lemma33_bound(d: int, n: int, R: float) -> float:
    """``d(R-1)/n``."""
    _check_args(d, n, R)
    return d * (R - 1.0) / n


def emz20_shape(d: int, n: int, ent1: float) -> float:
    """``d^10 (1 + Ent)/n`` without its unspecified universal constant (context only)."""
    return d**10 * (1.0 + ent1) / n


@dataclass(frozen=True)
class Verdict:
    name: str
    measured: float
    bound: float
    slack: float
    passed: bool
    skipped: bool = False


@dataclass(frozen=True)
class BoundReport:
    family: str
    d: int
    n: int
    measured_ent: float
    measured_j: float
    measured_w2sq: float
    c_p: float
    r_used: float
    r_lower: float
    bound_thm1: float
    bound_propfi: float
    bound_cfp19: float
    bound_logsobolev: float
    bound_hwi: float
    bound_lemma33: float
    emz20_shape: float
    verdicts: tuple = field(default=())
    error: str = ""
    tol: float = DEFAULT_TOL

    @property
    def passed(self) -> bool:
        return not self.error and all(v.passed for v in self.verdicts)

    def as_row(self) -> dict:
        row = {
            "family": self.family,
            "d": self.d,
            "n": self.n,
            "measured_ent": self.measured_ent,
            "measured_j": self.measured_j,
            "measured_w2sq": self.measured_w2sq,
            "c_p": self.c_p,
            "r_used": self.r_used,
            "r_lower": self.r_lower,
            "bound_thm1": self.bound_thm1,
            "bound_propfi": self.bound_propfi,
            "bound_cfp19": self.bound_cfp19,
            "bound_logsobolev": self.bound_logsobolev,
            "bound_hwi": self.bound_hwi,
            "bound_lemma33": self.bound_lemma33,
            "emz20_shape": self.emz20_shape,
            "tol": self.tol,
        }
        for v in self.verdicts:
            row[f"slack_{v.name}"] = v.slack
            row[f"pass_{v.name}"] = "skip" if v.skipped else ("pass" if v.passed else "fail")
        row["passed"] = self.passed
        row["error"] = self.error
        return row


def _verdict(name: str, measured: float, bound: float, tol: float) -> Verdict:
    slack = bound - measured
    return Verdict(name, measured, bound, slack, bool(slack >= -tol))


@dataclass(frozen=True)
class _OneDim:
    ent: float
    j: float
    w2sq: float


_gaussian_ref = {}


def _one_dim(spec: DistributionSpec, n: int, n_points: int) -> _OneDim:
    zn = cached_clt_density(spec, n, n_points)
    ref = _gaussian_ref.get(n_points)
    if ref is None:
        ref = _gaussian_ref[n_points] = make_density(DistributionSpec.gaussian(), n_points)
    return _OneDim(relative_entropy_to_gaussian(zn), relative_fisher(zn), w2_sq_1d(zn, ref))


def evaluate_cell(
    family: str,
    d: int,
    n: int,
    c_p: float,
    base: _OneDim,
    cell: _OneDim,
    tol: float = DEFAULT_TOL,
) -> BoundReport:
    """Bounds and verdicts for one ``(d, n)`` cell from per-coordinate values."""
    r_up = max(c_p * R_INFLATION, 1.0)
    # the universal lower bound C_P >= 1 still holds after deflation
    r_dn = max(c_p * R_DEFLATION, 1.0)
    ent1, j1 = d * base.ent, d * base.j
    ent, j, w2 = d * cell.ent, d * cell.j, d * cell.w2sq
    ent1 = max(ent1, 0.0)
    j1 = max(j1, 0.0)
    thm1 = theorem1_bound(d, n, r_up, ent1, j1)
    pfi = propfi_bound(d, n, r_up, j1)
    cfp = cfp19_bound(d, n, r_dn, j1)
    ls = logsobolev_bound(j)
    hwi = hwi_bound(w2, j)
    l33 = lemma33_bound(d, n, r_dn)
    verdicts = [
        _verdict("theorem1", ent, thm1, tol),
        _verdict("propfi", j, pfi, tol),
        _verdict("logsobolev", ent, ls, tol),
        _verdict("hwi", ent, hwi, tol),
        _verdict("lemma33", w2, l33, tol),
        _verdict("talagrand_j", w2, j, tol),
        _verdict("talagrand_ent", w2, 2.0 * ent, tol),
    ]
    if r_dn > CFP19_MIN_R and math.isfinite(cfp):
        verdicts.append(_verdict("cfp19", ent, cfp, tol))
    else:
        verdicts.append(Verdict("cfp19", ent, cfp, math.nan, True, skipped=True))
    return BoundReport(
        family=family,
        d=d,
        n=n,
        measured_ent=ent,
        measured_j=j,
        measured_w2sq=w2,
        c_p=c_p,
        r_used=r_up,
        r_lower=r_dn,
        bound_thm1=thm1,
        bound_propfi=pfi,
        bound_cfp19=cfp,
        bound_logsobolev=ls,
        bound_hwi=hwi,
        bound_lemma33=l33,
        emz20_shape=emz20_shape(d, n, ent1),
        verdicts=tuple(verdicts),
        tol=tol,
    )


def run_suite(
    spec: DistributionSpec,
    d_list,
    n_list,
    n_points: int = DEFAULT_N_POINTS,
    tol: float = DEFAULT_TOL,
) -> list[BoundReport]:
    """Reports for every ``(d, n)`` cell, ordered by ``d`` then ``n``.

    A failure inside a cell is recorded in that report's ``error`` field
    (and counts as a failed report) instead of aborting the sweep.
    """
    if not spec.has_score:
        raise ValueError(f"{spec.name} has no score; bound sweeps need one")
    base_g = make_density(spec, n_points)
    c_p = spectral_gap_1d(base_g).c_p
    base = _one_dim(spec, 1, n_points)
    out = []
    for d in sorted(set(int(v) for v in d_list)):
        for n in sorted(set(int(v) for v in n_list)):
            try:
                cell = _one_dim(spec, n, n_points)
                out.append(evaluate_cell(spec.name, d, n, c_p, base, cell, tol))
            except (ValueError, ArithmeticError) as exc:
                out.append(_failed(spec.name, d, n, c_p, str(exc), tol))
    return out


def _failed(family: str, d: int, n: int, c_p: float, msg: str, tol: float) -> BoundReport:
    nan = math.nan
    return BoundReport(family, d, n, nan, nan, nan, c_p, nan, nan, nan, nan, nan, nan, nan, nan, nan,
                       (), error=msg or "error", tol=tol)
