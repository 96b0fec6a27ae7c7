"""Closed-form distribution families and their exact information values."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import (
    DEFAULT_N_POINTS,
    GridDensity,
    GridError,
    ProductMeasure,
    build_from_pdf,
    normalize,
    standardize,
)

# Lanczos approximation, g = 7, n = 9 (Godfrey's coefficients).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_series(z: float) -> float:
    # z is the shifted argument x - 1, with x >= 0.5
    acc = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[k] / (z + k)
    return acc


def log_gamma_fn(x: float) -> float:
    """``log Γ(x)`` for ``x > 0``."""
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"log_gamma_fn requires x > 0, got {x}")
    if x < 0.5:
        return log_gamma_fn(x + 1.0) - math.log(x)
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(_lanczos_series(z))


def gamma_fn(x: float) -> float:
    """Γ(x) for ``x > 0``, relative error below 1e-12."""
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"gamma_fn requires x > 0, got {x}")
    if x < 0.5:
        # Γ(x) = Γ(x + 1) / x keeps the series in its accurate range
        return gamma_fn(x + 1.0) / x
    if x > 171.0:
        return math.exp(log_gamma_fn(x))
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    # t^(z+1/2) is split in two so it cannot overflow before e^(-t) is applied
    half = t ** (0.5 * (z + 0.5))
    return math.sqrt(2.0 * math.pi) * half * (half * math.exp(-t)) * _lanczos_series(z)


FAMILIES = ("gaussian", "generalized_gaussian", "student_t", "uniform_sqrt3", "gaussian_mixture")


@dataclass(frozen=True)
class DistributionSpec:
    """A named one-dimensional law.

    Use the class-method constructors; ``beta``/``theta`` and the mixture
    tuples are only meaningful for their own family.
    """

    family: str
    beta: float | None = None
    theta: float | None = None
    weights: tuple = ()
    means: tuple = ()
    sds: tuple = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "generalized_gaussian":
            if self.beta is None or not self.beta > 1.0:
                raise ValueError("generalized_gaussian needs beta > 1")
        if self.family == "student_t":
            if self.theta is None or not self.theta > 2.0:
                raise ValueError("student_t needs theta > 2")
        if self.family == "gaussian_mixture":
            k = len(self.weights)
            if k == 0 or len(self.means) != k or len(self.sds) != k:
                raise ValueError("mixture needs equal-length weights, means, sds")
            if any(w <= 0 for w in self.weights) or any(s <= 0 for s in self.sds):
                raise ValueError("mixture weights and sds must be positive")
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
            object.__setattr__(self, "means", tuple(float(m) for m in self.means))
            object.__setattr__(self, "sds", tuple(float(s) for s in self.sds))

    @classmethod
    def gaussian(cls) -> "DistributionSpec":
        return cls("gaussian")

    @classmethod
    def generalized_gaussian(cls, beta: float) -> "DistributionSpec":
        return cls("generalized_gaussian", beta=float(beta))

    @classmethod
    def student_t(cls, theta: float) -> "DistributionSpec":
        return cls("student_t", theta=float(theta))

    @classmethod
    def uniform_sqrt3(cls) -> "DistributionSpec":
        return cls("uniform_sqrt3")

    @classmethod
    def gaussian_mixture(cls, weights, means, sds) -> "DistributionSpec":
        return cls("gaussian_mixture", weights=tuple(weights), means=tuple(means), sds=tuple(sds))

    @classmethod
    def from_dict(cls, d: dict) -> "DistributionSpec":
        fam = d.get("family")
        if fam == "generalized_gaussian":
            return cls.generalized_gaussian(d["beta"])
        if fam == "student_t":
            return cls.student_t(d["theta"])
        if fam == "gaussian_mixture":
            return cls.gaussian_mixture(d["weights"], d["means"], d["sds"])
        if fam in ("gaussian", "uniform_sqrt3"):
            return cls(fam)
        raise ValueError(f"unknown family {fam!r}")

    def to_dict(self) -> dict:
        out = {"family": self.family}
        if self.beta is not None:
            out["beta"] = self.beta
        if self.theta is not None:
            out["theta"] = self.theta
        if self.family == "gaussian_mixture":
            out.update(weights=list(self.weights), means=list(self.means), sds=list(self.sds))
        return out

    @property
    def has_score(self) -> bool:
        return self.family != "uniform_sqrt3"

    @property
    def name(self) -> str:
        if self.family == "generalized_gaussian":
            return f"q_{self.beta:g}"
        if self.family == "student_t":
            return f"t_{self.theta:g}"
        if self.family == "gaussian_mixture":
            return "mix_" + "_".join(f"{m:g}" for m in self.means)
        return self.family

    # Example-family constants -------------------------------------------------

    @property
    def b_beta(self) -> float:
        b = self.beta
        return (gamma_fn(3.0 / b) / gamma_fn(1.0 / b)) ** (b / 2.0)

    @property
    def c_beta(self) -> float:
        b = self.beta
        return b / (2.0 * gamma_fn(1.0 / b)) * math.sqrt(gamma_fn(3.0 / b) / gamma_fn(1.0 / b))

    @property
    def c_theta(self) -> float:
        th = self.theta
        return math.exp(log_gamma_fn((th + 1.0) / 2.0) - log_gamma_fn(th / 2.0)) / math.sqrt(
            math.pi * (th - 2.0)
        )

    def pdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        fam = self.family
        if fam == "gaussian":
            return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        if fam == "generalized_gaussian":
            return self.c_beta * np.exp(-self.b_beta * np.abs(x) ** self.beta)
        if fam == "student_t":
            th = self.theta
            return self.c_theta * (1.0 + x * x / (th - 2.0)) ** (-(th + 1.0) / 2.0)
        if fam == "uniform_sqrt3":
            s3 = math.sqrt(3.0)
            return np.where(np.abs(x) <= s3, 1.0 / (2.0 * s3), 0.0)
        out = np.zeros_like(x)
        wsum = sum(self.weights)
        for w, m, s in zip(self.weights, self.means, self.sds):
            z = (x - m) / s
            out += (w / wsum) * np.exp(-0.5 * z * z) / (s * math.sqrt(2.0 * math.pi))
        return out

    def log_pdf_derivative(self, x):
        """Exact score of the (unstandardized) family density."""
        x = np.asarray(x, dtype=np.float64)
        fam = self.family
        if fam == "gaussian":
            return -x
        if fam == "generalized_gaussian":
            b = self.beta
            return -self.b_beta * b * np.sign(x) * np.abs(x) ** (b - 1.0)
        if fam == "student_t":
            th = self.theta
            return -(th + 1.0) * x / (th - 2.0 + x * x)
        raise ValueError(f"no closed-form score for {fam}")


def closed_form_J_beta(beta: float) -> float:
    """Relative Fisher information of the unit-variance generalized Gaussian."""
    if not beta > 1.0:
        raise ValueError("beta must exceed 1")
    return (
        beta**2
        * gamma_fn(3.0 / beta)
        * gamma_fn(2.0 - 1.0 / beta)
        / gamma_fn(1.0 / beta) ** 2
        - 1.0
    )


def closed_form_J_theta(theta: float) -> float:
    """Relative Fisher information of the unit-variance Student law."""
    if not theta > 2.0:
        raise ValueError("theta must exceed 2")
    return 6.0 / ((theta - 2.0) * (theta + 3.0))


def _mixture_center_scale(spec: DistributionSpec) -> tuple[float, float]:
    w = np.asarray(spec.weights) / sum(spec.weights)
    m = np.asarray(spec.means)
    s = np.asarray(spec.sds)
    mean = float(w @ m)
    var = float(w @ (s * s + m * m)) - mean * mean
    return mean, math.sqrt(var)


@lru_cache(maxsize=64)
def make_density(spec: DistributionSpec, n_points: int = DEFAULT_N_POINTS) -> GridDensity:
    """Standardized grid density of ``spec``.

    The uniform law is returned exactly on ``[-√3, √3]`` (already unit
    variance) and flagged as not scoreable.
    """
    if spec.family == "uniform_sqrt3":
        if n_points < 3:
            raise GridError("n_points too small")
        s3 = math.sqrt(3.0)
        g = GridDensity(-s3, s3, np.full(n_points, 1.0 / (2.0 * s3)), scoreable=False, label=spec.name)
        return normalize(g)
    if spec.family == "gaussian_mixture":
        center, sc = _mixture_center_scale(spec)
    else:
        center, sc = 0.0, 1.0
    g = build_from_pdf(spec.pdf, center, sc, n_points, label=spec.name)
    return standardize(g)


def product_iid(spec: DistributionSpec, d: int, n_points: int = DEFAULT_N_POINTS) -> ProductMeasure:
    if d < 1:
        raise ValueError("dimension must be at least 1")
    g = make_density(spec, n_points)
    return ProductMeasure((g,) * d, iid_flag=True)
