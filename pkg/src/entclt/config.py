"""Experiment configuration: a single JSON document.

Schema (every key optional; missing keys take the packaged defaults)::

    {
      "families":   [{"family": "generalized_gaussian", "beta": 4}, ...],
      "d_list":     [1, 2, 3],
      "n_list":     [1, 2, 4, 8, 16, 32],
      "t_nodes":    [0.1, 0.5, 1.0],
      "n_points":   4096,            # power of two, >= 1024
      "tolerances": {"bounds": 1e-4, ...},
      "checks":     ["projection"],  # groups or check names for `verify`; [] = all
      "density_files": ["my.json"],  # extra tabulated densities checked by `verify`
      "out":        "reports",
      "jobs":       1,
      "seed":       0                # reserved, the pipeline is deterministic
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .distributions import DistributionSpec

DEFAULT_TOLERANCES = {
    # inequality slacks (zeroed by --strict)
    "bounds": 1e-4,
    "decay": 1e-5,
    "entropy_cost": 1e-5,
    "transport": 1e-4,
    "poincare_lower": 1e-3,
    "stability": 2e-3,
    "projection_slack": 1e-4,
    # accuracy tolerances
    "debruijn": 1e-3,
    "debruijn_gaussian": 1e-8,
    "closed_form_beta": 1e-5,
    "closed_form_theta": 1e-4,
    "score_moments": 1e-4,
    "poincare_rel": 1e-2,
    "identity": 1e-4,
    "telescoping": 1e-3,
    "m_scalar": 1e-3,
    "gaussian_residual": 1e-5,
    "hwi": 1e-5,
    "rate_shape": 0.2,
}
SLACK_KEYS = ("bounds", "decay", "entropy_cost", "transport", "poincare_lower", "stability", "projection_slack")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    families: tuple
    d_list: tuple = (1, 2, 3)
    n_list: tuple = (1, 2, 4, 8, 16, 32)
    t_nodes: tuple = (0.1, 0.5, 1.0)
    n_points: int = 4096
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    checks: tuple = ()
    density_files: tuple = ()
    out: str = "reports"
    jobs: int = 1
    seed: int = 0

    def tol(self, key: str) -> float:
        return self.tolerances[key]

    def strict(self) -> "ExperimentConfig":
        """Same config with every inequality slack set to zero."""
        tols = dict(self.tolerances)
        for k in SLACK_KEYS:
            tols[k] = 0.0
        return replace(self, tolerances=tols)

    def to_dict(self) -> dict:
        return {
            "families": [f.to_dict() for f in self.families],
            "d_list": list(self.d_list),
            "n_list": list(self.n_list),
            "t_nodes": list(self.t_nodes),
            "n_points": self.n_points,
            "tolerances": dict(self.tolerances),
            "checks": list(self.checks),
            "density_files": list(self.density_files),
            "out": self.out,
            "jobs": self.jobs,
            "seed": self.seed,
        }


def _int_list(raw, key: str, minimum: int = 1) -> tuple:
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{key} must be a nonempty list")
    out = []
    for v in raw:
        if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
            raise ConfigError(f"{key} entries must be integers >= {minimum}, got {v!r}")
        out.append(v)
    return tuple(out)


def from_dict(raw: dict, base: dict | None = None) -> ExperimentConfig:
    """Validate a config document, filling gaps from ``base`` (the packaged defaults)."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    merged = dict(base or {})
    unknown = set(raw) - {
        "families", "d_list", "n_list", "t_nodes", "n_points", "tolerances",
        "checks", "density_files", "out", "jobs", "seed",
    }
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    tol_raw = dict((base or {}).get("tolerances", {}))
    merged.update(raw)
    tol_raw.update(raw.get("tolerances", {}) or {})

    fams = merged.get("families")
    if not isinstance(fams, list) or not fams:
        raise ConfigError("families must be a nonempty list")
    try:
        families = tuple(DistributionSpec.from_dict(f) for f in fams)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad family entry: {exc}") from exc

    n_points = merged.get("n_points", 4096)
    if isinstance(n_points, bool) or not isinstance(n_points, int) or n_points < 1024 or n_points & (n_points - 1):
        raise ConfigError(f"n_points must be a power of two >= 1024, got {n_points!r}")

    t_nodes = merged.get("t_nodes", [0.1, 0.5, 1.0])
    if not isinstance(t_nodes, list) or not t_nodes:
        raise ConfigError("t_nodes must be a nonempty list")
    for t in t_nodes:
        if isinstance(t, bool) or not isinstance(t, (int, float)) or not math.isfinite(t) or t < 0:
            raise ConfigError(f"t_nodes entries must be finite and >= 0, got {t!r}")

    tolerances = dict(DEFAULT_TOLERANCES)
    for k, v in tol_raw.items():
        if k not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown tolerance {k!r}")
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not (v > 0) or not math.isfinite(v):
            raise ConfigError(f"tolerance {k} must be positive and finite, got {v!r}")
        tolerances[k] = float(v)

    checks = merged.get("checks", [])
    files = merged.get("density_files", [])
    if not isinstance(checks, list) or not all(isinstance(c, str) for c in checks):
        raise ConfigError("checks must be a list of strings")
    if not isinstance(files, list) or not all(isinstance(c, str) for c in files):
        raise ConfigError("density_files must be a list of paths")
    jobs = merged.get("jobs", 1)
    if isinstance(jobs, bool) or not isinstance(jobs, int) or jobs < 1:
        raise ConfigError("jobs must be a positive integer")
    seed = merged.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    out = merged.get("out", "reports")
    if not isinstance(out, str) or not out:
        raise ConfigError("out must be a path")

    return ExperimentConfig(
        families=families,
        d_list=_int_list(merged.get("d_list", [1, 2, 3]), "d_list"),
        n_list=_int_list(merged.get("n_list", [1, 2, 4, 8, 16, 32]), "n_list"),
        t_nodes=tuple(float(t) for t in t_nodes),
        n_points=n_points,
        tolerances=tolerances,
        checks=tuple(checks),
        density_files=tuple(files),
        out=out,
        jobs=jobs,
        seed=seed,
    )


def default_document() -> dict:
    text = resources.files("entclt").joinpath("default_config.json").read_text()
    return json.loads(text)


def default_config() -> ExperimentConfig:
    return from_dict(default_document())


def load(path: str | Path | None) -> ExperimentConfig:
    """Read a JSON config file; relative density-file paths resolve against it."""
    base = default_document()
    if path is None:
        return from_dict(base)
    p = Path(path)
    try:
        raw = json.loads(p.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {p} is not valid JSON: {exc}") from exc
    cfg = from_dict(raw, base)
    files = tuple(str((p.parent / f) if not Path(f).is_absolute() else Path(f)) for f in cfg.density_files)
    return replace(cfg, density_files=files)
