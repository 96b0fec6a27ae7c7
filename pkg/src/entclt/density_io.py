"""Tabulated densities on disk.

Format: a JSON object ``{"lo": float, "hi": float, "values": [float, ...]}``
with optional ``"label"`` and ``"scoreable"`` keys.  Values are nodal
density values on the uniform grid from ``lo`` to ``hi``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .grid import GridDensity, GridError

MASS_TOL = 1e-6


class DensityFileError(GridError):
    pass


def save_density(g: GridDensity, path: str | Path) -> None:
    doc = {
        "lo": g.lo,
        "hi": g.hi,
        "values": [float(v) for v in g.values],
        "label": g.label,
        "scoreable": g.scoreable,
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True))


def load_density(path: str | Path) -> GridDensity:
    """Read and validate a density file; any defect raises :class:`DensityFileError`."""
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except OSError as exc:
        raise DensityFileError(f"cannot read {p}: {exc}") from exc
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DensityFileError(f"{p} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not {"lo", "hi", "values"} <= set(doc):
        raise DensityFileError(f"{p}: expected keys lo, hi, values")
    try:
        lo = float(doc["lo"])
        hi = float(doc["hi"])
        vals = np.asarray(doc["values"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise DensityFileError(f"{p}: non-numeric entries ({exc})") from exc
    if vals.ndim != 1 or vals.shape[0] < 3:
        raise DensityFileError(f"{p}: need a flat list of at least 3 values")
    if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
        raise DensityFileError(f"{p}: bad interval [{lo}, {hi}]")
    if not np.all(np.isfinite(vals)):
        raise DensityFileError(f"{p}: non-finite density values")
    if np.any(vals < 0):
        raise DensityFileError(f"{p}: negative density values")
    g = GridDensity(lo, hi, vals, label=str(doc.get("label", p.stem)), scoreable=bool(doc.get("scoreable", True)))
    if abs(g.mass() - 1.0) > MASS_TOL:
        raise DensityFileError(f"{p}: total mass {g.mass():.6g} differs from 1")
    return g
