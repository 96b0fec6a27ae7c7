"""Deterministic CSV and JSON report writers."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def _columns(rows: list) -> list:
    cols: list = []
    seen = set()
    for r in rows:
        for k in r:
            if k not in seen:
                seen.add(k)
                cols.append(k)
    return cols


def to_csv(rows: list) -> str:
    buf = io.StringIO()
    cols = _columns(rows)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def to_json(doc: dict) -> str:
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(out_dir: str | Path, stem: str, rows: list, meta: dict) -> tuple[Path, Path]:
    """Write ``<stem>.csv`` and ``<stem>.json`` (rows plus ``meta``)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{stem}.csv"
    json_path = out / f"{stem}.json"
    csv_path.write_text(to_csv(rows))
    json_path.write_text(to_json(dict(meta, rows=rows)))
    return csv_path, json_path
