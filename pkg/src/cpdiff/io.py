"""CSV/JSON emission and point-list export.

CSV files start with one ``# metadata: {...}`` comment line holding the
full run configuration, then a header row; numbers use 17 significant
digits and '.' as decimal separator regardless of locale. JSON output
mirrors the CSV columns and rows and carries the same metadata.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

__all__ = ["fmt", "points_table", "read_metadata", "render", "spectrum_table", "write_output"]

METADATA_PREFIX = "# metadata: "


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return "%.17g" % float(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    return v


def render(payload: dict, fmt_name: str) -> str:
    """Text of a result payload with keys metadata, columns, rows, summary."""
    payload = _jsonable(payload)
    if fmt_name == "json":
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    meta = dict(payload["metadata"])
    meta["summary"] = payload.get("summary", {})
    lines = [METADATA_PREFIX + json.dumps(meta, sort_keys=True), ",".join(payload["columns"])]
    lines += [",".join(fmt(v) for v in row) for row in payload["rows"]]
    return "\n".join(lines) + "\n"


def write_output(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(path).write_text(text)


def read_metadata(path) -> dict:
    """Metadata block of an emitted CSV or JSON file, or a plain config JSON."""
    text = Path(path).read_text()
    if text.startswith(METADATA_PREFIX):
        return json.loads(text.splitlines()[0][len(METADATA_PREFIX):])
    data = json.loads(text)
    return data.get("metadata", data)


def points_table(scheme, coords: np.ndarray):
    """Columns and rows (integer coords, direct position, star) for a point list."""
    pos = coords @ scheme.basis.T
    cols = ([f"c{i}" for i in range(scheme.n)] + [f"x{i}" for i in range(scheme.d)]
            + [f"xstar{i}" for i in range(scheme.m)])
    rows = [list(map(int, c)) + list(p) for c, p in zip(coords, pos)]
    return cols, rows


def spectrum_table(spec):
    d = spec.k_direct.shape[1]
    m = spec.k_star.shape[1]
    n = spec.coords.shape[1]
    cols = ([f"k_c{i}" for i in range(n)] + [f"k{i}" for i in range(d)]
            + [f"kstar{i}" for i in range(m)] + ["intensity"])
    rows = [list(map(int, c)) + list(kd) + list(ks) + [float(i)]
            for c, kd, ks, i in zip(spec.coords, spec.k_direct, spec.k_star, spec.intensity)]
    return cols, rows
