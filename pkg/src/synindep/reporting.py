"""Canonical serialisation: sorted-key JSON and fixed-format CSV.

All file outputs flow through these helpers so that reruns with the same
seeds are byte-identical.  JSON uses sorted keys and two-space indent;
CSV uses comma delimiters, ``.`` decimals, LF line endings and 17
significant digits for floats.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def jsonable(obj):
    """Recursively convert numpy containers and scalars to plain Python."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    return obj


def canonical_json(doc) -> str:
    return json.dumps(jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, doc) -> None:
    Path(path).write_text(canonical_json(doc), encoding="utf-8", newline="\n")


def format_value(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def write_csv(path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(format_value(x) for x in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_series_csv(path, u, y) -> None:
    """Two-column data file for one system: observed input and output."""
    write_csv(path, ["input", "output"], zip(u, y))


def read_series_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column ``input,output`` data file (header required)."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or [c.strip() for c in lines[0].split(",")] != ["input", "output"]:
        raise ValueError(f"{path}: expected header 'input,output'")
    u, y = [], []
    for i, ln in enumerate(lines[1:], start=2):
        cells = ln.split(",")
        if len(cells) != 2:
            raise ValueError(f"{path}:{i}: expected two columns, got {len(cells)}")
        try:
            u.append(float(cells[0]))
            y.append(float(cells[1]))
        except ValueError:
            raise ValueError(f"{path}:{i}: non-numeric value") from None
    return np.asarray(u), np.asarray(y)
