"""Deterministic text output for grids, tables, and run summaries.

All floats are rendered with 17 significant digits so values survive a
write/read round trip exactly; files are written atomically (temp file in
the target directory, then rename) so readers never observe partial data.
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DomainError

__all__ = [
    "fmt",
    "atomic_write_text",
    "write_field_csv",
    "read_field_csv",
    "write_table_csv",
    "read_table_csv",
    "write_summary_json",
    "read_summary_json",
]


def fmt(x: float) -> str:
    """Shortest decimal with 17 significant digits; round-trips exactly."""
    return f"{float(x):.17g}"


def atomic_write_text(path: str | Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_field_csv(path: str | Path, xs, ys, values: np.ndarray):
    """Field on a uniform tensor lattice.

    Line 1 is the header ``nx,ny,x_lo,x_hi,y_lo,y_hi``; the next nx lines
    hold the row-major values (row ix lists all y values at x = xs[ix]).
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.shape != (len(xs), len(ys)):
        raise DomainError(
            f"values shaped {values.shape} do not match lattice ({len(xs)}, {len(ys)})"
        )
    head = ",".join(
        [str(len(xs)), str(len(ys)), fmt(xs[0]), fmt(xs[-1]), fmt(ys[0]), fmt(ys[-1])]
    )
    lines = [head]
    for row in values:
        lines.append(",".join(fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_field_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse of write_field_csv; reconstructs the uniform axes."""
    lines = Path(path).read_text().strip().split("\n")
    head = lines[0].split(",")
    if len(head) != 6:
        raise ConfigError(f"{path}: malformed field header {lines[0]!r}")
    nx, ny = int(head[0]), int(head[1])
    xs = np.linspace(float(head[2]), float(head[3]), nx)
    ys = np.linspace(float(head[4]), float(head[5]), ny)
    if len(lines) != 1 + nx:
        raise ConfigError(f"{path}: expected {nx} value rows, found {len(lines) - 1}")
    values = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    if values.shape != (nx, ny):
        raise ConfigError(f"{path}: value block shaped {values.shape}, expected ({nx}, {ny})")
    return xs, ys, values


def write_table_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence]):
    """Generic numeric table: one header line, then comma-joined rows."""
    lines = [",".join(columns)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (bool, str)):
                cells.append(str(v))
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(fmt(v))
        if len(cells) != len(columns):
            raise DomainError(
                f"row {row!r} has {len(cells)} cells for {len(columns)} columns"
            )
        lines.append(",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_table_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    lines = Path(path).read_text().strip().split("\n")
    cols = lines[0].split(",")
    return cols, [ln.split(",") for ln in lines[1:]]


def _jsonable(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_summary_json(path: str | Path, summary: dict):
    """Run summary; keys sorted so identical runs produce identical bytes."""
    atomic_write_text(path, json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")


def read_summary_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())
