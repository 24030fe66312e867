"""CSV output and the binary snapshot layout.

Snapshot files hold, all little-endian: int64 d, int64 level, int64 n,
float64 points[n * d] (row-major), float64 values[n].  A plain-text manifest
of ``key = value`` lines sits next to each snapshot.
"""
from __future__ import annotations

import csv
import json
import subprocess
from pathlib import Path

import numpy as np

from .errors import ErrorReport

__all__ = [
    "emit_csv",
    "read_csv",
    "write_snapshot",
    "read_snapshot",
    "write_manifest",
    "read_manifest",
    "git_describe",
]


def _rows(result) -> tuple[list, list]:
    from .sweep import SweepResult
    if isinstance(result, SweepResult):
        return result.columns(), result.rows()
    if isinstance(result, ErrorReport):
        row = result.as_row()
        return list(row), [row]
    if isinstance(result, (list, tuple)) and all(isinstance(r, ErrorReport) for r in result):
        rows = [r.as_row() for r in result]
        cols = list(rows[0]) if rows else ["l2_error", "n_eval", "eval_seed", "method", "std_error"]
        return cols, rows
    raise TypeError(f"cannot write {type(result).__name__} as CSV")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))  # shortest round-trip repr
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return v


def emit_csv(result, path) -> Path:
    """Write a header row plus one row per data point."""
    path = Path(path)
    cols, rows = _rows(result)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
            w.writeheader()
            for row in rows:
                w.writerow({k: _fmt(v) for k, v in row.items()})
    except OSError as err:
        raise OSError(f"could not write CSV to {path}: {err}") from err
    return path


def _parse(v: str):
    if v == "":
        return None
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def read_csv(path) -> list:
    """Rows as dicts with numeric fields parsed back to int/float."""
    with Path(path).open(newline="") as fh:
        return [{k: _parse(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def write_snapshot(path, d: int, level: int, points: np.ndarray, values: np.ndarray) -> Path:
    points = np.ascontiguousarray(points, dtype="<f8")
    values = np.ascontiguousarray(values, dtype="<f8")
    n = values.size
    if points.shape != (n, d):
        raise ValueError(f"points shape {points.shape} does not match ({n}, {d})")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        fh.write(np.array([d, level, n], dtype="<i8").tobytes())
        fh.write(points.tobytes())
        fh.write(values.tobytes())
    return path


def read_snapshot(path) -> tuple[int, int, np.ndarray, np.ndarray]:
    raw = Path(path).read_bytes()
    if len(raw) < 24:
        raise ValueError(f"{path}: truncated snapshot header")
    d, level, n = (int(v) for v in np.frombuffer(raw[:24], dtype="<i8"))
    expected = 24 + 8 * n * (d + 1)
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(raw)}")
    body = np.frombuffer(raw[24:], dtype="<f8")
    points = body[: n * d].reshape(n, d).astype(float)
    values = body[n * d:].astype(float)
    return d, level, points, values


def git_describe() -> str:
    try:
        here = Path(__file__).resolve().parent
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], cwd=here,
                             capture_output=True, text=True, timeout=10)
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def write_manifest(path, entries: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for key, value in entries.items():
        text = json.dumps(value, sort_keys=True) if not isinstance(value, str) else value
        lines.append(f"{key} = {text}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_manifest(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, _, value = line.partition(" = ")
        try:
            out[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            out[key.strip()] = value
    return out
