"""Run configuration: defaults, config files (JSON or YAML) and flag overrides.

A config file is a nested key-value document; the recognised keys are listed
in ``FILE_KEYS`` and map onto the CLI flag names.  Precedence is
defaults < file < flags.
"""
from __future__ import annotations

import json
from pathlib import Path

import yaml

__all__ = ["DEFAULTS", "FILE_KEYS", "load_config_file", "flatten", "merge", "parse_values"]

DEFAULTS = {
    "problem": "example1",
    "dim": None,
    "alpha": None,
    "delta": None,
    "family": None,
    "T": 1.0,
    "dt": 0.125,
    "steps": None,
    "paths": 10_000,
    "level": 3,
    "box": None,
    "seed": 0,
    "max_jumps": 1,
    "exterior": "clamp",
    "workers": 1,
    "jobs": 1,
    "out": "run",
    "long": False,
    "axis": "dt",
    "values": None,
    "replicates": 1,
    "reference": None,
    "n_eval": 100_000,
    "eval_seed": 0,
}

# dotted file key -> flag name
FILE_KEYS = {
    "problem": "problem",
    "problem.name": "problem",
    "problem.dim": "dim",
    "problem.T": "T",
    "dim": "dim",
    "seed": "seed",
    "out": "out",
    "long": "long",
    "kernel.family": "family",
    "kernel.alpha": "alpha",
    "kernel.delta": "delta",
    "solver.dt": "dt",
    "solver.n_steps": "steps",
    "solver.m_paths": "paths",
    "solver.max_jumps": "max_jumps",
    "solver.exterior": "exterior",
    "solver.workers": "workers",
    "grid.level": "level",
    "grid.box": "box",
    "sweep.axis": "axis",
    "sweep.values": "values",
    "sweep.replicates": "replicates",
    "sweep.jobs": "jobs",
    "sweep.reference": "reference",
    "eval.n_eval": "n_eval",
    "eval.seed": "eval_seed",
}


def flatten(doc: dict, prefix: str = "") -> dict:
    out = {}
    for key, value in doc.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict) and name not in FILE_KEYS:
            out.update(flatten(value, name + "."))
        else:
            out[name] = value
    return out


def load_config_file(path) -> dict:
    """Parse a JSON or YAML file into flag-name keys; unknown keys are an error."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        doc = json.loads(text)
    else:
        doc = yaml.safe_load(text)
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: expected a mapping at the top level")
    out = {}
    for key, value in flatten(doc).items():
        if key not in FILE_KEYS:
            raise ValueError(f"{path}: unknown config key {key!r}")
        out[FILE_KEYS[key]] = value
    if isinstance(out.get("values"), str):
        out["values"] = parse_values(out["values"])
    return out


def parse_values(text) -> list:
    """'0.125,0.0625' or ['2^-3', ...] -> floats; powers written as a^b are allowed."""
    items = text.split(",") if isinstance(text, str) else list(text)
    vals = []
    for item in items:
        if isinstance(item, (int, float)):
            vals.append(float(item))
            continue
        s = str(item).strip()
        if not s:
            continue
        if "^" in s:
            base, _, exp = s.partition("^")
            vals.append(float(base) ** float(exp))
        else:
            vals.append(float(s))
    return vals


def merge(file_values: dict | None, flag_values: dict) -> dict:
    """Defaults, then file values, then flags that were actually given (not None)."""
    cfg = dict(DEFAULTS)
    cfg.update(file_values or {})
    cfg.update({k: v for k, v in flag_values.items() if v is not None})
    return cfg
