"""Reference solutions for problems without a closed form.

A reference run directory holds ``reference.bin`` (see :mod:`.io` for the
layout) and ``manifest.txt`` with the problem, the solver config, the box and
the build's git description.
"""
from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from ..problems import ProblemSpec
from ..solver import SolutionSnapshot, SolverConfig, final_snapshot
from ..sparse_grid import build_grid, fit
from .io import git_describe, read_manifest, read_snapshot, write_manifest, write_snapshot

__all__ = ["reference_solution", "load_reference", "SNAPSHOT_NAME", "MANIFEST_NAME"]

SNAPSHOT_NAME = "reference.bin"
MANIFEST_NAME = "manifest.txt"

log = logging.getLogger(__name__)


def problem_echo(problem: ProblemSpec) -> dict:
    echo = {"problem": problem.name, "d": problem.d, "T": problem.T,
            "box": problem.box.tolist()}
    if problem.kernel is not None:
        k = problem.kernel
        echo["kernel"] = {"family": k.family.value, "delta": k.delta, "alpha": k.alpha,
                          "beta": k.beta, "sigma": k.sigma}
    return echo


def reference_solution(problem: ProblemSpec, fine_config: SolverConfig, out_dir=None,
                       progress=None) -> SolutionSnapshot:
    """Solve once with a fine config; persist the final snapshot when ``out_dir`` is given."""
    snap = final_snapshot(problem, fine_config, progress)
    if out_dir is not None:
        out = Path(out_dir)
        design = snap.interpolant.design
        write_snapshot(out / SNAPSHOT_NAME, problem.d, design.level, design.points, snap.node_values)
        entries = problem_echo(problem)
        entries.update({"config": fine_config.to_dict(), "step_index": snap.step_index,
                        "time": snap.time, "git": git_describe()})
        write_manifest(out / MANIFEST_NAME, entries)
        log.info("reference written to %s", out)
    return snap


def load_reference(run_dir, exterior_policy: str = "clamp") -> tuple[SolutionSnapshot, dict]:
    """Rebuild the reference interpolant from a run directory."""
    run_dir = Path(run_dir)
    d, level, points, values = read_snapshot(run_dir / SNAPSHOT_NAME)
    manifest = read_manifest(run_dir / MANIFEST_NAME)
    box = np.asarray(manifest.get("box", [[-1.0, 1.0]] * d), dtype=float)
    design = build_grid(d, level, box)
    if design.n_points != len(values):
        raise ValueError(f"{run_dir}: snapshot holds {len(values)} values, grid has {design.n_points}")
    # points are stored for auditability; match them to the rebuilt design
    order = {tuple(p): i for i, p in enumerate(np.round(points, 14))}
    try:
        idx = np.array([order[tuple(p)] for p in np.round(design.points, 14)])
    except KeyError as err:
        raise ValueError(f"{run_dir}: stored points do not match a level-{level} grid") from err
    vals = values[idx]
    snap = SolutionSnapshot(int(manifest.get("step_index", 0)), float(manifest.get("time", 0.0)),
                            vals, fit(design, vals, exterior_policy))
    return snap, manifest
