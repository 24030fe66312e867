"""Implicit-explicit sparse-grid Monte Carlo time stepper.

Each step restarts ``M`` paths at every sparse-grid node, scores them with

    S = I[u_prev](X) * 1{X in box} + g(t_i, X) * 1{X outside} + dt * f(t_{i-1}, X, I[u_prev](X))

and averages with ``math.fsum`` so the node value is independent of how paths
are batched.  The nonlinearity always sees the previous interpolant (exterior
policy applied to exited paths).  Grid points outside the open box (faces of
the box included) lie in the constraint region and take ``g(t_i, x)``.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import rng
from ._validation import NumericalError, check_nonneg_int, check_positive, check_positive_int
from .problems import ProblemSpec
from .sde import in_domain, simulate_paths
from .sparse_grid import ExteriorPolicy, SparseGridDesign, SparseInterpolant, build_grid, fit

__all__ = [
    "SolverConfig",
    "SolutionSnapshot",
    "initialize",
    "advance_step",
    "solve",
    "final_snapshot",
]

_PATH_CHUNK = 8192


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    n_steps: int
    m_paths: int = 10_000
    grid_level: int = 3
    max_jumps: int = 1
    exterior_policy: str = "clamp"
    master_seed: int = 0
    n_workers: int = 1
    keep_last: int | None = None

    def __post_init__(self):
        check_positive("dt", self.dt)
        check_positive_int("n_steps", self.n_steps)
        check_positive_int("m_paths", self.m_paths)
        check_positive_int("grid_level", self.grid_level)
        check_nonneg_int("max_jumps", self.max_jumps)
        check_positive_int("n_workers", self.n_workers)
        if self.keep_last is not None:
            check_positive_int("keep_last", self.keep_last)
        ExteriorPolicy(self.exterior_policy)
        if int(self.master_seed) != self.master_seed:
            raise ValueError("master_seed must be an integer")

    @classmethod
    def for_horizon(cls, T: float, dt: float, **kw) -> "SolverConfig":
        n = round(T / dt)
        if abs(n * dt - T) > 1e-12:
            raise ValueError(f"dt={dt} does not divide T={T}")
        return cls(dt=dt, n_steps=n, **kw)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class SolutionSnapshot:
    step_index: int
    time: float
    node_values: np.ndarray
    interpolant: SparseInterpolant | None = field(default=None, repr=False)

    def __call__(self, x):
        if self.interpolant is None:
            raise ValueError("this snapshot no longer holds its interpolant")
        return self.interpolant(x)


def _check(problem: ProblemSpec, config: SolverConfig):
    if abs(config.dt * config.n_steps - problem.T) > 1e-12:
        raise ValueError(f"dt * n_steps = {config.dt * config.n_steps} does not match T = {problem.T}")


def initialize(problem: ProblemSpec, config: SolverConfig,
               design: SparseGridDesign | None = None) -> SolutionSnapshot:
    """Snapshot at t = 0 holding ``u0`` at the grid points."""
    design = design or build_grid(problem.d, config.grid_level, problem.box)
    values = np.asarray(problem.coeffs.u0(design.points), dtype=float)
    if not np.all(np.isfinite(values)):
        node = int(np.flatnonzero(~np.isfinite(values))[0])
        raise NumericalError("non-finite initial value", step=0, node=node)
    return SolutionSnapshot(0, 0.0, values, fit(design, values, config.exterior_policy))


def _node_value(problem: ProblemSpec, config: SolverConfig, prev: SolutionSnapshot,
                step: int, node: int) -> float:
    design = prev.interpolant.design
    x = design.points[node]
    t_prev = prev.time
    t_new = t_prev + config.dt
    co = problem.coeffs
    partial = []
    for start in range(0, config.m_paths, _PATH_CHUNK):
        paths = np.arange(start, min(start + _PATH_CHUNK, config.m_paths), dtype=np.uint64)
        ids = rng.stream_ids(config.master_seed, step, node, paths)
        try:
            batch = simulate_paths(co, problem.kernel, problem.box, x, t_prev, config.dt,
                                   ids, config.max_jumps)
        except NumericalError as err:
            raise NumericalError("non-finite path position", step=step, node=node,
                                 path=start + (err.path or 0)) from err
        X = batch.x_end
        interp = prev.interpolant(X)
        score = interp.copy()
        out = batch.exited
        if out.any():
            score[out] = np.asarray(co.g(t_new, X[out]), dtype=float)
        score += config.dt * np.asarray(co.f(t_prev, X, interp), dtype=float)
        if not np.all(np.isfinite(score)):
            bad = int(np.flatnonzero(~np.isfinite(score))[0])
            raise NumericalError("non-finite path score", step=step, node=node, path=start + bad)
        partial.append(score)
    return math.fsum(np.concatenate(partial)) / config.m_paths


def advance_step(problem: ProblemSpec, config: SolverConfig, prev: SolutionSnapshot,
                 executor: ThreadPoolExecutor | None = None) -> SolutionSnapshot:
    """One time step from ``prev`` at t_{i-1} to t_i."""
    if prev.interpolant is None:
        raise ValueError("previous snapshot must hold its interpolant")
    step = prev.step_index + 1
    design = prev.interpolant.design
    inside = in_domain(problem.box, design.points)
    interior = np.flatnonzero(inside)
    values = np.empty(design.n_points)
    if not inside.all():
        values[~inside] = np.asarray(
            problem.coeffs.g(prev.time + config.dt, design.points[~inside]), dtype=float)

    def work(node):
        return _node_value(problem, config, prev, step, int(node))

    if executor is None:
        values[interior] = [work(i) for i in interior]
    else:
        values[interior] = list(executor.map(work, interior))
    if not np.all(np.isfinite(values)):
        node = int(np.flatnonzero(~np.isfinite(values))[0])
        raise NumericalError("non-finite constraint value", step=step, node=node)
    interp = fit(prev.interpolant.design, values, config.exterior_policy)
    return SolutionSnapshot(step, step * config.dt, values, interp)


def solve(problem: ProblemSpec, config: SolverConfig, progress=None) -> list:
    """Run all steps; returns snapshots from t = 0 to t = T.

    With ``config.keep_last = K`` only the last ``K`` snapshots keep their
    interpolants (node values are always kept).
    """
    _check(problem, config)
    snap = initialize(problem, config)
    history = [snap]
    workers = config.n_workers
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for i in range(config.n_steps):
            snap = advance_step(problem, config, snap, executor)
            history.append(snap)
            if config.keep_last is not None and len(history) > config.keep_last:
                old = history[-config.keep_last - 1]
                history[-config.keep_last - 1] = replace(old, interpolant=None)
            if progress is not None:
                progress(snap)
    finally:
        if executor is not None:
            executor.shutdown()
    return history


def final_snapshot(problem: ProblemSpec, config: SolverConfig, progress=None) -> SolutionSnapshot:
    """Like ``solve`` but keeps only the current snapshot in memory."""
    _check(problem, config)
    snap = initialize(problem, config)
    workers = config.n_workers
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for _ in range(config.n_steps):
            snap = advance_step(problem, config, snap, executor)
            if progress is not None:
                progress(snap)
    finally:
        if executor is not None:
            executor.shutdown()
    return snap


def default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))
