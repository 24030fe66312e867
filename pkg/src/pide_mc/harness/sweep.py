"""Convergence sweeps over the time step or the path count."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from ..problems import ProblemSpec
from ..solver import SolverConfig, final_snapshot
from .errors import DEFAULT_N_EVAL, l2_error

__all__ = ["SweepAxis", "SweepResult", "fit_slope", "pairwise_rates", "run_sweep", "config_for"]

log = logging.getLogger(__name__)


class SweepAxis(str, Enum):
    DT = "dt"
    PATHS = "paths"


@dataclass(frozen=True)
class SweepResult:
    axis: SweepAxis
    points: list                      # (value, mean l2 error)
    fitted_slope: float
    fit_r2: float
    rates: list = field(default_factory=list)
    replicate_errors: list = field(default_factory=list)
    partial: bool = False
    failure: str | None = None

    def columns(self) -> list:
        return [self.axis.value, "l2_error", "rate", "n_replicates"]

    def rows(self) -> list:
        out = []
        for k, (v, e) in enumerate(self.points):
            rate = self.rates[k - 1] if k > 0 and k - 1 < len(self.rates) else ""
            reps = len(self.replicate_errors[k]) if k < len(self.replicate_errors) else 1
            out.append({self.axis.value: v, "l2_error": e, "rate": rate, "n_replicates": reps})
        return out


def fit_slope(values: Sequence[float], errors: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope of log(error) on log(value), and its r^2."""
    x = np.log(np.asarray(values, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    if x.size < 3:
        raise ValueError("a slope fit needs at least 3 points")
    if not np.all(np.isfinite(y)):
        return float("nan"), float("nan")
    res = stats.linregress(x, y)
    return float(res.slope), float(res.rvalue ** 2)


def pairwise_rates(values: Sequence[float], errors: Sequence[float]) -> list:
    """Local slopes between neighbours; log2(e_k/e_{k+1}) when values halve."""
    v = np.asarray(values, dtype=float)
    e = np.asarray(errors, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.log(e[:-1] / e[1:]) / np.log(v[:-1] / v[1:])
    return [float(x) for x in r]


def config_for(problem: ProblemSpec, base: SolverConfig, axis: SweepAxis, value) -> SolverConfig:
    if axis is SweepAxis.DT:
        n = round(problem.T / value)
        if n < 1 or abs(n * value - problem.T) > 1e-12:
            raise ValueError(f"dt={value} does not divide T={problem.T}")
        return replace(base, dt=float(value), n_steps=int(n))
    m = int(value)
    if m != value or m < 1:
        raise ValueError(f"path counts must be positive integers, got {value!r}")
    return replace(base, m_paths=m)


def _check_values(values) -> list:
    values = [float(v) for v in values]
    if len(values) < 3:
        raise ValueError("a sweep needs at least 3 values")
    diffs = np.diff(values)
    if not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise ValueError("sweep values must be strictly sorted")
    return values


def run_sweep(problem: ProblemSpec, base_config: SolverConfig, axis, values: Sequence,
              reference=None, replicates: int = 1, n_eval: int = DEFAULT_N_EVAL,
              eval_seed: int = 0, jobs: int = 1,
              error_fn: Callable[[float, int], float] | None = None) -> SweepResult:
    """One solve per (value, replicate); errors averaged over replicates.

    Replicate ``r`` uses master seed ``base_config.master_seed + r``.
    ``error_fn(value, replicate)`` replaces solve-and-measure (test hook).
    ``reference`` defaults to the problem's exact solution at ``T``.
    """
    axis = SweepAxis(axis)
    values = _check_values(values)
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if error_fn is None:
        if reference is None:
            if problem.exact is None:
                raise ValueError(f"problem {problem.name!r} has no exact solution; pass a reference")
            T = problem.T
            reference = lambda X: problem.exact(T, X)  # noqa: E731

    def measure(task):
        value, rep = task
        if error_fn is not None:
            return float(error_fn(value, rep))
        cfg = config_for(problem, base_config, axis, value)
        cfg = replace(cfg, master_seed=base_config.master_seed + rep)
        snap = final_snapshot(problem, cfg)
        err = l2_error(problem, snap, reference, n_eval=n_eval, eval_seed=eval_seed).l2_error
        log.info("%s=%g replicate=%d l2_error=%.6e", axis.value, value, rep, err)
        return err

    tasks = [(v, r) for v in values for r in range(replicates)]
    results: dict = {}
    failure = None
    try:
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                for task, err in zip(tasks, pool.map(measure, tasks)):
                    results[task] = err
        else:
            for task in tasks:
                results[task] = measure(task)
    except Exception as exc:  # keep what finished and flag the sweep
        failure = f"{type(exc).__name__}: {exc}"
        log.error("sweep aborted: %s", failure)

    points, reps = [], []
    for v in values:
        errs = [results[(v, r)] for r in range(replicates) if (v, r) in results]
        if len(errs) < replicates:
            break
        points.append((v, float(np.mean(errs))))
        reps.append(errs)
    if len(points) >= 3:
        slope, r2 = fit_slope([p[0] for p in points], [p[1] for p in points])
    else:
        slope = r2 = float("nan")
    rates = pairwise_rates([p[0] for p in points], [p[1] for p in points]) if len(points) > 1 else []
    return SweepResult(axis, points, slope, r2, rates, reps,
                       partial=failure is not None, failure=failure)
