"""L2 error measurement against a reference function."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..problems import ProblemSpec
from ..solver import SolutionSnapshot
from ..sparse_grid import build_grid, quadrature_weights

__all__ = ["ErrorReport", "l2_error", "DEFAULT_N_EVAL"]

DEFAULT_N_EVAL = 100_000


@dataclass(frozen=True)
class ErrorReport:
    l2_error: float
    n_eval_points: int
    eval_seed: int
    method: str = "mc"
    std_error: float = float("nan")
    config_echo: dict = field(default_factory=dict)

    def as_row(self) -> dict:
        row = {"l2_error": self.l2_error, "n_eval": self.n_eval_points,
               "eval_seed": self.eval_seed, "method": self.method,
               "std_error": self.std_error}
        row.update(self.config_echo)
        return row


def _as_callable(u) -> Callable:
    if isinstance(u, SolutionSnapshot):
        return u.__call__
    if callable(u):
        return u
    raise TypeError("expected a snapshot or a callable of x")


def l2_error(problem: ProblemSpec, final, reference, n_eval: int = DEFAULT_N_EVAL,
             eval_seed: int = 0, method: str = "mc", quad_level: int = 5,
             config_echo: dict | None = None) -> ErrorReport:
    """sqrt(|Omega| / n * sum (u(x_k) - ref(x_k))^2) over uniform points in the box.

    ``method="sparse"`` integrates the squared error with Smolyak
    Clenshaw-Curtis weights at ``quad_level`` instead.  ``reference`` may be a
    callable of ``x`` or another snapshot.
    """
    n_eval = int(n_eval)
    if n_eval <= 0:
        raise ValueError(f"n_eval must be > 0, got {n_eval}")
    u = _as_callable(final)
    ref = _as_callable(reference)
    box = problem.box
    vol = problem.volume
    echo = dict(config_echo or {})
    if method == "mc":
        gen = np.random.default_rng(eval_seed)
        X = box[:, 0] + gen.random((n_eval, problem.d)) * (box[:, 1] - box[:, 0])
        sq = (np.asarray(u(X), dtype=float) - np.asarray(ref(X), dtype=float)) ** 2
        mean = float(np.mean(sq))
        err = float(np.sqrt(vol * mean))
        # delta-method standard error of the square root
        se = float(np.sqrt(vol) * np.std(sq) / np.sqrt(n_eval) / (2 * np.sqrt(mean))) if mean > 0 else 0.0
        return ErrorReport(err, n_eval, int(eval_seed), "mc", se, echo)
    if method == "sparse":
        design = build_grid(problem.d, quad_level, box)
        w = quadrature_weights(design)
        sq = (np.asarray(u(design.points)) - np.asarray(ref(design.points))) ** 2
        val = float(w @ sq)
        return ErrorReport(float(np.sqrt(max(val, 0.0))), design.n_points, int(eval_seed),
                           "sparse", float("nan"), echo)
    raise ValueError(f"unknown error method {method!r}")
