"""scikit-learn style wrappers around the sparse grid and the solver."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .problems import ProblemSpec, make_problem
from .solver import SolverConfig, final_snapshot
from .sparse_grid import build_grid, fit

__all__ = ["SparseGridRegressor", "SparseMonteCarloSolver"]


def _match_rows(design_points: np.ndarray, X: np.ndarray, decimals: int = 12) -> np.ndarray:
    """Index of each design point in X; X must hold exactly the design points."""
    lookup = {tuple(r): i for i, r in enumerate(np.round(X, decimals) + 0.0)}
    if len(lookup) != len(X):
        raise ValueError("X contains duplicate rows")
    try:
        return np.array([lookup[tuple(p)] for p in np.round(design_points, decimals) + 0.0])
    except KeyError:
        raise ValueError("X must contain exactly the sparse-grid points; see grid_points()") from None


class SparseGridRegressor(RegressorMixin, BaseEstimator):
    """Smolyak interpolant on Chebyshev-Gauss-Lobatto nodes.

    ``fit`` takes the grid points (in any order) and their values; use
    ``grid_points(d)`` to get the points to evaluate your function at.
    """

    def __init__(self, level: int = 3, box=None, exterior_policy: str = "clamp"):
        self.level = level
        self.box = box
        self.exterior_policy = exterior_policy

    def _design(self, d: int):
        box = None if self.box is None else np.asarray(self.box, dtype=float)
        return build_grid(d, self.level, box)

    def grid_points(self, d: int) -> np.ndarray:
        return self._design(d).points.copy()

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        design = self._design(X.shape[1])
        if len(X) != design.n_points:
            raise ValueError(f"expected {design.n_points} grid points, got {len(X)}")
        idx = _match_rows(design.points, X)
        self.interpolant_ = fit(design, y[idx], self.exterior_policy)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "interpolant_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return self.interpolant_(X)


class SparseMonteCarloSolver(BaseEstimator):
    """Solve a built-in problem up to ``T`` and predict u(T, x).

    ``fit`` ignores its arguments apart from an optional ``ProblemSpec``;
    ``score`` is the negative RMS error against the exact solution.
    """

    def __init__(self, problem: str = "example1", dim=None, alpha=None, delta=None,
                 T: float = 1.0, dt: float = 0.125, m_paths: int = 10_000, grid_level: int = 3,
                 max_jumps: int = 1, exterior_policy: str = "clamp", seed: int = 0,
                 n_workers: int = 1):
        self.problem = problem
        self.dim = dim
        self.alpha = alpha
        self.delta = delta
        self.T = T
        self.dt = dt
        self.m_paths = m_paths
        self.grid_level = grid_level
        self.max_jumps = max_jumps
        self.exterior_policy = exterior_policy
        self.seed = seed
        self.n_workers = n_workers

    def fit(self, X=None, y=None):
        if isinstance(X, ProblemSpec):
            spec = X
        else:
            spec = make_problem(self.problem, d=self.dim, alpha=self.alpha, delta=self.delta, T=self.T)
        config = SolverConfig.for_horizon(spec.T, self.dt, m_paths=self.m_paths,
                                          grid_level=self.grid_level, max_jumps=self.max_jumps,
                                          exterior_policy=self.exterior_policy,
                                          master_seed=self.seed, n_workers=self.n_workers)
        self.problem_ = spec
        self.config_ = config
        self.snapshot_ = final_snapshot(spec, config)
        self.n_features_in_ = spec.d
        return self

    @property
    def node_values_(self) -> np.ndarray:
        check_is_fitted(self, "snapshot_")
        return self.snapshot_.node_values

    def predict(self, X):
        check_is_fitted(self, "snapshot_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return self.snapshot_(X)

    def score(self, X, y=None):
        check_is_fitted(self, "snapshot_")
        X = check_array(X)
        if y is None:
            if self.problem_.exact is None:
                raise ValueError("no exact solution for this problem; pass y")
            y = self.problem_.exact(self.problem_.T, X)
        return -float(np.sqrt(np.mean((self.predict(X) - np.asarray(y)) ** 2)))
