"""Sparse-grid Monte Carlo solver for semi-linear nonlocal diffusion equations with volume constraints."""
from ._validation import NumericalError
from .estimators import SparseGridRegressor, SparseMonteCarloSolver
from .kernels import KernelFamily, KernelSpec
from .problems import BUILTIN_PROBLEMS, ProblemSpec, make_problem
from .solver import SolutionSnapshot, SolverConfig, advance_step, final_snapshot, initialize, solve
from .sparse_grid import ExteriorPolicy, SparseGridDesign, SparseInterpolant, build_grid

__version__ = "0.1.0"

__all__ = [
    "NumericalError",
    "KernelFamily",
    "KernelSpec",
    "BUILTIN_PROBLEMS",
    "ProblemSpec",
    "make_problem",
    "SolutionSnapshot",
    "SolverConfig",
    "advance_step",
    "final_snapshot",
    "initialize",
    "solve",
    "ExteriorPolicy",
    "SparseGridDesign",
    "SparseInterpolant",
    "build_grid",
    "SparseGridRegressor",
    "SparseMonteCarloSolver",
]
