"""One-step Euler-Maruyama simulation of the jump-diffusion with exit detection.

Draws for path ``j`` come from the stream keyed by ``(seed, step, node, j)`` at
fixed counter positions, so a path is reproducible on its own:

    counters 0 .. d-1              Brownian normals
    counter  d                     Poisson uniform for the jump count
    counter  d+1+(k-1)(d+1)        radius uniform of jump k (1-based)
    next d counters                direction normals of jump k

The vectorized ``simulate_paths`` and the scalar ``step_path`` share this
layout and agree bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import rng
from ._validation import NumericalError, check_nonneg_int, check_positive
from .kernels import KernelSpec, directions_from_normals, jump_intensity, sample_radius
from .rng import StreamKey

__all__ = [
    "CoefficientSet",
    "PathOutcome",
    "PathBatch",
    "in_domain",
    "simulate_paths",
    "step_path",
    "jump_counter_base",
]


@dataclass(frozen=True)
class CoefficientSet:
    """Vectorized problem coefficients.

    Every callable takes a batch of points ``X`` of shape ``(n, d)``:
    ``mu(t, X) -> (n, d)``; ``sigma(t, X) -> (n, d, d)`` or ``(n, d)`` when
    ``sigma_diagonal`` is set; ``c(t, X, Z) -> (n, d)``; ``f(t, X, U) -> (n,)``;
    ``g(t, X) -> (n,)``; ``u0(X) -> (n,)``.
    """

    mu: Callable
    sigma: Callable
    c: Callable
    f: Callable
    g: Callable
    u0: Callable
    sigma_diagonal: bool = False


@dataclass(frozen=True)
class PathOutcome:
    x_end: np.ndarray
    exited: bool
    jumps: int
    dt_effective: float


@dataclass(frozen=True)
class PathBatch:
    """Outcomes of many paths started from one point."""

    x_end: np.ndarray    # (M, d)
    exited: np.ndarray   # (M,) bool
    jumps: np.ndarray    # (M,) int, after truncation
    dt_effective: float


def in_domain(box, x) -> np.ndarray | bool:
    """Open-box membership ``a_i < x_i < b_i`` for a point or rows of points."""
    box = np.asarray(box, dtype=float)
    x = np.asarray(x, dtype=float)
    inside = np.all((x > box[:, 0]) & (x < box[:, 1]), axis=-1)
    return bool(inside) if x.ndim == 1 else inside


def jump_counter_base(d: int, k: int) -> int:
    return d + 1 + (k - 1) * (d + 1)


def _diffusion(coeffs: CoefficientSet, t: float, x: np.ndarray, g: np.ndarray, sqdt: float):
    sig = np.asarray(coeffs.sigma(t, x[None, :]), dtype=float)[0]
    if coeffs.sigma_diagonal:
        return (sig * sqdt) * g
    return g @ (sig * sqdt).T


def simulate_paths(coeffs: CoefficientSet, kernel: KernelSpec | None, box, x, t: float,
                   dt: float, ids: np.ndarray, max_jumps: int = 1) -> PathBatch:
    """Advance ``len(ids)`` paths from ``x`` over one step of length ``dt``."""
    dt = check_positive("dt", dt)
    max_jumps = check_nonneg_int("max_jumps", max_jumps)
    x = np.asarray(x, dtype=float)
    d = x.size
    ids = np.asarray(ids, dtype=np.uint64)
    n = ids.size

    drift = np.asarray(coeffs.mu(t, x[None, :]), dtype=float)[0] * dt
    g = rng.normals(ids, np.arange(d))
    x_end = x + drift + _diffusion(coeffs, t, x, g, np.sqrt(dt))

    jumps = np.zeros(n, dtype=np.int64)
    lam = 0.0 if kernel is None else jump_intensity(kernel)
    if lam > 0 and max_jumps > 0:
        u = rng.uniforms(ids, np.array([d]))[:, 0]
        jumps = rng.poisson_inverse(u, lam * dt, cap=max_jumps)
        for k in range(1, int(jumps.max(initial=0)) + 1):
            rows = np.flatnonzero(jumps >= k)
            base = jump_counter_base(d, k)
            xi = rng.uniforms(ids[rows], np.array([base]))[:, 0]
            r = np.atleast_1d(sample_radius(kernel, xi))
            # ndtri of (bits + 0.5) * 2**-53 is never 0, so the norm is positive
            dirs = directions_from_normals(rng.normals(ids[rows], np.arange(base + 1, base + 1 + d)))
            z = r[:, None] * dirs
            x_rows = np.broadcast_to(x, (rows.size, d))
            x_end[rows] += np.asarray(coeffs.c(t, x_rows, z), dtype=float)

    if not np.all(np.isfinite(x_end)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(x_end), axis=1))[0])
        raise NumericalError("non-finite path position", path=bad)
    return PathBatch(x_end=x_end, exited=~in_domain(box, x_end), jumps=jumps, dt_effective=dt)


def step_path(coeffs: CoefficientSet, kernel: KernelSpec | None, box, x, t: float, dt: float,
              key: StreamKey, max_jumps: int = 1) -> PathOutcome:
    """One path over one step; identical to the matching row of ``simulate_paths``."""
    x = np.asarray(x, dtype=float)
    box = np.asarray(box, dtype=float)
    if not in_domain(box, x):
        raise ValueError("starting point must lie inside the open box")
    ids = rng.stream_ids(key.master_seed, key.step_index, key.node_index,
                         np.array([key.path_index]))
    try:
        batch = simulate_paths(coeffs, kernel, box, x, t, dt, ids, max_jumps)
    except NumericalError as err:
        raise NumericalError("non-finite path position", step=key.step_index,
                             node=key.node_index, path=key.path_index) from err
    return PathOutcome(x_end=batch.x_end[0], exited=bool(batch.exited[0]),
                       jumps=int(batch.jumps[0]), dt_effective=batch.dt_effective)
