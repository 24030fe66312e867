"""Smolyak sparse-grid interpolation on nested Chebyshev-Gauss-Lobatto nodes.

A design of user level ``L`` in ``d`` dimensions uses the Smolyak order
``m = d + L - 1``: level 1 is the single box center, level 2 adds the ``2d``
axis points and the finest one-dimensional rule has ``2**(L-1) + 1`` nodes.

The interpolant is stored in hierarchical form: every grid point carries a
surplus multiplying a product of one-dimensional Lagrange polynomials, one
per dimension, of the level at which that coordinate first appears.  This is
the same polynomial as the combination formula but avoids its large
alternating binomial coefficients (up to ``C(d-1, L-1)``), whose cancellation
costs several digits at ``d = 100``.  The combination terms are kept for
quadrature weights.

Evaluation never forms a dense tensor.  Points that share the same pattern of
active one-dimensional levels are evaluated together with one ``einsum``, with
the 1-D barycentric basis for every (dimension, level) pair computed once per
batch of query points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np

__all__ = [
    "Level1D",
    "SparseGridDesign",
    "SparseInterpolant",
    "ExteriorPolicy",
    "nodes_1d",
    "smolyak_order",
    "enumerate_terms",
    "build_grid",
    "fit",
    "evaluate",
    "quadrature_weights",
    "check_box",
    "hierarchize",
]

_LETTERS = "abcdefghijklmopqrstuvwxyz"  # 'n' is reserved for the point axis
_CHUNK_ELEMS = 4_000_000


class ExteriorPolicy(str, Enum):
    CLAMP = "clamp"
    EXTRAPOLATE = "extrapolate"


@dataclass(frozen=True)
class Level1D:
    l: int
    m: int
    nodes: np.ndarray


@lru_cache(maxsize=None)
def _level_nodes(l: int) -> tuple:
    if l == 1:
        return (0.0,)
    m = 2 ** (l - 1) + 1
    j = np.arange(m)
    nodes = -np.cos(np.pi * j / (m - 1))
    # pin the symmetric pairs and the center so nestedness holds bit-exactly
    nodes = 0.5 * (nodes - nodes[::-1])
    nodes[(m - 1) // 2] = 0.0
    return tuple(nodes)


def nodes_1d(l: int) -> Level1D:
    """Chebyshev-Gauss-Lobatto nodes of one-dimensional level ``l`` (1-based)."""
    if int(l) != l or l < 1:
        raise ValueError(f"one-dimensional level must be >= 1, got {l!r}")
    l = int(l)
    nodes = np.array(_level_nodes(l))
    return Level1D(l=l, m=nodes.size, nodes=nodes)


@lru_cache(maxsize=None)
def _bary_weights(l: int) -> np.ndarray:
    m = nodes_1d(l).m
    if m == 1:
        return np.ones(1)
    w = (-1.0) ** np.arange(m)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


@lru_cache(maxsize=None)
def _cc_weights(l: int) -> np.ndarray:
    """Clenshaw-Curtis weights on [-1, 1] for the level-``l`` nodes."""
    m = nodes_1d(l).m
    if m == 1:
        return np.array([2.0])
    n = m - 1
    theta = np.pi * np.arange(m) / n
    w = np.zeros(m)
    for j in range(m):
        acc = 1.0
        for k in range(1, n // 2 + 1):
            b = 1.0 if 2 * k == n else 2.0
            acc -= b * math.cos(2 * k * theta[j]) / (4 * k * k - 1)
        c = 1.0 if j in (0, n) else 2.0
        w[j] = c * acc / n
    return w


def smolyak_order(d: int, level: int) -> int:
    """Total-level bound ``m`` for user level ``level``."""
    return d + level - 1


def _excess_patterns(d: int, k: int):
    # sparse multi-indices: (dims, extra levels) with extra summing to k
    if k == 0:
        yield ()
        return
    for combo in combinations_with_replacement(range(d), k):
        counts: dict[int, int] = {}
        for dim in combo:
            counts[dim] = counts.get(dim, 0) + 1
        yield tuple(sorted(counts.items()))


def enumerate_terms(d: int, m: int) -> list:
    """Smolyak combination terms as ``(multi_index, coefficient)`` pairs.

    Multi-indices satisfy ``m - d + 1 <= |l| <= m`` and carry coefficient
    ``(-1)**(m - |l|) * binomial(d - 1, m - |l|)``.
    """
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be >= 1, got {d!r}")
    if int(m) != m or m < d:
        raise ValueError(f"Smolyak order m={m!r} must be >= d={d}")
    terms = []
    for total in range(max(d, m - d + 1), m + 1):
        coeff = (-1) ** (m - total) * math.comb(d - 1, m - total)
        for pattern in _excess_patterns(d, total - d):
            l = [1] * d
            for dim, extra in pattern:
                l[dim] += extra
            terms.append((tuple(l), coeff))
    return terms


def check_box(box, d: int | None = None) -> np.ndarray:
    """Validate per-dimension bounds; ``None`` means ``[-1, 1]**d``."""
    if box is None:
        if d is None:
            raise ValueError("either box or d is required")
        return np.tile([-1.0, 1.0], (d, 1))
    box = np.asarray(box, dtype=float)
    if box.ndim == 1 and box.size == 2 and d is not None:
        box = np.tile(box, (d, 1))
    if box.ndim != 2 or box.shape[1] != 2:
        raise ValueError(f"box must have shape (d, 2), got {box.shape}")
    if d is not None and box.shape[0] != d:
        raise ValueError(f"box has {box.shape[0]} rows, expected {d}")
    if not np.all(np.isfinite(box)) or np.any(box[:, 0] >= box[:, 1]):
        raise ValueError("box bounds must be finite with a_i < b_i")
    return box


@dataclass(frozen=True)
class _TermGroup:
    levels: tuple          # active 1-D levels, in the order of ``dims`` columns
    dims: np.ndarray       # (g, k) active dimensions per term
    coeffs: np.ndarray     # (g,)
    point_ids: np.ndarray  # (g, m_1, ..., m_k)
    columns: tuple = ()    # per active level: basis columns used (hierarchical groups only)

    @property
    def total(self) -> int:
        return sum(l - 1 for l in self.levels)


@dataclass(frozen=True, eq=False)
class SparseGridDesign:
    d: int
    level: int
    m: int
    box: np.ndarray
    terms: list
    points: np.ndarray            # (n_points, d) physical coordinates
    reference_points: np.ndarray  # (n_points, d) in [-1, 1]^d
    groups: tuple = field(repr=False)       # combination terms (quadrature)
    hier_groups: tuple = field(repr=False)  # hierarchical increments (evaluation)
    center_id: int = 0

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def max_level_1d(self) -> int:
        return self.m - self.d + 1

    def to_reference(self, x: np.ndarray) -> np.ndarray:
        a, b = self.box[:, 0], self.box[:, 1]
        return 2.0 * (x - a) / (b - a) - 1.0

    def to_physical(self, xi: np.ndarray) -> np.ndarray:
        a, b = self.box[:, 0], self.box[:, 1]
        return a + 0.5 * (xi + 1.0) * (b - a)


def build_grid(d: int, level: int, box=None) -> SparseGridDesign:
    """Sparse-grid design of user level ``level`` on ``box``."""
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be >= 1, got {d!r}")
    if int(level) != level or level < 1:
        raise ValueError(f"grid level must be >= 1, got {level!r}")
    d, level = int(d), int(level)
    box = check_box(box, d)
    m = smolyak_order(d, level)
    lmax = m - d + 1
    fine = nodes_1d(lmax)
    center = (fine.m - 1) // 2

    def fine_index(l):
        if l == 1:
            return np.array([center])
        return np.arange(nodes_1d(l).m) * 2 ** (lmax - l)

    terms = enumerate_terms(d, m)
    ids: dict[tuple, int] = {}
    keys: list[tuple] = []
    by_pattern: dict[tuple, list] = {}
    for multi, coeff in terms:
        active = [(i, li) for i, li in enumerate(multi) if li > 1]
        dims = tuple(i for i, _ in active)
        levels = tuple(li for _, li in active)
        axes = [fine_index(li) for li in levels]
        shape = tuple(len(a) for a in axes)
        pid = np.empty(shape if shape else (), dtype=np.int64)
        for pos in np.ndindex(*shape):
            key = tuple((dims[q], int(axes[q][pos[q]])) for q in range(len(dims))
                        if axes[q][pos[q]] != center)
            if key not in ids:
                ids[key] = len(keys)
                keys.append(key)
            pid[pos] = ids[key]
        by_pattern.setdefault(levels, []).append((dims, coeff, pid))

    ref = np.zeros((len(keys), d))
    for p, key in enumerate(keys):
        for dim, idx in key:
            ref[p, dim] = fine.nodes[idx]
    groups = []
    for levels, items in by_pattern.items():
        groups.append(_TermGroup(
            levels=levels,
            dims=np.array([it[0] for it in items], dtype=np.int64).reshape(len(items), len(levels)),
            coeffs=np.array([it[1] for it in items], dtype=float),
            point_ids=np.stack([it[2] for it in items]),
        ))
    hier = _hierarchical_groups(d, m, ids, fine_index, center)
    design = SparseGridDesign(d=d, level=level, m=m, box=box, terms=terms,
                              points=np.empty((0, d)), reference_points=ref,
                              groups=tuple(groups), hier_groups=hier, center_id=ids.get((), 0))
    object.__setattr__(design, "points", design.to_physical(ref))
    return design


def _basis(xi: np.ndarray, l: int) -> np.ndarray:
    """Lagrange basis values of level ``l`` at ``xi`` (any shape) -> xi.shape + (m_l,)."""
    nodes = nodes_1d(l).nodes
    w = _bary_weights(l)
    diff = xi[..., None] - nodes
    hit = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = w / diff
        out = terms / terms.sum(axis=-1, keepdims=True)
    rows = hit.any(axis=-1)
    if rows.any():
        out[rows] = hit[rows].astype(float)
    return out


def _new_columns(l: int) -> np.ndarray:
    """Positions, within the level-``l`` nodes, of the nodes absent at level ``l - 1``."""
    if l == 1:
        return np.array([0])
    if l == 2:
        return np.array([0, 2])
    return np.arange(1, nodes_1d(l).m, 2)


def _hierarchical_groups(d: int, m: int, ids: dict, fine_index, center: int) -> tuple:
    by_pattern: dict[tuple, list] = {}
    for k in range(0, m - d + 1):
        for pattern in _excess_patterns(d, k):
            dims = tuple(dim for dim, _ in pattern)
            levels = tuple(1 + extra for _, extra in pattern)
            axes = [fine_index(l)[_new_columns(l)] for l in levels]
            shape = tuple(len(a) for a in axes)
            pid = np.empty(shape, dtype=np.int64)
            for pos in np.ndindex(*shape):
                key = tuple((dims[q], int(axes[q][pos[q]])) for q in range(len(dims)))
                pid[pos] = ids[key]
            by_pattern.setdefault(levels, []).append((dims, pid))
    groups = []
    for levels, items in by_pattern.items():
        groups.append(_TermGroup(
            levels=levels,
            dims=np.array([it[0] for it in items], dtype=np.int64).reshape(len(items), len(levels)),
            coeffs=np.ones(len(items)),
            point_ids=np.stack([it[1] for it in items]),
            columns=tuple(_new_columns(l) for l in levels),
        ))
    groups.sort(key=lambda g: g.total)
    return tuple(groups)


def _evaluate_groups(groups, surplus: np.ndarray, xi: np.ndarray) -> np.ndarray:
    n = xi.shape[0]
    result = np.zeros(n)
    bases: dict[int, np.ndarray] = {}
    for group in groups:
        k = len(group.levels)
        weights = surplus[group.point_ids]
        if k == 0:
            result += weights.sum()
            continue
        for l in group.levels:
            if l not in bases:
                bases[l] = _basis(xi, l)  # (n, d, m_l)
        g = group.dims.shape[0]
        per_term = n * int(np.prod([len(c) for c in group.columns]))
        step = max(1, _CHUNK_ELEMS // max(per_term, 1))
        letters = _LETTERS[:k]
        subs = ",".join(f"ng{c}" for c in letters) + f",g{letters}->n"
        for start in range(0, g, step):
            sl = slice(start, start + step)
            ops = [bases[l][:, group.dims[sl, q], :][:, :, group.columns[q]]
                   for q, l in enumerate(group.levels)]
            result += np.einsum(subs, *ops, weights[sl])
    return result


def _evaluate_reference(design: SparseGridDesign, surplus: np.ndarray, xi: np.ndarray) -> np.ndarray:
    return _evaluate_groups(design.hier_groups, surplus, xi)


def hierarchize(design: SparseGridDesign, values: np.ndarray) -> np.ndarray:
    """Hierarchical surpluses from nodal values.

    A point's surplus is its value minus the interpolant of all coarser
    increments; increments of equal or higher total level vanish there.
    """
    surplus = np.zeros(design.n_points)
    groups = design.hier_groups
    start = 0
    while start < len(groups):
        total = groups[start].total
        stop = start
        while stop < len(groups) and groups[stop].total == total:
            stop += 1
        pids = np.concatenate([g.point_ids.reshape(-1) for g in groups[start:stop]])
        coarse = _evaluate_groups(groups[:start], surplus, design.reference_points[pids])
        surplus[pids] = values[pids] - coarse
        start = stop
    return surplus


def evaluate(interp: "SparseInterpolant", x) -> np.ndarray:
    return interp.eval(x)


@dataclass(frozen=True, eq=False)
class SparseInterpolant:
    """Sparse-grid interpolant holding one value per design point."""

    design: SparseGridDesign
    values: np.ndarray
    exterior_policy: ExteriorPolicy = ExteriorPolicy.CLAMP
    surplus: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "exterior_policy", ExteriorPolicy(self.exterior_policy))
        if self.surplus is None:
            object.__setattr__(self, "surplus", hierarchize(self.design, self.values))

    def eval(self, x) -> np.ndarray:
        """Evaluate at a point ``(d,)`` or a batch ``(n, d)``."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.design.d:
            raise ValueError(f"expected points of dimension {self.design.d}, got {x.shape[1]}")
        if not np.all(np.isfinite(x)):
            raise ValueError("evaluation points must be finite")
        xi = self.design.to_reference(x)
        if self.exterior_policy is ExteriorPolicy.CLAMP:
            xi = np.clip(xi, -1.0, 1.0)
        out = _evaluate_reference(self.design, self.surplus, xi)
        return out[0] if single else out

    __call__ = eval


def fit(design: SparseGridDesign, values, exterior_policy="clamp") -> SparseInterpolant:
    values = np.asarray(values, dtype=float)
    if values.shape != (design.n_points,):
        raise ValueError(f"expected {design.n_points} values, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("sparse-grid values must be finite")
    return SparseInterpolant(design=design, values=values.copy(), exterior_policy=exterior_policy)


def quadrature_weights(design: SparseGridDesign) -> np.ndarray:
    """Smolyak Clenshaw-Curtis weights for integrating over the design box."""
    w = np.zeros(design.n_points)
    for group in design.groups:
        if not group.levels:
            np.add.at(w, group.point_ids.reshape(-1), group.coeffs * 2.0 ** design.d)
            continue
        tensor = np.ones(())
        for l in group.levels:
            tensor = np.multiply.outer(tensor, _cc_weights(l))
        inactive = 2.0 ** (design.d - len(group.levels))
        contrib = group.coeffs.reshape((-1,) + (1,) * len(group.levels)) * tensor * inactive
        np.add.at(w, group.point_ids.reshape(-1), contrib.reshape(-1))
    half_widths = 0.5 * (design.box[:, 1] - design.box[:, 0])
    return w * float(np.prod(half_widths))
