"""Counter-based random streams keyed by (seed, step, node, path).

Every draw is a pure function of its key and a draw counter, so the result of
a simulation never depends on how work is split across threads.  The mixing
function is the SplitMix64 finalizer; a stream is the SplitMix64 sequence
started from the hashed key.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

__all__ = [
    "StreamKey",
    "Stream",
    "stream_ids",
    "uniform_bits",
    "uniforms",
    "normals",
    "poisson_inverse",
    "uniform01",
    "standard_normal",
    "poisson_count",
]

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
# per-field salts so that (step=a, node=b) and (step=b, node=a) differ
_SALTS = (
    np.uint64(0x2545F4914F6CDD1D),
    np.uint64(0xD1B54A32D192ED03),
    np.uint64(0x8CB92BA72F3D8DD7),
    np.uint64(0xA0761D6478BD642F),
)
_TWO_M53 = 2.0 ** -53


def _fmix(z):
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _as_u64(value) -> np.ndarray:
    arr = np.asarray(value)
    if arr.dtype.kind not in "iu":
        raise ValueError(f"stream key fields must be integers, got {arr.dtype}")
    if arr.dtype.kind == "i" and np.any(arr < 0):
        raise ValueError("stream key fields must be non-negative")
    return arr.astype(np.uint64)


@dataclass(frozen=True)
class StreamKey:
    """Identity of one random stream."""

    step_index: int = 0
    node_index: int = 0
    path_index: int = 0
    master_seed: int = 0

    def __post_init__(self):
        for name in ("step_index", "node_index", "path_index"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
        if int(self.master_seed) != self.master_seed:
            raise ValueError("master_seed must be an integer")

    def stream_id(self) -> np.uint64:
        ids = stream_ids(self.master_seed, self.step_index, self.node_index,
                         np.array([self.path_index]))
        return ids[0]


def stream_ids(master_seed: int, step_index: int, node_index: int, paths) -> np.ndarray:
    """Hash keys into 64-bit stream identifiers, vectorized over ``paths``."""
    seed = np.array([int(master_seed) & _MASK64], dtype=np.uint64)
    step = np.array([int(step_index) & _MASK64], dtype=np.uint64)
    node = np.array([int(node_index) & _MASK64], dtype=np.uint64)
    paths = _as_u64(paths)
    with np.errstate(over="ignore"):
        h = _fmix(seed + _SALTS[0])
        h = _fmix(h ^ _fmix(step + _SALTS[1]))
        h = _fmix(h ^ _fmix(node + _SALTS[2]))
        h = _fmix(h ^ _fmix(paths + _SALTS[3]))
    return h


def uniform_bits(ids, counters) -> np.ndarray:
    """Raw 64-bit outputs; ``ids`` shape (n,), ``counters`` shape (k,) -> (n, k)."""
    ids = np.asarray(ids, dtype=np.uint64)
    counters = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = ids[:, None] + (counters[None, :] + np.uint64(1)) * _GOLDEN
    return _fmix(state)


def uniforms(ids, counters) -> np.ndarray:
    """Uniform draws in [0, 1) at the given counters."""
    bits = uniform_bits(ids, counters) >> np.uint64(11)
    return bits.astype(np.float64) * _TWO_M53


def normals(ids, counters) -> np.ndarray:
    """Standard normal draws by inverse CDF of open-interval uniforms."""
    bits = uniform_bits(ids, counters) >> np.uint64(11)
    return ndtri((bits.astype(np.float64) + 0.5) * _TWO_M53)


def poisson_inverse(u, mean: float, cap: int | None = None) -> np.ndarray:
    """Inverse-CDF Poisson sampling; ``cap`` truncates the count early."""
    if not np.isfinite(mean) or mean < 0:
        raise ValueError(f"Poisson mean must be finite and >= 0, got {mean!r}")
    u = np.asarray(u, dtype=np.float64)
    counts = np.zeros(u.shape, dtype=np.int64)
    if mean == 0.0:
        return counts
    if cap is None:
        cap = int(mean + 40.0 * np.sqrt(mean) + 40.0)
    pmf = np.exp(-mean)
    cdf = pmf
    active = u >= cdf
    k = 0
    while k < cap and active.any():
        k += 1
        counts[active] = k
        pmf *= mean / k
        cdf += pmf
        active &= u >= cdf
    return counts


class Stream:
    """Sequential view of a single keyed stream.

    Draws advance an internal counter, so two ``Stream`` objects built from
    the same key produce the same sequence.
    """

    def __init__(self, key: StreamKey, start: int = 0):
        self.key = key
        self._id = np.array([key.stream_id()], dtype=np.uint64)
        self.counter = int(start)

    def _take(self, n: int) -> np.ndarray:
        counters = np.arange(self.counter, self.counter + n, dtype=np.uint64)
        self.counter += n
        return counters

    def uniform(self, n: int = 1) -> np.ndarray:
        return uniforms(self._id, self._take(n))[0]

    def normal(self, n: int = 1) -> np.ndarray:
        return normals(self._id, self._take(n))[0]

    def poisson(self, mean: float, cap: int | None = None) -> int:
        u = self.uniform(1)
        return int(poisson_inverse(u, mean, cap)[0])


def uniform01(key: StreamKey, n: int) -> np.ndarray:
    """First ``n`` uniform draws of the stream for ``key``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return Stream(key).uniform(n)


def standard_normal(key: StreamKey, d: int) -> np.ndarray:
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return Stream(key).normal(d)


def poisson_count(key: StreamKey, mean: float) -> int:
    if not np.isfinite(mean) or mean < 0:
        raise ValueError(f"Poisson mean must be finite and >= 0, got {mean!r}")
    return Stream(key).poisson(mean)
