"""Input-validation helpers and error types shared across modules."""
from __future__ import annotations

import numpy as np

__all__ = [
    "NumericalError",
    "check_positive",
    "check_positive_int",
    "check_nonneg_int",
    "check_points",
    "check_finite",
]


class NumericalError(ArithmeticError):
    """Non-finite value produced during a solve, with its location."""

    def __init__(self, message: str, step: int | None = None, node: int | None = None,
                 path: int | None = None):
        self.step, self.node, self.path = step, node, path
        where = ", ".join(f"{k}={v}" for k, v in (("step", step), ("node", node), ("path", path))
                          if v is not None)
        super().__init__(f"{message} ({where})" if where else message)


def check_positive(name: str, value) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be finite and > 0, got {value!r}")
    return value


def check_positive_int(name: str, value) -> int:
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise ValueError(f"{name} must be an integer >= 1, got {value!r}")
    return int(value)


def check_nonneg_int(name: str, value) -> int:
    if isinstance(value, bool) or int(value) != value or value < 0:
        raise ValueError(f"{name} must be an integer >= 0, got {value!r}")
    return int(value)


def check_points(x, d: int | None = None, name: str = "x") -> np.ndarray:
    """Coerce to a finite ``(n, d)`` float array."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise ValueError(f"{name} must be a point or an (n, d) array, got shape {x.shape}")
    if d is not None and x.shape[1] != d:
        raise ValueError(f"{name} has dimension {x.shape[1]}, expected {d}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} must be finite")
    return x


def check_finite(name: str, arr) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr
