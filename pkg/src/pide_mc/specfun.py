"""Gamma-family special functions used by the radial jump samplers.

The incomplete gamma routines work in ``numpy.longdouble``.  For small shape
parameters the map ``x -> gamma(s, x)`` is nearly flat once ``x`` is a few
units past ``s``, and a double-precision value of ``gamma(s, x)`` no longer
pins down ``x`` to ten digits; the extra mantissa bits of the extended type
keep the inverse well conditioned over the range the samplers use.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = [
    "omega_d",
    "ball_volume",
    "log_gamma",
    "regularized_lower_gamma",
    "regularized_upper_gamma",
    "lower_incomplete_gamma",
    "inverse_regularized_lower_gamma",
    "inverse_lower_incomplete_gamma",
]

_LD = np.longdouble
_EPS = np.finfo(_LD).eps
_MAX_ITER = 100_000


def omega_d(d: int) -> float:
    """Surface area of the unit sphere in R^d."""
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0) if d < 340 else \
        math.exp(math.log(2.0) + 0.5 * d * math.log(math.pi) - math.lgamma(d / 2.0))


def ball_volume(d: int, radius: float) -> float:
    """Lebesgue volume of the d-ball of the given radius."""
    return omega_d(d) * radius ** d / d


def log_gamma(s: float) -> float:
    return math.lgamma(s)


def _check_shape(s: float) -> float:
    s = float(s)
    if not np.isfinite(s) or s <= 0:
        raise ValueError(f"shape parameter must be finite and > 0, got {s!r}")
    return s


def _check_arg(x) -> np.ndarray:
    x = np.asarray(x, dtype=_LD)
    if np.any(~np.isfinite(x)) or np.any(x < 0):
        raise ValueError("incomplete gamma argument must be finite and >= 0")
    return x


def _series_p(s: float, x: np.ndarray, lgs) -> np.ndarray:
    # P(s,x) = x^s e^-x / Gamma(s+1) * sum_n x^n / ((s+1)...(s+n))
    term = np.ones_like(x)
    total = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    denom = _LD(s)
    for _ in range(_MAX_ITER):
        denom += 1
        term = np.where(active, term * x / denom, term)
        total = np.where(active, total + term, total)
        active &= np.abs(term) > np.abs(total) * _EPS
        if not active.any():
            break
    log_pref = s * np.log(x) - x - (lgs + _LD(math.log(s)))
    return np.exp(log_pref) * total


def _cf_q(s: float, x: np.ndarray, lgs) -> np.ndarray:
    # modified Lentz evaluation of the continued fraction for Q(s,x)
    tiny = _LD("1e-4000")
    b = x + 1 - s
    c = np.full_like(x, 1 / tiny)
    dd = 1 / b
    h = dd.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, _MAX_ITER):
        an = -i * (i - _LD(s))
        b = b + 2
        dd_new = an * dd + b
        dd_new = np.where(np.abs(dd_new) < tiny, tiny, dd_new)
        c_new = b + an / c
        c_new = np.where(np.abs(c_new) < tiny, tiny, c_new)
        dd_new = 1 / dd_new
        delta = dd_new * c_new
        dd = np.where(active, dd_new, dd)
        c = np.where(active, c_new, c)
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1) > _EPS
        if not active.any():
            break
    log_pref = s * np.log(x) - x - lgs
    return np.exp(log_pref) * h


def _p_and_q(s: float, x: np.ndarray):
    lgs = _LD(math.lgamma(s))
    p = np.zeros_like(x)
    q = np.ones_like(x)
    pos = x > 0
    use_series = pos & (x < s + 1)
    use_cf = pos & ~use_series
    if use_series.any():
        ps = _series_p(s, x[use_series], lgs)
        p[use_series] = ps
        q[use_series] = 1 - ps
    if use_cf.any():
        qs = _cf_q(s, x[use_cf], lgs)
        q[use_cf] = qs
        p[use_cf] = 1 - qs
    return p, q


def regularized_lower_gamma(s: float, x):
    """P(s, x) = gamma(s, x) / Gamma(s), computed in extended precision."""
    s = _check_shape(s)
    x = _check_arg(x)
    p, _ = _p_and_q(s, np.atleast_1d(x))
    return p.reshape(x.shape)[()] if x.ndim == 0 else p


def regularized_upper_gamma(s: float, x):
    s = _check_shape(s)
    x = _check_arg(x)
    _, q = _p_and_q(s, np.atleast_1d(x))
    return q.reshape(x.shape)[()] if x.ndim == 0 else q


def lower_incomplete_gamma(s: float, x):
    """gamma(s, x) = integral_0^x t^(s-1) e^-t dt."""
    s = _check_shape(s)
    return np.exp(_LD(math.lgamma(s))) * regularized_lower_gamma(s, x)


def _initial_guess(s: float, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    # low-order asymptotics: Wilson-Hilferty for s > 1, power/exponential tails otherwise
    if s > 1:
        pp = np.where(p < 0.5, p, q).astype(np.float64)
        pp = np.clip(pp, 1e-300, 0.5)
        t = np.sqrt(-2.0 * np.log(pp))
        z = t - (2.30753 + 0.27061 * t) / (1.0 + (0.99229 + 0.04481 * t) * t)
        z = np.where(p < 0.5, -z, z)
        x = s * (1.0 - 1.0 / (9.0 * s) + z / (3.0 * math.sqrt(s))) ** 3
        return np.maximum(x, 1e-3 * s).astype(_LD)
    t = 1.0 - s * (0.253 + s * 0.12)
    with np.errstate(divide="ignore"):
        small = np.power(np.asarray(p, dtype=np.float64) / t, 1.0 / s)
        large = 1.0 - np.log1p(-(np.asarray(p, dtype=np.float64) - t) / (1.0 - t))
    x = np.where(np.asarray(p, dtype=np.float64) < t, small, large)
    return np.maximum(x, 1e-300).astype(_LD)


def inverse_regularized_lower_gamma(s: float, p, q=None):
    """Solve P(s, x) = p for x.

    ``q`` may supply the complement ``1 - p`` when it is known more accurately
    than ``p`` itself.  Newton iteration on log P (or log Q in the upper tail)
    with a bisection safeguard; stops at relative step 1e-17.
    """
    s = _check_shape(s)
    p = np.asarray(p, dtype=_LD)
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    q = 1 - p if q is None else np.atleast_1d(np.asarray(q, dtype=_LD))
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise ValueError("regularized gamma level must lie in [0, 1]")
    x = np.zeros_like(p)
    x[p >= 1] = np.inf
    todo = (p > 0) & (p < 1)
    if todo.any():
        x[todo] = _newton_solve(s, p[todo], q[todo])
    return x[0] if scalar else x


def _newton_solve(s: float, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    lgs = _LD(math.lgamma(s))
    lower_tail = p < 0.5
    target = np.where(lower_tail, np.log(p), np.log(q))
    lo = np.zeros_like(p)
    hi = np.full_like(p, np.inf)
    x = _initial_guess(s, p, q)
    active = np.ones(p.shape, dtype=bool)
    for _ in range(400):
        xa = x[active]
        pa, qa = _p_and_q(s, xa)
        la = lower_tail[active]
        cur = np.where(la, pa, qa)
        with np.errstate(divide="ignore", invalid="ignore"):
            resid = np.log(cur) - target[active]
            log_dens = (s - 1) * np.log(xa) - xa - lgs
            # d/dx log P = dens / P ; d/dx log Q = -dens / Q
            slope = np.exp(log_dens - np.log(cur)) * np.where(la, 1, -1)
        below = np.where(la, resid < 0, resid > 0)
        lo_a = np.where(below, xa, lo[active])
        hi_a = np.where(below, hi[active], xa)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = resid / slope
            x_new = xa - step
        bad = ~np.isfinite(x_new) | (x_new <= lo_a) | (x_new >= hi_a)
        bisect = np.where(np.isfinite(hi_a), 0.5 * (lo_a + hi_a), 2 * xa + 1)
        x_new = np.where(bad, bisect, x_new)
        converged = np.abs(resid) <= 8 * _EPS
        done = (converged | (np.abs(x_new - xa) <= 1e-17 * np.abs(xa))
                | (np.isfinite(hi_a) & (hi_a - lo_a <= 4 * _EPS * hi_a)))
        lo[active] = lo_a
        hi[active] = hi_a
        x[active] = np.where(converged, xa, x_new)
        idx = np.flatnonzero(active)
        active[idx[done]] = False
        if not active.any():
            break
    return x


def inverse_lower_incomplete_gamma(s: float, y):
    """x such that gamma(s, x) = y, for 0 <= y < Gamma(s)."""
    s = _check_shape(s)
    y = np.asarray(y, dtype=_LD)
    gam = np.exp(_LD(math.lgamma(s)))
    if np.any(~np.isfinite(y)) or np.any(y < 0) or np.any(y >= gam):
        raise ValueError("lower incomplete gamma level must lie in [0, Gamma(s))")
    return inverse_regularized_lower_gamma(s, y / gam, (gam - y) / gam)
