"""Nonlocal interaction kernels on the ball of radius ``delta`` and their jump samplers.

Four radial families are supported.  Integrable kernels (constant indicator,
Gaussian) generate jumps with density ``phi / lambda``; hypersingular kernels
(plain and tempered) generate jumps with density ``phi |z|^2 / lambda``, which
is what keeps their jump intensity finite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import rng
from .rng import StreamKey
from .specfun import (
    ball_volume,
    inverse_regularized_lower_gamma,
    lower_incomplete_gamma,
    omega_d,
    regularized_lower_gamma,
)

__all__ = [
    "KernelFamily",
    "KernelSpec",
    "JumpSample",
    "normalization_constant",
    "jump_intensity",
    "sample_radius",
    "radial_cdf",
    "sample_direction",
    "sample_jump",
    "directions_from_normals",
]


class KernelFamily(str, Enum):
    CONSTANT = "constant"
    HYPERSINGULAR = "hypersingular"
    TEMPERED = "tempered"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class KernelSpec:
    """Radial kernel supported on the closed ball of radius ``delta`` in R^d."""

    family: KernelFamily
    delta: float
    d: int
    alpha: float | None = None
    beta: float | None = None
    sigma: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"kernel dimension must be a positive integer, got {self.d!r}")
        if not np.isfinite(self.delta) or self.delta <= 0:
            raise ValueError(f"interaction radius must be > 0, got {self.delta!r}")
        fam = self.family
        if fam in (KernelFamily.HYPERSINGULAR, KernelFamily.TEMPERED):
            if self.alpha is None or not 0 < self.alpha < 2:
                raise ValueError(f"alpha must lie in (0, 2), got {self.alpha!r}")
        if fam is KernelFamily.TEMPERED and (self.beta is None or not self.beta > 0):
            raise ValueError(f"beta must be > 0, got {self.beta!r}")
        if fam is KernelFamily.GAUSSIAN and (self.sigma is None or not self.sigma > 0):
            raise ValueError(f"sigma must be > 0, got {self.sigma!r}")

    @classmethod
    def constant(cls, d: int, delta: float) -> "KernelSpec":
        return cls(KernelFamily.CONSTANT, delta, d)

    @classmethod
    def hypersingular(cls, d: int, delta: float, alpha: float) -> "KernelSpec":
        return cls(KernelFamily.HYPERSINGULAR, delta, d, alpha=alpha)

    @classmethod
    def tempered(cls, d: int, delta: float, alpha: float, beta: float) -> "KernelSpec":
        return cls(KernelFamily.TEMPERED, delta, d, alpha=alpha, beta=beta)

    @classmethod
    def gaussian(cls, d: int, delta: float, sigma: float) -> "KernelSpec":
        return cls(KernelFamily.GAUSSIAN, delta, d, sigma=sigma)

    @property
    def second_moment_weighted(self) -> bool:
        """True when jumps are drawn from ``phi |z|^2`` rather than ``phi``."""
        return self.family in (KernelFamily.HYPERSINGULAR, KernelFamily.TEMPERED)

    def log_phi(self, r):
        """Natural log of the kernel at ``|z| = r``; ``-inf`` outside the ball."""
        r = np.asarray(r, dtype=float)
        log_c = math.log(normalization_constant(self))
        fam = self.family
        with np.errstate(divide="ignore"):
            log_r = np.log(r)
            if fam is KernelFamily.CONSTANT:
                val = np.full_like(r, log_c)
            elif fam is KernelFamily.HYPERSINGULAR:
                val = log_c - (self.d + self.alpha) * log_r
            elif fam is KernelFamily.TEMPERED:
                val = log_c - self.beta * r - (self.d + self.alpha) * log_r
            else:
                val = log_c - r * r / (2.0 * self.sigma ** 2)
        return np.where(r <= self.delta, val, -np.inf)

    def phi(self, r):
        """Kernel value as a function of ``|z|`` (zero outside the ball)."""
        with np.errstate(over="ignore"):
            return np.exp(self.log_phi(r))


@dataclass(frozen=True)
class JumpSample:
    r: float
    direction: np.ndarray
    z: np.ndarray


def normalization_constant(spec: KernelSpec) -> float:
    d, delta = spec.d, spec.delta
    fam = spec.family
    if fam is KernelFamily.CONSTANT:
        return 1.0
    if fam is KernelFamily.HYPERSINGULAR:
        return (2.0 - spec.alpha) * delta ** (spec.alpha - 2.0) / omega_d(d)
    if fam is KernelFamily.TEMPERED:
        s = 2.0 - spec.alpha
        return spec.beta ** s / (omega_d(d) * float(lower_incomplete_gamma(s, spec.beta * delta)))
    # log form: sigma^d and the incomplete gamma under/overflow separately for large d
    s = d / 2.0
    x = delta ** 2 / (2.0 * spec.sigma ** 2)
    log_gam = math.lgamma(s) + math.log(float(regularized_lower_gamma(s, x)))
    log_c = ((1.0 - s) * math.log(2.0) - math.log(omega_d(d))
             - d * math.log(spec.sigma) - log_gam)
    return math.exp(log_c)


def jump_intensity(spec: KernelSpec) -> float:
    """Total mass of the jump measure (lambda).

    Equals 1 for the normalized hypersingular, tempered and Gaussian kernels
    and the ball volume for the constant indicator kernel.
    """
    if spec.family is KernelFamily.CONSTANT:
        return ball_volume(spec.d, spec.delta)
    return 1.0


def _check_unit(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if np.any(~np.isfinite(xi)) or np.any(xi < 0) or np.any(xi > 1):
        raise ValueError("xi must lie in [0, 1]")
    return xi


def sample_radius(spec: KernelSpec, xi):
    """Inverse radial CDF of the jump density, vectorized over ``xi``."""
    xi = _check_unit(xi)
    delta = spec.delta
    fam = spec.family
    if fam is KernelFamily.CONSTANT:
        r = delta * xi ** (1.0 / spec.d)
    elif fam is KernelFamily.HYPERSINGULAR:
        r = delta * xi ** (1.0 / (2.0 - spec.alpha))
    elif fam is KernelFamily.TEMPERED:
        s = 2.0 - spec.alpha
        top = regularized_lower_gamma(s, spec.beta * delta)
        r = np.asarray(inverse_regularized_lower_gamma(s, xi * top), dtype=float) / spec.beta
    else:
        s = spec.d / 2.0
        top = regularized_lower_gamma(s, delta ** 2 / (2.0 * spec.sigma ** 2))
        g = np.asarray(inverse_regularized_lower_gamma(s, xi * top), dtype=float)
        r = spec.sigma * np.sqrt(2.0 * g)
    r = np.clip(r, 0.0, delta)
    return r[()] if np.ndim(r) == 0 else r


def radial_cdf(spec: KernelSpec, r):
    """Probability that a sampled jump has length at most ``r``."""
    r = np.asarray(r, dtype=float)
    delta = spec.delta
    if np.any(~np.isfinite(r)) or np.any(r < 0) or np.any(r > delta):
        raise ValueError("radius must lie in [0, delta]")
    fam = spec.family
    if fam is KernelFamily.CONSTANT:
        out = (r / delta) ** spec.d
    elif fam is KernelFamily.HYPERSINGULAR:
        out = (r / delta) ** (2.0 - spec.alpha)
    elif fam is KernelFamily.TEMPERED:
        s = 2.0 - spec.alpha
        out = regularized_lower_gamma(s, spec.beta * r) / regularized_lower_gamma(s, spec.beta * delta)
    else:
        s = spec.d / 2.0
        scale = 2.0 * spec.sigma ** 2
        out = regularized_lower_gamma(s, r * r / scale) / regularized_lower_gamma(s, delta ** 2 / scale)
    out = np.asarray(out, dtype=float)
    return out[()] if out.ndim == 0 else out


def directions_from_normals(g: np.ndarray) -> np.ndarray:
    """Project rows of i.i.d. normals onto the unit sphere."""
    norms = np.sqrt(np.einsum("ij,ij->i", g, g))
    return g / norms[:, None]


def sample_direction(key: StreamKey, d: int) -> np.ndarray:
    """Uniform point on the unit sphere S^{d-1} from the stream of ``key``."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    stream = rng.Stream(key)
    while True:
        g = stream.normal(d)
        norm = math.sqrt(float(g @ g))
        if norm > 0:
            return g / norm


def sample_jump(spec: KernelSpec, key: StreamKey) -> JumpSample:
    """One jump: radius from the first uniform, direction from the following normals."""
    stream = rng.Stream(key)
    xi = float(stream.uniform(1)[0])
    r = float(sample_radius(spec, xi))
    while True:
        g = stream.normal(spec.d)
        norm = math.sqrt(float(g @ g))
        if norm > 0:
            break
    direction = g / norm
    return JumpSample(r=r, direction=direction, z=r * direction)
