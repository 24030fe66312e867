"""Built-in problems with manufactured sources, and a residual oracle for them.

Coefficients are vectorized over rows of ``X`` (shape ``(n, d)``); see
:class:`pide_mc.sde.CoefficientSet` for the calling conventions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate

from ._validation import check_points, check_positive, check_positive_int
from .kernels import KernelFamily, KernelSpec, jump_intensity, normalization_constant
from .sde import CoefficientSet, in_domain
from .sparse_grid import check_box
from .specfun import ball_volume, omega_d

__all__ = [
    "ProblemSpec",
    "SeparableExact",
    "example1",
    "example2",
    "example3",
    "zero_problem",
    "sphere_moment",
    "kernel_moment",
    "nonlocal_apply_separable",
    "residual_oracle",
    "BUILTIN_PROBLEMS",
    "make_problem",
]


@dataclass(frozen=True)
class SeparableExact:
    """``u(t, x) = time_factor(t) * sum_j polys[j](x_j)``."""

    time_factor: Callable[[float], float]
    polys: tuple


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    name: str
    d: int
    box: np.ndarray
    kernel: KernelSpec | None
    coeffs: CoefficientSet
    T: float = 1.0
    exact: Callable | None = None
    separable: SeparableExact | None = field(default=None, repr=False)

    def __post_init__(self):
        check_positive_int("d", self.d)
        object.__setattr__(self, "box", check_box(self.box, self.d))
        check_positive("T", self.T)
        if self.kernel is not None and self.kernel.d != self.d:
            raise ValueError(f"kernel dimension {self.kernel.d} does not match problem dimension {self.d}")

    @property
    def volume(self) -> float:
        return float(np.prod(self.box[:, 1] - self.box[:, 0]))

    @property
    def jump_intensity(self) -> float:
        return 0.0 if self.kernel is None else jump_intensity(self.kernel)


def _unit_box(d: int) -> np.ndarray:
    return np.tile([-1.0, 1.0], (d, 1))


def _identity_jump(t, X, Z):
    return Z


def _zeros_vec(t, X):
    return np.zeros_like(X)


# ---------------------------------------------------------------- moments

def sphere_moment(d: int, k: int) -> float:
    """E[theta_1^k] for theta uniform on the unit sphere in R^d."""
    if k % 2:
        return 0.0
    num = 1.0
    for i in range(1, k, 2):
        num *= i
    den = 1.0
    for i in range(0, k, 2):
        den *= d + i
    return num / den


def kernel_moment(kernel: KernelSpec, k: int) -> float:
    """M_k = integral over the ball of z_1^k phi(|z|) dz."""
    if k % 2:
        return 0.0
    d, delta = kernel.d, kernel.delta
    if kernel.family is KernelFamily.CONSTANT:
        radial = delta ** (k + d) / (k + d)
    elif kernel.family is KernelFamily.HYPERSINGULAR:
        if k <= kernel.alpha:
            raise ValueError(f"moment of order {k} diverges for alpha={kernel.alpha}")
        e = k - kernel.alpha
        radial = normalization_constant(kernel) * delta ** e / e
    else:
        if kernel.family is KernelFamily.TEMPERED and k <= kernel.alpha:
            raise ValueError(f"moment of order {k} diverges for alpha={kernel.alpha}")

        def integrand(r):
            return math.exp(float(kernel.log_phi(r)) + (k + d - 1) * math.log(r)) if r > 0 else 0.0

        radial = integrate.quad(integrand, 0.0, delta, epsabs=0.0, epsrel=1e-13, limit=200)[0]
    return omega_d(d) * sphere_moment(d, k) * radial


def _as_polys(polys, d: int) -> list:
    if len(polys) != d:
        raise ValueError(f"expected {d} per-dimension polynomials, got {len(polys)}")
    out = []
    for p in polys:
        if isinstance(p, Polynomial):
            out.append(p)
        elif isinstance(p, (list, tuple, np.ndarray)) and np.issubdtype(np.asarray(p).dtype, np.number):
            out.append(Polynomial(np.asarray(p, dtype=float)))
        else:
            raise ValueError("each component must be a Polynomial or a coefficient sequence")
    return out


def nonlocal_apply_separable(kernel: KernelSpec, polys: Sequence, x) -> np.ndarray:
    """Nonlocal term of a separable polynomial with jump amplitude ``c = z``.

    ``sum_j sum_{k even >= 2} p_j^(k)(x_j) / k! * M_k``; exact for polynomials.
    """
    polys = _as_polys(polys, kernel.d)
    X = check_points(x, kernel.d)
    top = max(p.degree() for p in polys)
    out = np.zeros(X.shape[0])
    for k in range(2, top + 1, 2):
        mk = kernel_moment(kernel, k)
        for j, p in enumerate(polys):
            if p.degree() >= k:
                out += p.deriv(k)(X[:, j]) * (mk / math.factorial(k))
    return out if np.ndim(x) > 1 else out[0]


# ---------------------------------------------------------------- example 1

def example1(d: int = 2, delta: float = 0.4, T: float = 1.0) -> ProblemSpec:
    """Constant kernel with a separable quintic exact solution."""
    d = check_positive_int("d", d)
    kernel = KernelSpec.constant(d, delta)
    j = np.arange(1, d + 1, dtype=float)
    a5, a3 = 1.0 / j, 1.0 / (j + 1.0)
    polys = tuple(Polynomial([0.0, 0.0, 0.0, -a3[i], 0.0, a5[i]]) for i in range(d))
    m2 = kernel_moment(kernel, 2)
    m4 = kernel_moment(kernel, 4)

    def poly(X):
        return (a5 * X ** 5 - a3 * X ** 3).sum(axis=1)

    def exact(t, X):
        return math.sin(10.0 * t) * poly(X)

    def mu(t, X):
        return 0.1 * math.cos(2 * math.pi * t) * (2 * X ** 7 - X ** 8)

    def sigma(t, X):
        return (math.exp(-t) / 20.0) * np.sin(math.pi * X) ** 2

    def source(t, X):
        s, ds = math.sin(10.0 * t), 10.0 * math.cos(10.0 * t)
        d1 = 5 * a5 * X ** 4 - 3 * a3 * X ** 2
        d2 = 20 * a5 * X ** 3 - 6 * a3 * X
        d4 = 120 * a5 * X
        local = (mu(t, X) * d1).sum(axis=1) + 0.5 * (sigma(t, X) ** 2 * d2).sum(axis=1)
        nonlocal_ = (d2 * (m2 / 2.0) + d4 * (m4 / 24.0)).sum(axis=1)
        u = s * poly(X)
        return ds * poly(X) - s * (local + nonlocal_) - (1 - u) / (1 + u)

    def f(t, X, U):
        # the manufactured source only exists on the closed box; exited paths see its face value
        return (1 - U) / (1 + U) + source(t, np.clip(X, -1.0, 1.0))

    coeffs = CoefficientSet(
        mu=mu, sigma=sigma, c=_identity_jump, f=f,
        g=exact, u0=lambda X: exact(0.0, X), sigma_diagonal=True,
    )
    return ProblemSpec("example1", d, _unit_box(d), kernel, coeffs, T, exact,
                       SeparableExact(lambda t: math.sin(10.0 * t), polys))


# ---------------------------------------------------------------- example 2

def example2(d: int = 100, T: float = 1.0) -> ProblemSpec:
    """Pure diffusion with a Gaussian-profile exact solution."""
    d = check_positive_int("d", d)

    def exact(t, X):
        return math.cos(t * t) * np.exp(-(X * X).sum(axis=1))

    def mu(t, X):
        return (math.sin(t) / (1 + t * t)) * np.exp(-X * X)

    def sigma(t, X):
        s = np.empty_like(X)
        s[:, :-1] = np.cos(X[:, :-1] + X[:, 1:])
        s[:, -1] = np.sin(X[:, -1])
        return math.exp(-5.0 * t) * s

    def source(t, X):
        u = exact(t, X)
        dt_u = -2.0 * t * math.sin(t * t) * np.exp(-(X * X).sum(axis=1))
        drift = (mu(t, X) * (-2.0 * X)).sum(axis=1) * u
        diff = 0.5 * (sigma(t, X) ** 2 * (4.0 * X * X - 2.0)).sum(axis=1) * u
        return dt_u - drift - diff - np.exp(-2.0 * np.abs(u))

    def f(t, X, U):
        return np.exp(-2.0 * np.abs(U)) + source(t, np.clip(X, -1.0, 1.0))

    coeffs = CoefficientSet(
        mu=mu, sigma=sigma, c=_identity_jump, f=f,
        g=exact, u0=lambda X: exact(0.0, X), sigma_diagonal=True,
    )
    return ProblemSpec("example2", d, _unit_box(d), None, coeffs, T, exact)


# ---------------------------------------------------------------- example 3

def example3(d: int = 100, alpha: float = 0.5, delta: float = 0.4, T: float = 1.0) -> ProblemSpec:
    """Hypersingular kernel, zero data; no closed-form solution."""
    d = check_positive_int("d", d)
    if not 0 < alpha < 2:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha!r}")
    kernel = KernelSpec.hypersingular(d, delta, alpha)
    k = np.arange(1, d + 1, dtype=float)
    powers = np.arange(2, d + 1, dtype=float)  # exponent (and divisor) for x_{i+1}

    def mu(t, X):
        return math.exp(-t * t) * np.log(3.0 + np.abs(X) / (1.0 + t))

    def sigma(t, X):
        s = np.empty_like(X)
        if d > 1:
            s[:, :-1] = np.sin(X[:, :-1] * X[:, 1:] ** powers / powers)
        s[:, -1] = np.cos(X[:, 0] * X[:, -1])
        return (math.cos(t) / (1.0 + 10.0 * t * t)) * s

    def c(t, X, Z):
        return np.exp(-Z) + (t / k) * X

    def f(t, X, U):
        return np.abs(np.sin(U)) ** (2.0 / 3.0)

    def zero(t, X):
        return np.zeros(X.shape[0])

    coeffs = CoefficientSet(
        mu=mu, sigma=sigma, c=c, f=f, g=zero,
        u0=lambda X: np.zeros(X.shape[0]), sigma_diagonal=True,
    )
    return ProblemSpec("example3", d, _unit_box(d), kernel, coeffs, T, None)


def zero_problem(d: int = 2, T: float = 1.0) -> ProblemSpec:
    """All data zero; the exact solution is identically zero."""
    d = check_positive_int("d", d)

    def zero(t, X):
        return np.zeros(X.shape[0])

    coeffs = CoefficientSet(
        mu=_zeros_vec, sigma=_zeros_vec, c=lambda t, X, Z: np.zeros_like(X),
        f=lambda t, X, U: np.zeros_like(U), g=zero,
        u0=lambda X: np.zeros(X.shape[0]), sigma_diagonal=True,
    )
    return ProblemSpec("zero", d, _unit_box(d), None, coeffs, T, zero,
                       SeparableExact(lambda t: 0.0, tuple(Polynomial([0.0]) for _ in range(d))))


BUILTIN_PROBLEMS = ("example1", "example2", "example3", "zero")


def make_problem(name: str, d: int | None = None, alpha: float | None = None,
                 delta: float | None = None, T: float = 1.0) -> ProblemSpec:
    """Look up a built-in problem by name with optional overrides."""
    if name == "example1":
        return example1(d or 2, delta=0.4 if delta is None else delta, T=T)
    if name == "example2":
        return example2(d or 100, T=T)
    if name == "example3":
        return example3(d or 100, alpha=0.5 if alpha is None else alpha,
                        delta=0.4 if delta is None else delta, T=T)
    if name == "zero":
        return zero_problem(d or 2, T=T)
    raise ValueError(f"unknown problem {name!r}; choose from {', '.join(BUILTIN_PROBLEMS)}")


# ---------------------------------------------------------------- residual oracle

_FD_H = 1e-3  # 5-point stencils: truncation O(h^4), roundoff O(eps / h^2)


def _d1(fun, h):
    return (-fun(2 * h) + 8 * fun(h) - 8 * fun(-h) + fun(-2 * h)) / (12 * h)


def _d2(fun, h):
    return (-fun(2 * h) + 16 * fun(h) - 30 * fun(0.0) + 16 * fun(-h) - fun(-2 * h)) / (12 * h * h)


def _nonlocal_mc(problem: ProblemSpec, t: float, x: np.ndarray, n: int, seed: int) -> float:
    from .kernels import sample_radius
    kernel = problem.kernel
    gen = np.random.default_rng(seed)
    r = np.asarray(sample_radius(kernel, gen.random(n)))
    g = gen.standard_normal((n, problem.d))
    z = r[:, None] * g / np.linalg.norm(g, axis=1)[:, None]
    X = np.broadcast_to(x, (n, problem.d))
    # antithetic pairs z, -z (the kernel is radial): cancels the odd first-order
    # term, whose variance under the 1/|z|^2 weight is infinite for singular kernels
    u_plus = problem.exact(t, X + problem.coeffs.c(t, X, z))
    u_minus = problem.exact(t, X + problem.coeffs.c(t, X, -z))
    u_x = problem.exact(t, x[None, :])[0]
    w = 1.0 if not kernel.second_moment_weighted else 1.0 / np.maximum((z * z).sum(axis=1), 1e-300)
    return jump_intensity(kernel) * float(np.mean((0.5 * (u_plus + u_minus) - u_x) * w))


def residual_oracle(problem: ProblemSpec, t: float, x, h: float = _FD_H,
                    mc_samples: int = 10 ** 6, mc_seed: int = 0) -> float:
    """|du/dt - L u - f(t, x, u)| at one interior point, by finite differences.

    The nonlocal term uses exact ball moments when the exact solution is
    separable with ``c(t, x, z) = z``, and Monte Carlo quadrature otherwise.
    """
    if problem.exact is None:
        raise ValueError(f"problem {problem.name!r} has no exact solution")
    x = check_points(x, problem.d)[0]
    d = problem.d
    u = problem.exact
    co = problem.coeffs

    def along(i):
        def fun(s):
            y = x.copy()
            y[i] += s
            return u(t, y[None, :])[0]
        return fun

    dt_u = _d1(lambda s: u(t + s, x[None, :])[0], h)
    grad = np.array([_d1(along(i), h) for i in range(d)])
    mu = np.asarray(co.mu(t, x[None, :]), dtype=float)[0]
    sig = np.asarray(co.sigma(t, x[None, :]), dtype=float)[0]
    if co.sigma_diagonal:
        hess_diag = np.array([_d2(along(i), h) for i in range(d)])
        diffusion = 0.5 * float((sig ** 2 * hess_diag).sum())
    else:
        A = sig @ sig.T
        diffusion = 0.0
        for i in range(d):
            for j in range(d):
                if A[i, j] == 0.0:
                    continue
                if i == j:
                    hij = _d2(along(i), h)
                else:
                    def mixed(hh, i=i, j=j):
                        acc = 0.0
                        for si, sj, w in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
                            y = x.copy()
                            y[i] += si * hh
                            y[j] += sj * hh
                            acc += w * u(t, y[None, :])[0]
                        return acc / (4 * hh * hh)
                    hij = (4 * mixed(h) - mixed(2 * h)) / 3
                diffusion += 0.5 * A[i, j] * hij
    local = float(mu @ grad) + diffusion

    nonlocal_ = 0.0
    if problem.kernel is not None:
        probe = np.random.default_rng(12345).standard_normal((3, d)) * 0.1
        is_identity = np.allclose(co.c(t, np.broadcast_to(x, (3, d)), probe), probe, rtol=0, atol=0)
        if problem.separable is not None and is_identity:
            nonlocal_ = problem.separable.time_factor(t) * float(
                nonlocal_apply_separable(problem.kernel, problem.separable.polys, x))
        else:
            nonlocal_ = _nonlocal_mc(problem, t, x, mc_samples, mc_seed)

    u_x = u(t, x[None, :])
    f_val = float(np.asarray(co.f(t, x[None, :], u_x))[0])
    return abs(dt_u - local - nonlocal_ - f_val)
