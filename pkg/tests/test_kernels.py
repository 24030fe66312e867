import math

import numpy as np
import pytest
from scipy import integrate, optimize, stats

from pide_mc import rng
from pide_mc.kernels import (
    KernelSpec,
    directions_from_normals,
    jump_intensity,
    normalization_constant,
    radial_cdf,
    sample_direction,
    sample_jump,
    sample_radius,
)
from pide_mc.rng import StreamKey
from pide_mc.specfun import omega_d

ALL_SPECS = [
    KernelSpec.constant(3, 0.4),
    KernelSpec.hypersingular(3, 0.4, 0.5),
    KernelSpec.hypersingular(3, 0.4, 1.5),
    KernelSpec.tempered(3, 0.4, 1.0, 1.0),
    KernelSpec.gaussian(3, 0.4, 1.0),
]


def _uniforms(n, seed=0):
    return rng.uniforms(rng.stream_ids(seed, 0, 0, np.arange(n, dtype=np.uint64)), np.array([0]))[:, 0]


def test_hypersingular_constant_closed_form():
    assert normalization_constant(KernelSpec.hypersingular(2, 1.0, 1.0)) == pytest.approx(1 / (2 * math.pi))


@pytest.mark.parametrize("spec", [KernelSpec.hypersingular(5, 0.7, 1.2), KernelSpec.tempered(4, 1.3, 0.4, 2.0),
                                  KernelSpec.gaussian(6, 0.9, 0.5), KernelSpec.gaussian(100, 0.4, 1.0)])
def test_normalization_by_quadrature(spec):
    power = 2 if spec.second_moment_weighted else 0
    f = lambda r: float(np.exp(spec.log_phi(r) + math.log(omega_d(spec.d)) + (spec.d - 1 + power) * math.log(r)))  # noqa: E731
    val = sum(integrate.quad(f, a, b, epsabs=0, epsrel=1e-12, limit=200)[0]
              for a, b in [(0, spec.delta * 1e-3), (spec.delta * 1e-3, spec.delta)])
    assert val == pytest.approx(1.0, abs=1e-8)


def test_jump_intensity():
    assert jump_intensity(KernelSpec.hypersingular(3, 0.4, 0.5)) == 1.0
    assert jump_intensity(KernelSpec.constant(2, 0.4)) == pytest.approx(math.pi * 0.16)
    assert jump_intensity(KernelSpec.constant(3, 1.0)) == pytest.approx(4 * math.pi / 3)


@pytest.mark.parametrize("kw", [
    dict(family="hypersingular", delta=0.4, d=2, alpha=2.0),
    dict(family="hypersingular", delta=0.4, d=2, alpha=0.0),
    dict(family="tempered", delta=0.4, d=2, alpha=1.0, beta=0.0),
    dict(family="gaussian", delta=0.4, d=2, sigma=-1.0),
    dict(family="constant", delta=0.0, d=2),
    dict(family="constant", delta=0.4, d=0),
    dict(family="cauchy", delta=0.4, d=2),
])
def test_invalid_specs(kw):
    with pytest.raises(ValueError):
        KernelSpec(**kw)


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_radius_endpoints(spec):
    assert float(sample_radius(spec, 0.0)) == 0.0
    assert float(sample_radius(spec, 1.0)) == pytest.approx(spec.delta, rel=1e-12)
    assert float(radial_cdf(spec, spec.delta)) == pytest.approx(1.0, rel=1e-14)


def test_hypersingular_radius_value():
    assert float(sample_radius(KernelSpec.hypersingular(3, 0.4, 1.0), 0.25)) == pytest.approx(0.1, rel=1e-14)
    assert float(radial_cdf(KernelSpec.hypersingular(3, 1.0, 1.0), 0.25)) == pytest.approx(0.25, rel=1e-14)


def test_gaussian_d2_closed_form():
    spec = KernelSpec.gaussian(2, 1.0, 1.0)
    closed = math.sqrt(-2 * math.log(1 - 0.5 * (1 - math.exp(-0.5))))
    numeric = optimize.brentq(lambda r: float(radial_cdf(spec, r)) - 0.5, 0, 1, xtol=1e-15)
    r = float(sample_radius(spec, 0.5))
    assert r == pytest.approx(closed, abs=1e-10)
    assert r == pytest.approx(numeric, abs=1e-10)


def test_tempered_shape_one_closed_form():
    spec = KernelSpec.tempered(3, 1.0, 1.0, 1.0)
    expected = -math.log(1 - 0.5 * (1 - math.exp(-1)))
    numeric = optimize.brentq(lambda r: float(radial_cdf(spec, r)) - 0.5, 0, 1, xtol=1e-15)
    assert float(sample_radius(spec, 0.5)) == pytest.approx(expected, abs=1e-12)
    assert numeric == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_cdf_inverse_round_trip(spec):
    xi = np.linspace(0.1, 0.9, 9)
    assert np.allclose(radial_cdf(spec, sample_radius(spec, xi)), xi, atol=1e-10, rtol=0)


def test_radius_argument_checks():
    spec = ALL_SPECS[1]
    with pytest.raises(ValueError):
        sample_radius(spec, 1.5)
    with pytest.raises(ValueError):
        radial_cdf(spec, spec.delta * 1.01)


def test_hypersingular_radii_ks():
    spec = KernelSpec.hypersingular(3, 0.4, 0.5)
    r = sample_radius(spec, _uniforms(10 ** 6, seed=9))
    ks = stats.kstest(r, lambda s: (np.clip(s, 0, 0.4) / 0.4) ** 1.5).statistic
    assert ks < 0.002


def test_gaussian_second_moment():
    spec = KernelSpec.gaussian(3, 0.4, 0.3)
    r = sample_radius(spec, _uniforms(10 ** 6, seed=10))
    dens = lambda s: float(spec.phi(s)) * omega_d(3) * s * s  # noqa: E731
    moment = integrate.quad(lambda s: s * s * dens(s), 0, 0.4)[0] / integrate.quad(dens, 0, 0.4)[0]
    assert np.mean(r * r) == pytest.approx(moment, rel=0.01)


def test_direction_unit_norm_and_determinism():
    key = StreamKey(1, 2, 3)
    v = sample_direction(key, 5)
    assert abs(np.linalg.norm(v) - 1.0) < 1e-12
    assert np.array_equal(v, sample_direction(key, 5))


def test_direction_uniform_angles_d2():
    n = 10 ** 6
    g = rng.normals(rng.stream_ids(11, 0, 0, np.arange(n, dtype=np.uint64)), np.arange(2))
    dirs = directions_from_normals(g)
    assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0, atol=1e-12)
    assert np.max(np.abs(dirs.mean(axis=0))) < 0.004
    counts, _ = np.histogram(np.arctan2(dirs[:, 1], dirs[:, 0]), bins=36, range=(-np.pi, np.pi))
    chi2 = stats.chisquare(counts).statistic
    assert chi2 < stats.chi2.ppf(0.999, 35)


def test_sample_jump_inside_ball():
    spec = KernelSpec.tempered(4, 0.4, 1.0, 1.0)
    for p in range(200):
        j = sample_jump(spec, StreamKey(0, 0, p))
        assert np.linalg.norm(j.z) <= spec.delta + 1e-15
        assert j.r == pytest.approx(np.linalg.norm(j.z), rel=1e-12)
