import math

import numpy as np
import pytest
from scipy import integrate, special

from pide_mc.specfun import (
    ball_volume,
    inverse_lower_incomplete_gamma,
    inverse_regularized_lower_gamma,
    lower_incomplete_gamma,
    omega_d,
    regularized_lower_gamma,
    regularized_upper_gamma,
)


@pytest.mark.parametrize("d, expected", [(1, 2.0), (2, 2 * math.pi), (3, 4 * math.pi)])
def test_omega_small_dims(d, expected):
    assert omega_d(d) == pytest.approx(expected, rel=1e-15)


def test_omega_rejects_zero():
    with pytest.raises(ValueError):
        omega_d(0)


def test_ball_volume():
    assert ball_volume(2, 0.4) == pytest.approx(math.pi * 0.16, rel=1e-14)
    assert ball_volume(3, 1.0) == pytest.approx(4 * math.pi / 3, rel=1e-14)


def test_gamma_shape_one_closed_form():
    assert float(lower_incomplete_gamma(1.0, math.log(2.0))) == pytest.approx(0.5, abs=1e-15)


def test_gamma_at_zero():
    for s in (0.3, 1.0, 7.5):
        assert float(lower_incomplete_gamma(s, 0.0)) == 0.0


def test_gamma_half_matches_quadrature():
    val, _ = integrate.quad(lambda t: t ** -0.5 * math.exp(-t), 0, 1, epsabs=0, epsrel=1e-13)
    assert abs(float(lower_incomplete_gamma(0.5, 1.0)) - val) < 1e-10


@pytest.mark.parametrize("s", [0.3, 0.7, 1.5, 5.0, 50.0])
def test_regularized_against_scipy(s):
    x = np.array([1e-3, 0.1, 1.0, 5.0, 20.0, 80.0])
    assert np.allclose(np.asarray(regularized_lower_gamma(s, x), dtype=float), special.gammainc(s, x),
                       rtol=1e-13, atol=1e-300)
    assert np.allclose(np.asarray(regularized_upper_gamma(s, x), dtype=float), special.gammaincc(s, x),
                       rtol=1e-12, atol=1e-300)


def test_inverse_closed_form():
    assert float(inverse_lower_incomplete_gamma(1.0, 0.5)) == pytest.approx(math.log(2.0), rel=1e-14)
    assert float(inverse_lower_incomplete_gamma(2.0, 0.0)) == 0.0


@pytest.mark.parametrize("s", [0.3, 1.5, 50.0])
@pytest.mark.parametrize("x", [0.1, 1.0, 5.0])
def test_round_trip(s, x):
    back = float(inverse_lower_incomplete_gamma(s, lower_incomplete_gamma(s, x)))
    assert abs(back - x) / x < 1e-10


def test_inverse_regularized_round_trip_vector():
    p = np.linspace(0.01, 0.99, 25)
    x = np.asarray(inverse_regularized_lower_gamma(2.5, p), dtype=float)
    assert np.allclose(special.gammainc(2.5, x), p, rtol=1e-12)


@pytest.mark.parametrize("call", [
    lambda: lower_incomplete_gamma(0.0, 1.0),
    lambda: lower_incomplete_gamma(1.0, -1.0),
    lambda: lower_incomplete_gamma(1.0, float("nan")),
    lambda: inverse_lower_incomplete_gamma(1.0, 1.0),   # y must be < Gamma(1) = 1
    lambda: inverse_lower_incomplete_gamma(1.0, -0.1),
])
def test_domain_errors(call):
    with pytest.raises(ValueError):
        call()
