import numpy as np
import pytest

from pide_mc import rng
from pide_mc._validation import NumericalError
from pide_mc.kernels import KernelSpec
from pide_mc.rng import StreamKey
from pide_mc.sde import CoefficientSet, in_domain, simulate_paths, step_path

BOX3 = np.tile([-1.0, 1.0], (3, 1))


def _zeros(t, X):
    return np.zeros_like(X)


def _coeffs(mu=_zeros, sigma=None, c=None, diag=True):
    return CoefficientSet(
        mu=mu,
        sigma=sigma or (lambda t, X: np.zeros_like(X)),
        c=c or (lambda t, X, Z: np.zeros_like(Z)),
        f=lambda t, X, U: np.zeros(len(X)),
        g=lambda t, X: np.zeros(len(X)),
        u0=lambda X: np.zeros(len(X)),
        sigma_diagonal=diag,
    )


def test_in_domain():
    assert in_domain(BOX3, np.zeros(3))
    assert not in_domain(BOX3, np.array([1.0, 0.0, 0.0]))
    assert not in_domain(BOX3, np.array([1.2, 0.0, 0.0]))
    assert np.array_equal(in_domain(BOX3, np.array([[0, 0, 0], [0, -1, 0]])), [True, False])


def test_no_motion_without_coefficients():
    kernel = KernelSpec.hypersingular(3, 0.4, 1.0)
    out = step_path(_coeffs(), kernel, BOX3, np.full(3, 0.2), 0.0, 0.5, StreamKey(1, 2, 3))
    assert np.array_equal(out.x_end, np.full(3, 0.2))
    assert not out.exited


def test_constant_drift_exact():
    v = np.array([0.3, -0.1, 0.05])
    co = _coeffs(mu=lambda t, X: np.broadcast_to(v, X.shape))
    x = np.array([0.1, 0.2, -0.3])
    out = step_path(co, None, BOX3, x, 0.0, 0.25, StreamKey(0, 0, 7))
    assert np.array_equal(out.x_end, x + v * 0.25)


def test_exit_flag():
    co = _coeffs(mu=lambda t, X: np.full_like(X, 4.0))
    out = step_path(co, None, BOX3, np.zeros(3), 0.0, 0.5, StreamKey())
    assert out.exited


def test_start_outside_rejected():
    with pytest.raises(ValueError):
        step_path(_coeffs(), None, BOX3, np.array([1.0, 0, 0]), 0.0, 0.1, StreamKey())


def test_step_path_matches_batch_row():
    kernel = KernelSpec.constant(3, 0.4)
    co = _coeffs(mu=lambda t, X: 0.1 * X, sigma=lambda t, X: 0.3 + 0 * X, c=lambda t, X, Z: Z)
    x = np.array([0.1, -0.2, 0.3])
    ids = rng.stream_ids(5, 2, 4, np.arange(40, dtype=np.uint64))
    batch = simulate_paths(co, kernel, BOX3, x, 0.3, 0.2, ids, max_jumps=1)
    for p in (0, 17, 39):
        one = step_path(co, kernel, BOX3, x, 0.3, 0.2, StreamKey(2, 4, p, master_seed=5))
        assert np.array_equal(one.x_end, batch.x_end[p])
        assert one.jumps == batch.jumps[p]


def test_full_matrix_sigma_matches_diagonal():
    x = np.array([0.1, -0.2, 0.3])
    ids = rng.stream_ids(0, 0, 0, np.arange(100, dtype=np.uint64))
    diag = _coeffs(sigma=lambda t, X: np.tile([0.1, 0.2, 0.3], (len(X), 1)))
    full = _coeffs(sigma=lambda t, X: np.tile(np.diag([0.1, 0.2, 0.3]), (len(X), 1, 1)), diag=False)
    a = simulate_paths(diag, None, BOX3, x, 0.0, 0.1, ids).x_end
    b = simulate_paths(full, None, BOX3, x, 0.0, 0.1, ids).x_end
    assert np.allclose(a, b, atol=1e-15)


def test_brownian_increment_statistics():
    co = _coeffs(sigma=lambda t, X: np.full_like(X, 0.5))
    ids = rng.stream_ids(3, 0, 0, np.arange(200_000, dtype=np.uint64))
    dx = simulate_paths(co, None, np.tile([-10.0, 10.0], (3, 1)), np.zeros(3), 0.0, 0.04, ids).x_end
    se = 0.5 * np.sqrt(0.04 / len(ids))
    assert np.allclose(dx.mean(axis=0), 0.0, atol=4 * se)
    assert np.allclose(dx.var(axis=0), 0.25 * 0.04, rtol=0.01)


def test_jump_frequency():
    # lambda = 1 for the hypersingular kernel; dt = 0.01
    kernel = KernelSpec.hypersingular(2, 0.4, 1.0)
    co = _coeffs(c=lambda t, X, Z: Z)
    box = np.tile([-1.0, 1.0], (2, 1))
    ids = rng.stream_ids(4, 0, 0, np.arange(10 ** 6, dtype=np.uint64))
    batch = simulate_paths(co, kernel, box, np.zeros(2), 0.0, 0.01, ids, max_jumps=1)
    freq = np.mean(batch.jumps >= 1)
    assert abs(freq - (1 - np.exp(-0.01))) < 3e-4
    moved = np.linalg.norm(batch.x_end, axis=1)
    assert np.all(moved[batch.jumps == 0] == 0.0)
    assert np.all(moved[batch.jumps == 1] <= 0.4 + 1e-15)


def test_jump_cap():
    kernel = KernelSpec.constant(2, 0.4)   # lambda = 0.16 pi
    co = _coeffs(c=lambda t, X, Z: Z)
    box = np.tile([-5.0, 5.0], (2, 1))
    ids = rng.stream_ids(0, 0, 0, np.arange(50_000, dtype=np.uint64))
    capped = simulate_paths(co, kernel, box, np.zeros(2), 0.0, 5.0, ids, max_jumps=1)
    free = simulate_paths(co, kernel, box, np.zeros(2), 0.0, 5.0, ids, max_jumps=50)
    assert capped.jumps.max() == 1
    assert free.jumps.max() > 1
    # the first jump is the same in both runs
    one = free.jumps == 1
    assert np.array_equal(capped.x_end[one], free.x_end[one])


def test_non_finite_position_reported():
    co = _coeffs(mu=lambda t, X: np.full_like(X, np.nan))
    with pytest.raises(NumericalError) as info:
        step_path(co, None, BOX3, np.zeros(3), 0.0, 0.1, StreamKey(3, 4, 5))
    assert (info.value.step, info.value.node, info.value.path) == (3, 4, 5)


def test_invalid_dt():
    with pytest.raises(ValueError):
        step_path(_coeffs(), None, BOX3, np.zeros(3), 0.0, 0.0, StreamKey())
