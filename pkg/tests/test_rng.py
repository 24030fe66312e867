import numpy as np
import pytest
from scipy import stats

from pide_mc import rng
from pide_mc.rng import Stream, StreamKey


def _ids(n, seed=0, step=0, node=0):
    return rng.stream_ids(seed, step, node, np.arange(n, dtype=np.uint64))


def test_same_key_same_draws():
    key = StreamKey(3, 7, 11, master_seed=5)
    assert np.array_equal(rng.uniform01(key, 50), rng.uniform01(StreamKey(3, 7, 11, 5), 50))
    assert np.array_equal(rng.standard_normal(key, 4), rng.standard_normal(key, 4))


def test_distinct_keys_differ():
    a = rng.uniform01(StreamKey(1, 2, 0), 8)
    b = rng.uniform01(StreamKey(2, 1, 0), 8)
    c = rng.uniform01(StreamKey(1, 2, 0, master_seed=1), 8)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_stream_matches_vectorized_counters():
    key = StreamKey(4, 2, 9, master_seed=17)
    s = Stream(key)
    seq = np.concatenate([s.uniform(3), s.uniform(2)])
    direct = rng.uniforms(np.array([key.stream_id()]), np.arange(5))[0]
    assert np.array_equal(seq, direct)


def test_uniform_moments_and_range():
    u = rng.uniforms(_ids(10 ** 6), np.array([0]))[:, 0]
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.002


def test_normal_moments_and_ks():
    g = rng.normals(_ids(10 ** 6, seed=1), np.array([0]))[:, 0]
    assert abs(g.mean()) < 0.004
    assert abs(g.var() - 1.0) < 0.01
    assert stats.kstest(g, "norm").statistic < 0.002


def test_counter_columns_are_independent():
    g = rng.normals(_ids(200_000, seed=2), np.arange(3))
    corr = np.corrcoef(g.T)
    assert np.max(np.abs(corr - np.eye(3))) < 0.01


def test_standard_normal_rejects_zero_dim():
    with pytest.raises(ValueError):
        rng.standard_normal(StreamKey(), 0)


def test_poisson_zero_mean():
    u = rng.uniforms(_ids(1000), np.array([0]))[:, 0]
    assert np.all(rng.poisson_inverse(u, 0.0) == 0)
    assert rng.poisson_count(StreamKey(1, 1, 1), 0.0) == 0


def test_poisson_small_mean_probabilities():
    u = rng.uniforms(_ids(10 ** 6, seed=3), np.array([0]))[:, 0]
    n = rng.poisson_inverse(u, 0.01)
    assert abs(np.mean(n == 0) - np.exp(-0.01)) < 0.001
    assert np.mean(n >= 2) < 1e-3


def test_poisson_mean_and_cap():
    u = rng.uniforms(_ids(200_000, seed=4), np.array([0]))[:, 0]
    n = rng.poisson_inverse(u, 3.0)
    assert abs(n.mean() - 3.0) < 0.02
    assert rng.poisson_inverse(u, 3.0, cap=1).max() == 1


def test_poisson_rejects_negative_mean():
    with pytest.raises(ValueError):
        rng.poisson_count(StreamKey(), -1.0)


@pytest.mark.parametrize("bad", [dict(step_index=-1), dict(node_index=1.5), dict(master_seed=0.5)])
def test_stream_key_validation(bad):
    with pytest.raises(ValueError):
        StreamKey(**bad)
