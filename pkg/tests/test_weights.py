import numpy as np
import pytest

from uvboot import WeightVector, derive_stream, draw_weights, replicate_stream, weight_dispersion
from uvboot.weights import dispersion_q, draw_weight_matrix


def test_single_cell():
    w = draw_weights(1, 17, derive_stream(0, 0, 0))
    np.testing.assert_array_equal(w.counts, [17])


def test_counts_always_sum_to_m():
    for r in range(200):
        w = draw_weights(13, 29, replicate_stream(3, r))
        assert int(w.counts.sum()) == 29
        assert np.all(w.counts >= 0)


def test_weight_vector_validation():
    with pytest.raises(ValueError):
        WeightVector(np.array([1, 2]), m=4, n=2)  # sum != m
    with pytest.raises(ValueError):
        WeightVector(np.array([3, -1]), m=2, n=2)
    with pytest.raises(ValueError):
        WeightVector(np.array([1, 1, 1]), m=3, n=2)


def test_csv_row():
    w = WeightVector(np.array([2, 0, 1]), m=3, n=3)
    assert w.to_csv_row() == "2,0,1"


def test_marginal_moments():
    # binomial marginals: mean m/n, variance m(1/n)(1-1/n)
    n, m, draws = 5, 10**4, 10**4
    mat = draw_weight_matrix(n, m, draws, derive_stream(20260810, 0, 0))
    mean_target = m / n
    var_target = m * (1 / n) * (1 - 1 / n)
    se = np.sqrt(var_target / draws)
    assert np.all(np.abs(mat.mean(axis=0) - mean_target) < 3 * se)
    assert np.all(np.abs(mat.var(axis=0, ddof=1) - var_target) < 0.05 * var_target)


def test_exchangeability_across_cells():
    n, m, draws = 5, 10**4, 10**4
    mat = draw_weight_matrix(n, m, draws, derive_stream(20260810, 0, 1))
    se = np.sqrt(m * (1 / n) * (1 - 1 / n) / draws)
    assert np.ptp(mat.mean(axis=0)) < 3 * se


def test_dispersion_examples():
    assert weight_dispersion(WeightVector(np.array([2, 0]), 2, 2)).q == 0.5
    assert weight_dispersion(WeightVector(np.array([1, 1]), 2, 2)).q == 0.0
    d = weight_dispersion(WeightVector(np.array([3, 1]), 4, 2))
    assert d.expected == (1 - 0.5) / 4


def test_dispersion_mean_matches_exact_expectation():
    # E Q = (1 - 1/n)/m summed from the per-cell second moment
    n = m = 100
    mat = draw_weight_matrix(n, m, 10**4, derive_stream(20260810, 0, 2))
    q = dispersion_q(mat, m)
    target = (1 - 1 / n) / m
    se = q.std(ddof=1) / np.sqrt(len(q))
    assert abs(q.mean() - target) < 3 * se


def test_dispersion_concentration():
    # |m Q / (1 - 1/n) - 1| < 0.2 for nearly every draw at n = m = 1000
    n = m = 1000
    mat = draw_weight_matrix(n, m, 1000, derive_stream(20260810, 0, 3))
    t = m * dispersion_q(mat, m) / (1 - 1 / n)
    assert np.mean(np.abs(t - 1) < 0.2) >= 0.95


def test_stream_determinism():
    a = draw_weights(11, 23, derive_stream(42, 0, 7)).counts
    b = draw_weights(11, 23, derive_stream(42, 0, 7)).counts
    np.testing.assert_array_equal(a, b)
    c = draw_weights(11, 23, derive_stream(42, 0, 8)).counts
    assert not np.array_equal(a, c)


def test_replicate_streams_collision_free():
    # 10^4 replicate streams, no identical weight vectors
    n, m = 20, 100
    seen = set()
    for r in range(10**4):
        w = draw_weights(n, m, replicate_stream(12345, r))
        seen.add(w.counts.tobytes())
    assert len(seen) == 10**4


def test_draw_validation():
    with pytest.raises(ValueError):
        draw_weights(0, 5, derive_stream(0))
    with pytest.raises(ValueError):
        draw_weights(5, 0, derive_stream(0))
    with pytest.raises(ValueError):
        draw_weight_matrix(5, 5, 0, derive_stream(0))
