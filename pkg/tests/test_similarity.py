import math
from statistics import mean, pvariance

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phasewalk.errors import NumericalError, ValidationError
from phasewalk.similarity import (MEASURE, TRANSITION, SnapshotEncoding, build_similarity_matrix,
                                  default_bandwidth_grid, encoding_distance, gaussian_kernel,
                                  pairwise_distances, select_bandwidth)


def mat(x):
    return SnapshotEncoding(TRANSITION, np.asarray(x, dtype=float))


def vec(x):
    return SnapshotEncoding(MEASURE, np.asarray(x, dtype=float))


def test_distance_examples():
    a = mat([[0.2, 0.8], [0.5, 0.5]])
    assert encoding_distance(a, a) == 0.0
    assert encoding_distance(mat(np.zeros((2, 2))), mat(np.ones((2, 2)))) == pytest.approx(2.0)
    assert encoding_distance(vec([1, 0]), vec([0, 1])) == pytest.approx(math.sqrt(2))


def test_distance_mismatch():
    with pytest.raises(ValidationError):
        encoding_distance(vec([1, 0]), mat(np.eye(2)))
    with pytest.raises(ValidationError):
        encoding_distance(vec([1, 0]), vec([1, 0, 0]))
    with pytest.raises(ValidationError):
        SnapshotEncoding(MEASURE, np.eye(2))


@pytest.mark.parametrize("shift, sigma, expected", [
    (0.0, 0.3, 1.0),
    (1.0, 1.0, math.exp(-0.5)),
    (2.0, 1.0, math.exp(-2.0)),
])
def test_gaussian_kernel_examples(shift, sigma, expected):
    assert gaussian_kernel(vec([0.0, 0.0]), vec([shift, 0.0]), sigma) == pytest.approx(expected, rel=1e-14)


def test_gaussian_kernel_rejects_sigma():
    with pytest.raises(ValidationError):
        gaussian_kernel(vec([0]), vec([1]), 0.0)


def test_kernel_increases_with_sigma():
    a, b = vec([0.0, 0.0]), vec([0.3, 0.4])
    values = [gaussian_kernel(a, b, s) for s in np.geomspace(0.05, 20, 30)]
    assert all(x < y for x, y in zip(values, values[1:]))


def test_similarity_identical_pair():
    K = build_similarity_matrix([vec([0.5, 0.5]), vec([0.5, 0.5])], 1.0).K
    np.testing.assert_array_equal(K, [[0, 1], [1, 0]])


def test_similarity_far_group():
    K = build_similarity_matrix([vec([0, 0]), vec([0, 0]), vec([50, 0])], 1.0).K
    assert K[0, 1] == 1.0 and K[0, 2] < 1e-300 and K[1, 2] < 1e-300


def test_similarity_properties(rng):
    enc = [mat(rng.random((5, 5))) for _ in range(9)]
    K = build_similarity_matrix(enc, 0.7).K
    assert np.array_equal(K, K.T)
    assert (np.diag(K) == 0).all()
    off = K[~np.eye(9, dtype=bool)]
    assert (off > 0).all() and (off <= 1).all()


def test_pairwise_count_and_threads(rng, monkeypatch):
    enc = [mat(rng.random((4, 4))) for _ in range(7)]
    D1 = pairwise_distances(enc)
    D3 = pairwise_distances(enc, threads=3)
    np.testing.assert_array_equal(D1, D3)
    for i in range(7):
        for j in range(7):
            assert D1[i, j] == pytest.approx(encoding_distance(enc[i], enc[j]), abs=1e-14)


def test_pairwise_evaluation_count(monkeypatch):
    # the vectorized distance pass touches each unordered pair exactly once
    import phasewalk.similarity as sim
    calls = []
    real = sim.np.einsum

    def counting(spec, a, b):
        calls.append(a.shape[0])
        return real(spec, a, b)

    monkeypatch.setattr(sim.np, "einsum", counting)
    enc = [vec([float(k), 0.0]) for k in range(6)]
    pairwise_distances(enc)
    assert sum(calls) == 6 * 5 // 2


def test_node_relabeling_invariance(rng):
    mats = [rng.random((6, 6)) for _ in range(5)]
    perm = rng.permutation(6)
    K1 = build_similarity_matrix([mat(m) for m in mats], 0.8).K
    K2 = build_similarity_matrix([mat(m[np.ix_(perm, perm)]) for m in mats], 0.8).K
    np.testing.assert_allclose(K1, K2, atol=1e-14)


def ratio_oracle(points, sigma):
    vals = [math.exp(-((a - b) ** 2) / (2 * sigma ** 2))
            for i, a in enumerate(points) for j, b in enumerate(points) if i != j]
    return pvariance(vals) / mean(vals)


def test_select_bandwidth_two_groups():
    points = [0.0, 0.05, 0.1, 5.0, 5.05, 5.1]
    enc = [vec([p]) for p in points]
    grid = list(np.geomspace(0.5, 50.0, 25))
    chosen = select_bandwidth(enc, grid)
    scores = [ratio_oracle(points, s) for s in grid]
    assert chosen == pytest.approx(grid[int(np.argmax(scores))])
    best = ratio_oracle(points, chosen)
    assert best > scores[0] and best > scores[-1]
    K = build_similarity_matrix(enc, chosen).K
    off = K[~np.eye(6, dtype=bool)]
    assert off.max() > 0.9 and off.min() < 0.1


def test_select_bandwidth_tie_to_smallest():
    enc = [vec([0.3, 0.7])] * 4
    assert select_bandwidth(enc, [0.5, 0.2, 2.0]) == 0.2


def test_select_bandwidth_all_zero():
    enc = [vec([0.0]), vec([1000.0]), vec([-1000.0])]
    with pytest.raises(NumericalError):
        select_bandwidth(enc, [1e-3, 1e-2])


def test_select_bandwidth_rejects_bad_grid():
    enc = [vec([0.0]), vec([1.0])]
    with pytest.raises(ValidationError):
        select_bandwidth(enc, [])
    with pytest.raises(ValidationError):
        select_bandwidth(enc, [1.0, -1.0])


def test_default_grid_percentiles(rng):
    enc = [vec(rng.random(3)) for _ in range(10)]
    D = pairwise_distances(enc)
    grid = default_bandwidth_grid(D)
    off = D[~np.eye(10, dtype=bool)]
    assert grid.size == 32
    assert grid[0] == pytest.approx(np.percentile(off, 5))
    assert grid[-1] == pytest.approx(np.percentile(off, 95))
    np.testing.assert_allclose(np.diff(np.log(grid)), np.log(grid[1] / grid[0]))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=8), st.floats(0.05, 5.0))
def test_similarity_is_symmetric_and_bounded(xs, sigma):
    K = build_similarity_matrix([vec([x]) for x in xs], sigma).K
    assert np.array_equal(K, K.T)
    assert (np.diag(K) == 0).all()
    assert (K >= 0).all() and (K <= 1).all()
