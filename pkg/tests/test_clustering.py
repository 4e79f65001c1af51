import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from phasewalk.clustering import (EmbeddingMatrix, detect_num_phases, distance_matrix, kmeans_rows,
                                  snapshot_coordinates, spectral_embedding)
from phasewalk.errors import ValidationError
from phasewalk.metrics import ari
from phasewalk.temporal import TemporalTransitionMatrix, build_temporal_generator, temporal_transition


def block_P(across=0.0):
    """4x4 stochastic matrix with blocks {0,1} and {2,3}."""
    P = np.array([[0.5, 0.5, 0, 0], [0.5, 0.5, 0, 0], [0, 0, 0.5, 0.5], [0, 0, 0.5, 0.5]])
    P = (1 - 2 * across) * P + across * (1 - np.kron(np.eye(2), np.ones((2, 2))))
    return TemporalTransitionMatrix(P, 1.0)


def residual(P, emb):
    return np.abs(P @ emb.U - emb.U * emb.eigenvalues[None, :]).max()


def test_embedding_identity_residual():
    P = np.eye(5)
    emb = spectral_embedding(TemporalTransitionMatrix(P, 1.0), 2)
    assert residual(P, emb) <= 1e-8
    np.testing.assert_allclose(np.linalg.norm(emb.U, axis=0), 1.0)


def test_embedding_block_opposite_signs():
    Pt = block_P(across=1e-3)
    emb = spectral_embedding(Pt, 2)
    psi2 = emb.U[:, 1]
    assert psi2[0] == pytest.approx(psi2[1]) and psi2[2] == pytest.approx(psi2[3])
    assert np.sign(psi2[0]) == -np.sign(psi2[2])
    assert residual(Pt.P, emb) <= 1e-10


def test_embedding_exact_blocks_span_indicators():
    emb = spectral_embedding(block_P(), 2)
    U = emb.U
    np.testing.assert_allclose(U[0], U[1], atol=1e-12)
    np.testing.assert_allclose(U[2], U[3], atol=1e-12)
    assert np.linalg.matrix_rank(U[[0, 2]]) == 2


def test_embedding_psi1_constant_and_sign(rng):
    A = rng.random((7, 7))
    K = np.triu(A, 1) + np.triu(A, 1).T
    Pt = temporal_transition(build_temporal_generator(K), 2.0)
    emb = spectral_embedding(Pt, 3)
    assert emb.eigenvalues[0] == pytest.approx(1.0, abs=1e-9)
    assert np.ptp(emb.U[:, 0]) <= 1e-9
    for j in range(3):
        col = emb.U[:, j]
        assert col[np.argmax(np.abs(col))] > 0
    assert residual(Pt.P, emb) <= 1e-9


def test_embedding_general_path_matches_symmetric(rng):
    A = rng.random((6, 6))
    K = np.triu(A, 1) + np.triu(A, 1).T
    Pt = temporal_transition(build_temporal_generator(K), 1.5)
    sym = spectral_embedding(Pt, 3)
    gen = spectral_embedding(TemporalTransitionMatrix(Pt.P, Pt.tau_temp), 3)
    np.testing.assert_allclose(sym.eigenvalues, gen.eigenvalues, atol=1e-10)
    np.testing.assert_allclose(np.abs(sym.U), np.abs(gen.U), atol=1e-8)


def test_embedding_bounds():
    with pytest.raises(ValidationError):
        spectral_embedding(block_P(), 5)
    with pytest.raises(ValidationError):
        spectral_embedding(block_P(), 0)


@pytest.mark.parametrize("eigs, s", [
    ([1.0, 0.95, 0.30, 0.28], 2),
    ([1.0, 0.97, 0.93, 0.20], 3),
    ([1.0, 0.5], 1),
])
def test_detect_num_phases(eigs, s):
    assert detect_num_phases(eigs) == s


def test_detect_num_phases_caps_search():
    eigs = [1.0 - 0.001 * k for k in range(12)] + [0.0]
    # the big drop sits beyond position 10 and is ignored
    assert detect_num_phases(eigs) <= 10


def test_kmeans_1d():
    lab = kmeans_rows(np.array([[0.0], [0.1], [1.0], [1.1]]), 2).labels
    assert lab.tolist() == [0, 0, 1, 1]


def test_kmeans_single_cluster_total_variance(rng):
    X = rng.normal(size=(9, 3))
    res = kmeans_rows(X, 1)
    assert (res.labels == 0).all()
    assert res.inertia == pytest.approx(((X - X.mean(axis=0)) ** 2).sum())


def test_kmeans_identical_rows_error():
    with pytest.raises(ValidationError):
        kmeans_rows(np.ones((4, 2)), 2)


def test_kmeans_deterministic_and_translation_invariant(rng):
    X = np.vstack([rng.normal(0, 0.3, (10, 2)), rng.normal(3, 0.3, (10, 2)), rng.normal((0, 3), 0.3, (10, 2))])
    a = kmeans_rows(X, 3, restarts=5, seed=11)
    b = kmeans_rows(X, 3, restarts=5, seed=11)
    np.testing.assert_array_equal(a.labels, b.labels)
    c = kmeans_rows(X + 7.5, 3, restarts=5, seed=11)
    np.testing.assert_array_equal(a.labels, c.labels)
    assert ari(a.labels, [0] * 10 + [1] * 10 + [2] * 10) == 1.0


def test_kmeans_labels_first_appearance(rng):
    X = np.array([[5.0], [5.1], [0.0], [0.1], [9.0]])
    assert kmeans_rows(X, 3).labels.tolist() == [0, 0, 1, 1, 2]


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(3, 12), st.integers(1, 3)), elements=st.floats(-5, 5)),
       st.integers(1, 3), st.integers(0, 2 ** 16))
def test_kmeans_labels_valid(X, s, seed):
    if np.unique(X, axis=0).shape[0] < s:
        with pytest.raises(ValidationError):
            kmeans_rows(X, s, restarts=2, seed=seed)
        return
    res = kmeans_rows(X, s, restarts=2, seed=seed)
    assert set(res.labels.tolist()) == set(range(s))
    assert res.inertia >= 0


def test_distance_matrix_examples():
    assert distance_matrix(np.array([[1.0, 2.0], [1.0, 2.0]])).S.tolist() == [[0, 0], [0, 0]]
    d = distance_matrix(np.array([[0.0, 0.0], [3.0, 4.0]]))
    assert d.Z == 5.0 and d.S[0, 1] == 1.0


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 9), st.integers(1, 4)), elements=st.floats(-3, 3)))
def test_distance_matrix_invariants(U):
    S = distance_matrix(U).S
    assert np.array_equal(S, S.T)
    assert (np.diag(S) == 0).all()
    assert S.min() >= 0 and S.max() <= 1 + 1e-15
    if np.ptp(U, axis=0).max() > 0:
        assert S.max() == pytest.approx(1.0)


def test_coordinates_exclude_psi1():
    U = np.array([[0.5, 0.6, 0.1], [0.5, -0.4, 0.2], [0.5, 0.1, -0.9]])
    emb = EmbeddingMatrix(U, np.array([1.0, 0.8, 0.5]))
    np.testing.assert_array_equal(snapshot_coordinates(emb), U[:, 1:])
    np.testing.assert_allclose(snapshot_coordinates(emb, weighted=True), U[:, 1:] * [0.8, 0.5])
    with pytest.raises(ValidationError):
        snapshot_coordinates(EmbeddingMatrix(U[:, :1], np.array([1.0])))


def test_coordinates_two_clusters_for_blocks():
    emb = spectral_embedding(block_P(across=1e-3), 2)
    x = snapshot_coordinates(emb)[:, 0]
    gap = abs(x[:2].mean() - x[2:].mean())
    assert gap > 10 * max(np.ptp(x[:2]), np.ptp(x[2:]), 1e-12)


def test_coordinates_identical_snapshots_collapse():
    # every non-constant mode is degenerate, so psi_2 itself is arbitrary; its
    # eigenvalue-weighted coordinate is what collapses
    K = np.ones((5, 5)) - np.eye(5)
    Pt = temporal_transition(build_temporal_generator(K), 100.0)
    coords = snapshot_coordinates(spectral_embedding(Pt, 2), weighted=True)
    assert np.ptp(coords) <= 1e-8
