"""Spectral embedding of snapshots and phase assignment by k-means."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalError, ValidationError
from .temporal import MAX_GAP_SEARCH, TemporalTransitionMatrix

KMEANS_TOL = 1e-9
KMEANS_MAX_ITER = 300


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Columns are dominant right eigenvectors of ``P_temp`` (``psi_1`` first)."""

    U: np.ndarray
    eigenvalues: np.ndarray

    @property
    def s(self) -> int:
        return self.U.shape[1]


@dataclass(frozen=True)
class PhaseLabels:
    labels: np.ndarray
    inertia: float


@dataclass(frozen=True)
class PhaseDistanceMatrix:
    S: np.ndarray
    Z: float


def _fix_signs(V: np.ndarray) -> np.ndarray:
    for j in range(V.shape[1]):
        col = V[:, j]
        k = int(np.argmax(np.abs(col)))
        if col[k] < 0:
            V[:, j] = -col
    return V


def spectral_embedding(Pt: TemporalTransitionMatrix, s: int) -> EmbeddingMatrix:
    """The ``s`` dominant right eigenvectors of ``P_temp``.

    When the transition matrix carries its similarity degrees the eigenproblem
    is solved on the symmetric form ``D P D^-1`` and back-transformed with
    ``D^-1``. Each column is scaled to unit length and its largest-magnitude
    entry made positive.
    """
    P = np.asarray(Pt.P, dtype=np.float64)
    m = P.shape[0]
    if not 1 <= s <= m:
        raise ValidationError(f"number of phases s must lie in [1, {m}], got {s}")
    if not np.isfinite(P).all():
        raise NumericalError("temporal transition matrix has non-finite entries")
    if Pt.degrees is not None:
        d = np.asarray(Pt.degrees, dtype=np.float64)
        S = d[:, None] * P / d[None, :]
        vals, vecs = scipy.linalg.eigh(0.5 * (S + S.T))
        order = np.argsort(vals, kind="stable")[::-1][:s]
        vals, vecs = vals[order], vecs[:, order] / d[:, None]
    else:
        vals, vecs = scipy.linalg.eig(P)
        order = np.argsort(-vals.real, kind="stable")[:s]
        vals, vecs = vals[order].real, vecs[:, order].real
    vecs = vecs / np.linalg.norm(vecs, axis=0, keepdims=True)
    return EmbeddingMatrix(_fix_signs(vecs), vals)


def detect_num_phases(eigs) -> int:
    """Number of dominant eigenvalues: the 1-based ``i`` in
    ``[1, min(M-1, 10)]`` with the largest drop ``eig[i] - eig[i+1]``."""
    e = np.sort(np.asarray(eigs, dtype=np.float64))[::-1]
    if e.size < 2:
        raise ValidationError("need at least two eigenvalues")
    hi = min(e.size - 1, MAX_GAP_SEARCH)
    gaps = e[:hi] - e[1:hi + 1]
    return 1 + int(np.argmax(gaps))


def _as_array(U) -> np.ndarray:
    return np.asarray(getattr(U, "U", U), dtype=np.float64)


def _kmeans_pp(X: np.ndarray, s: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, s):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers.append(X[idx])
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def _lloyd(X: np.ndarray, C: np.ndarray) -> tuple[np.ndarray, float]:
    s = C.shape[0]
    for _ in range(KMEANS_MAX_ITER):
        dist = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(dist, axis=1)
        newC = C.copy()
        for j in range(s):
            members = labels == j
            if members.any():
                newC[j] = X[members].mean(axis=0)
            else:
                # re-seed an empty cluster at the point worst served by its center
                far = int(np.argmax(dist[np.arange(len(X)), labels]))
                newC[j] = X[far]
        shift = np.sqrt(((newC - C) ** 2).sum(axis=1)).max()
        C = newC
        if shift < KMEANS_TOL:
            break
    dist = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(dist, axis=1)
    inertia = float(dist[np.arange(len(X)), labels].sum())
    return labels, inertia


def _canonical(labels: np.ndarray) -> np.ndarray:
    mapping: dict[int, int] = {}
    out = np.empty_like(labels)
    for i, lab in enumerate(labels.tolist()):
        out[i] = mapping.setdefault(lab, len(mapping))
    return out


def kmeans_rows(U, s: int, restarts: int = 10, seed: int = 0) -> PhaseLabels:
    """k-means (Lloyd, k-means++ seeding) on the rows of ``U``.

    Restart ``r`` draws from its own stream spawned from ``seed``; the lowest
    inertia wins, ties to the earliest restart. Labels are renumbered in
    order of first appearance.

    Raises
    ------
    ValidationError
        If ``s`` exceeds the number of distinct rows.
    """
    X = _as_array(U)
    if X.ndim == 1:
        X = X[:, None]
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")
    if s < 1 or s > X.shape[0]:
        raise ValidationError(f"s must lie in [1, {X.shape[0]}], got {s}")
    distinct = np.unique(X, axis=0).shape[0]
    if s > distinct:
        raise ValidationError(f"cannot form {s} clusters from {distinct} distinct rows")
    best = None
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        labels, inertia = _lloyd(X, _kmeans_pp(X, s, rng))
        if best is None or inertia < best[1]:
            best = (labels, inertia)
    labels, inertia = best
    return PhaseLabels(_canonical(labels), inertia)


def distance_matrix(U) -> PhaseDistanceMatrix:
    """Euclidean distances between rows of ``U`` divided by the largest one
    (scale 1 when all rows coincide)."""
    X = _as_array(U)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] < 2:
        raise ValidationError("need at least two rows")
    diff = X[:, None, :] - X[None, :, :]
    D = np.sqrt((diff ** 2).sum(axis=2))
    Z = float(D.max())
    if Z <= 0:
        Z = 1.0
    S = D / Z
    np.fill_diagonal(S, 0.0)
    return PhaseDistanceMatrix(S, Z)


def snapshot_coordinates(U: EmbeddingMatrix, weighted: bool = False) -> np.ndarray:
    """Low-dimensional snapshot coordinates ``(psi_2, ..., psi_s)``.

    With ``weighted=True`` each column is multiplied by its eigenvalue, as in
    a diffusion map.
    """
    if U.s < 2:
        raise ValidationError("coordinates need s >= 2 (psi_1 is constant)")
    coords = U.U[:, 1:].copy()
    if weighted:
        coords *= U.eigenvalues[1:][None, :]
    return coords
