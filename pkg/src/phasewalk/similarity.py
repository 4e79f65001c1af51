"""Gaussian-kernel similarity between snapshot encodings.

An encoding is either a spatial transition matrix (LNE) or an invariant
measure (IMC). Pairwise encoding distances are computed once and cached; the
similarity matrix for any bandwidth is derived from the cached distances.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NumericalError, ValidationError

TRANSITION = "transition-matrix"
MEASURE = "invariant-measure"
DEFAULT_GRID_SIZE = 32


@dataclass(frozen=True)
class SnapshotEncoding:
    kind: str
    payload: np.ndarray
    index: int = 0

    def __post_init__(self):
        if self.kind not in (TRANSITION, MEASURE):
            raise ValidationError(f"unknown encoding kind {self.kind!r}")
        p = np.asarray(self.payload, dtype=np.float64)
        if self.kind == TRANSITION and p.ndim != 2:
            raise ValidationError("transition-matrix encodings must be 2-D")
        if self.kind == MEASURE and p.ndim != 1:
            raise ValidationError("invariant-measure encodings must be 1-D")
        object.__setattr__(self, "payload", p)


@dataclass(frozen=True)
class SimilarityMatrix:
    K: np.ndarray
    sigma: float


def encoding_distance(a: SnapshotEncoding, b: SnapshotEncoding) -> float:
    """Frobenius (matrices) or Euclidean (vectors) norm of ``a - b``."""
    if a.kind != b.kind:
        raise ValidationError(f"cannot compare {a.kind} with {b.kind}")
    if a.payload.shape != b.payload.shape:
        raise ValidationError(f"encoding shapes differ: {a.payload.shape} vs {b.payload.shape}")
    return float(np.linalg.norm((a.payload - b.payload).ravel()))


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not np.isfinite(sigma) or sigma <= 0:
        raise ValidationError(f"bandwidth sigma must be positive, got {sigma}")
    return sigma


def kernel_from_distance(dist, sigma: float):
    sigma = _check_sigma(sigma)
    dist = np.asarray(dist, dtype=np.float64)
    return np.exp(-dist * dist / (2.0 * sigma * sigma))


def gaussian_kernel(a: SnapshotEncoding, b: SnapshotEncoding, sigma: float) -> float:
    """``exp(-||a - b||**2 / (2 sigma**2))``."""
    return float(kernel_from_distance(encoding_distance(a, b), sigma))


def _check_encodings(encodings: Sequence[SnapshotEncoding]) -> None:
    if len(encodings) < 2:
        raise ValidationError("need at least two snapshot encodings")
    kind, shape = encodings[0].kind, encodings[0].payload.shape
    for e in encodings[1:]:
        if e.kind != kind or e.payload.shape != shape:
            raise ValidationError("all encodings of a run must share kind and shape")


def pairwise_distances(encodings: Sequence[SnapshotEncoding], threads: int = 1) -> np.ndarray:
    """Symmetric ``M x M`` matrix of encoding distances.

    Exactly ``M(M-1)/2`` distances are evaluated; row blocks may run on a
    thread pool, each writing disjoint cells.
    """
    _check_encodings(encodings)
    m = len(encodings)
    flat = np.stack([e.payload.ravel() for e in encodings])
    D = np.zeros((m, m))

    def row(i):
        if i + 1 < m:
            diff = flat[i + 1:] - flat[i]
            D[i, i + 1:] = np.sqrt(np.einsum("ij,ij->i", diff, diff))

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(row, range(m)))
    else:
        for i in range(m):
            row(i)
    D = D + D.T
    if not np.isfinite(D).all():
        raise NumericalError("non-finite encoding distances")
    return D


def similarity_from_distances(D: np.ndarray, sigma: float) -> SimilarityMatrix:
    K = kernel_from_distance(D, sigma)
    np.fill_diagonal(K, 0.0)
    return SimilarityMatrix(K, float(sigma))


def build_similarity_matrix(encodings: Sequence[SnapshotEncoding], sigma: float,
                            threads: int = 1) -> SimilarityMatrix:
    """Gaussian-kernel snapshot similarity with the diagonal set to zero."""
    _check_sigma(sigma)
    return similarity_from_distances(pairwise_distances(encodings, threads), sigma)


def default_bandwidth_grid(D: np.ndarray, size: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    """Geometric grid between the 5th and 95th percentile of the off-diagonal
    distances in ``D``."""
    off = D[~np.eye(D.shape[0], dtype=bool)]
    off = off[off > 0]
    if off.size == 0:
        return np.array([1.0])
    lo, hi = np.percentile(off, [5, 95])
    if hi <= lo:
        return np.array([float(lo)])
    return np.geomspace(lo, hi, size)


def bandwidth_score(D: np.ndarray, sigma: float) -> float:
    """``var / mean`` of the off-diagonal similarities at bandwidth ``sigma``
    (``nan`` if they all vanish)."""
    K = kernel_from_distance(D, sigma)
    off = K[~np.eye(K.shape[0], dtype=bool)]
    mean = off.mean()
    if mean <= 0 or not np.isfinite(mean):
        return float("nan")
    return float(off.var() / mean)


def select_bandwidth(encodings: Sequence[SnapshotEncoding] | None = None, grid: Sequence[float] | None = None,
                     *, distances: np.ndarray | None = None) -> float:
    """Bandwidth from ``grid`` that maximizes the var/mean ratio of the
    off-diagonal similarity values.

    Ties resolve to the smaller bandwidth. Either ``encodings`` or a cached
    ``distances`` matrix must be given; without ``grid`` the default
    percentile grid is used.

    Raises
    ------
    NumericalError
        If every candidate bandwidth gives numerically zero similarities.
    """
    D = pairwise_distances(encodings) if distances is None else np.asarray(distances, dtype=np.float64)
    grid = default_bandwidth_grid(D) if grid is None else np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise ValidationError("bandwidth grid is empty")
    for s in grid:
        _check_sigma(s)
    order = np.argsort(grid, kind="stable")
    best, best_score = None, -np.inf
    for s in grid[order]:
        score = bandwidth_score(D, s)
        if np.isnan(score):
            continue
        if score > best_score:
            best, best_score = float(s), score
    if best is None:
        raise NumericalError("all candidate bandwidths give zero similarity; grid is far too small")
    return best
