"""Clustering agreement scores, silhouette and the PCA snapshot baseline."""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray
    row_sums: np.ndarray
    col_sums: np.ndarray
    n: int


def _labels(x) -> np.ndarray:
    a = np.asarray(x).reshape(-1)
    if a.size == 0:
        raise ValidationError("labelings must be non-empty")
    return a


def contingency_table(a, b) -> ContingencyTable:
    a, b = _labels(a), _labels(b)
    if a.shape != b.shape:
        raise ValidationError(f"labelings differ in length: {a.size} vs {b.size}")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    counts = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(counts, (ai, bi), 1)
    return ContingencyTable(counts, counts.sum(axis=1), counts.sum(axis=0), int(a.size))


def ari(a, b) -> float:
    """Adjusted Rand index (Hubert-Arabie) from pair counts.

    Two identical trivial partitions (all-same or all-singleton) score 1.
    """
    t = contingency_table(a, b)
    if t.n < 2:
        raise ValidationError("ARI needs at least two elements")
    index = sum(comb(int(x), 2) for x in t.counts.ravel())
    sa = sum(comb(int(x), 2) for x in t.row_sums)
    sb = sum(comb(int(x), 2) for x in t.col_sums)
    total = comb(t.n, 2)
    expected = sa * sb / total
    max_index = (sa + sb) / 2
    if max_index == expected:
        return 1.0
    return float((index - expected) / (max_index - expected))


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def nmi(a, b) -> float:
    """Mutual information normalized by the arithmetic mean of the entropies."""
    t = contingency_table(a, b)
    ha, hb = _entropy(t.row_sums, t.n), _entropy(t.col_sums, t.n)
    if ha == 0 and hb == 0:
        return 1.0
    nz = t.counts > 0
    pij = t.counts[nz] / t.n
    outer = np.outer(t.row_sums, t.col_sums)[nz] / (t.n * t.n)
    mi = float((pij * np.log(pij / outer)).sum())
    return float(min(max(mi / ((ha + hb) / 2), 0.0), 1.0))


def silhouette(points, labels) -> float:
    """Mean silhouette ``(b - a) / max(a, b)`` with Euclidean distances.

    Points in singleton clusters, and points with ``a == b == 0``, score 0.
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    lab = _labels(labels)
    if lab.size != X.shape[0]:
        raise ValidationError("points and labels differ in length")
    if X.shape[0] < 3:
        raise ValidationError("silhouette needs at least three points")
    classes, inv = np.unique(lab, return_inverse=True)
    if classes.size < 2:
        raise ValidationError("silhouette needs at least two clusters")
    D = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2))
    sizes = np.bincount(inv)
    # per-point mean distance to every cluster
    sums = np.zeros((X.shape[0], classes.size))
    for c in range(classes.size):
        sums[:, c] = D[:, inv == c].sum(axis=1)
    own = sizes[inv]
    a = sums[np.arange(len(inv)), inv] / np.maximum(own - 1, 1)
    means = sums / sizes[None, :]
    means[np.arange(len(inv)), inv] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(denom > 0, (b - a) / denom, 0.0)
    s[own == 1] = 0.0
    return float(s.mean())


def pca_embed(matrices: Sequence[np.ndarray], components: int = 2) -> np.ndarray:
    """Project flattened snapshot matrices onto their top principal directions.

    Directions beyond the rank of the centered data yield zero coordinates.
    """
    X = np.stack([np.asarray(m, dtype=np.float64).ravel() for m in matrices])
    if components < 1 or components > X.shape[0]:
        raise ValidationError(f"components must lie in [1, {X.shape[0]}], got {components}")
    Xc = X - X.mean(axis=0, keepdims=True)
    U, S, _ = np.linalg.svd(Xc, full_matrices=False)
    out = np.zeros((X.shape[0], components))
    k = min(components, S.size)
    tol = S.max() * max(X.shape) * np.finfo(float).eps if S.size else 0.0
    keep = S[:k] > tol
    out[:, :k] = U[:, :k] * S[:k] * keep
    return out
