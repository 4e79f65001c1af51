"""Continuous-time random walks on single snapshots.

The walk on a snapshot with adjacency ``A`` and degrees ``d`` has rate matrix

    L(u, u) = -1 / d(u),    L(u, v) = A(u, v) / d(u)**2   (u != v),

so the expected waiting time at ``u`` equals its degree. Isolated nodes get
an all-zero row. The walk is reversible with respect to ``mu(u) ~ d(u)**2``,
which makes ``D L D^-1`` (``D = diag(d)``) symmetric on every connected
component; all spectra are computed through that similarity transform.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc
from scipy.sparse.linalg import expm_multiply

from .errors import NumericalError, ValidationError
from .network import SnapshotGraph, degree_vector

ZERO_EIG_TOL = 1e-10


@dataclass(frozen=True)
class GeneratorMatrix:
    L: np.ndarray
    degrees: np.ndarray
    index: int = 0

    @property
    def size(self) -> int:
        return self.L.shape[0]


@dataclass(frozen=True)
class TransitionMatrix:
    P: np.ndarray
    tau: float
    index: int = 0


@dataclass(frozen=True)
class InvariantMeasure:
    mu: np.ndarray
    Z: float


@dataclass(frozen=True)
class SpectrumReport:
    """Leading generator eigenvalues, sorted non-increasing (``0`` first)."""

    eigenvalues: np.ndarray
    implied_timescales: np.ndarray
    gap_index: int

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "implied_timescales": [float(x) for x in self.implied_timescales],
            "gap_index": int(self.gap_index),
        }


class TauInterval(NamedTuple):
    lo: float
    hi: float
    estimate: float


def generator_from_weights(W: np.ndarray, index: int = 0) -> GeneratorMatrix:
    """Rate matrix for a dense symmetric weight matrix with zero diagonal."""
    W = np.asarray(W, dtype=np.float64)
    d = W.sum(axis=1)
    L = np.zeros_like(W)
    live = d > 0
    L[live] = W[live] / (d[live, None] ** 2)
    L[live, live] = 0.0
    idx = np.flatnonzero(live)
    L[idx, idx] = -1.0 / d[idx]
    return GeneratorMatrix(L, d, index)


def build_generator(g: SnapshotGraph) -> GeneratorMatrix:
    """Rate matrix of the degree-slowed continuous-time walk on ``g``."""
    return generator_from_weights(g.adjacency(), index=g.index)


def _check_tau(tau: float, name: str = "tau") -> float:
    tau = float(tau)
    if not np.isfinite(tau) or tau <= 0:
        raise ValidationError(f"{name} must be a positive finite number, got {tau}")
    return tau


def expm_generator(L: np.ndarray, tau: float, backend: str = "pade") -> np.ndarray:
    """``exp(L * tau)`` for a dense generator.

    ``backend="pade"`` is scaling-and-squaring with a Pade approximant and
    suits desk-scale matrices; ``backend="action"`` evaluates the action of
    the exponential on the identity from a sparse ``L`` and is meant for
    large, sparse snapshots.
    """
    if backend == "pade":
        P = scipy.linalg.expm(L * tau)
    elif backend == "action":
        n = L.shape[0]
        P = expm_multiply(sp.csr_matrix(L) * tau, np.eye(n))
        P = np.asarray(P)
    else:
        raise ValidationError(f"unknown matrix exponential backend {backend!r}")
    if not np.isfinite(P).all():
        raise NumericalError("matrix exponential produced non-finite entries")
    return P


def transition_matrix(L: GeneratorMatrix, tau: float, backend: str = "pade") -> TransitionMatrix:
    """Transition matrix ``P = exp(L tau)`` after spatial exploration time ``tau``.

    Rows of isolated nodes come out as identity rows.
    """
    tau = _check_tau(tau)
    return TransitionMatrix(expm_generator(L.L, tau, backend), tau, L.index)


def transition_matrices(graphs: Sequence[SnapshotGraph], tau: float, threads: int = 1,
                        backend: str = "pade") -> list[TransitionMatrix]:
    """Per-snapshot transition matrices, optionally on a thread pool.

    Output order always follows ``graphs``.
    """
    tau = _check_tau(tau)

    def one(g):
        return transition_matrix(build_generator(g), tau, backend)

    if threads is None or threads <= 1:
        return [one(g) for g in graphs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, graphs))


def invariant_measure_from_degrees(d: np.ndarray) -> InvariantMeasure:
    d = np.asarray(d, dtype=np.float64)
    sq = d * d
    Z = float(sq.sum())
    if Z <= 0:
        raise ValidationError("invariant measure undefined for a snapshot without edges")
    return InvariantMeasure(sq / Z, Z)


def invariant_measure(g: SnapshotGraph) -> InvariantMeasure:
    """Stationary distribution ``mu(u) = d(u)**2 / sum_v d(v)**2``."""
    return invariant_measure_from_degrees(degree_vector(g))


def _components_of(L: np.ndarray) -> list[np.ndarray]:
    off = L != 0
    np.fill_diagonal(off, False)
    n, labels = _cc(sp.csr_matrix(off), directed=False)
    return [np.flatnonzero(labels == k) for k in range(n)]


def symmetric_spectrum(L: np.ndarray, d: np.ndarray) -> np.ndarray:
    """All eigenvalues of a degree-reversible generator, non-increasing.

    Each connected component is symmetrized as ``D L D^-1`` and solved with a
    dense symmetric eigensolver; isolated nodes contribute a zero eigenvalue.
    """
    eigs = []
    for comp in _components_of(L):
        if comp.size == 1:
            eigs.append(np.zeros(1))
            continue
        dc = d[comp]
        sub = L[np.ix_(comp, comp)]
        S = dc[:, None] * sub / dc[None, :]
        S = 0.5 * (S + S.T)
        eigs.append(scipy.linalg.eigvalsh(S))
    out = np.sort(np.concatenate(eigs))[::-1]
    if not np.isfinite(out).all():
        raise NumericalError("non-finite generator eigenvalues")
    return out


def gap_index(eigenvalues: Sequence[float], lo: int = 1, hi: int | None = None) -> int:
    """1-based ``k`` maximizing ``eig[k-1] - eig[k]`` for ``lo <= k <= hi``.

    Ties go to the smaller ``k``.
    """
    e = np.asarray(eigenvalues, dtype=np.float64)
    if e.size < 2:
        raise ValidationError("need at least two eigenvalues to locate a gap")
    hi = e.size - 1 if hi is None else min(hi, e.size - 1)
    if lo > hi:
        raise ValidationError(f"empty gap search range [{lo}, {hi}]")
    gaps = e[lo - 1:hi] - e[lo:hi + 1]
    return lo + int(np.argmax(gaps))


def _timescales(eigs: np.ndarray) -> np.ndarray:
    tail = np.abs(eigs[1:])
    with np.errstate(divide="ignore"):
        return np.where(tail > ZERO_EIG_TOL, 1.0 / np.maximum(tail, 1e-300), np.inf)


def spectrum_report(eigs: np.ndarray, m: int) -> SpectrumReport:
    eigs = np.minimum(np.asarray(eigs[:m], dtype=np.float64), 0.0)
    gi = gap_index(eigs) if eigs.size >= 2 else 1
    return SpectrumReport(eigs, _timescales(eigs), gi)


def generator_spectrum(L: GeneratorMatrix, m: int = 10) -> SpectrumReport:
    """``m`` largest eigenvalues of ``L`` with implied timescales ``1/|eig|``.

    Tiny positive round-off is clipped to zero so every reported eigenvalue
    is ``<= 0``.
    """
    if m < 1 or m > L.size:
        raise ValidationError(f"m must lie in [1, {L.size}], got {m}")
    return spectrum_report(symmetric_spectrum(L.L, L.degrees), m)


def tau_interval(eigenvalues: Sequence[float], k: int) -> TauInterval:
    """Admissible exploration times ``(1/|eig_{k+1}|, 1/|eig_k|)`` for ``k``
    metastable sets, with their geometric mean as point estimate."""
    e = np.asarray(eigenvalues, dtype=np.float64)
    if k < 2 or k + 1 > e.size:
        raise ValidationError(f"gap index k={k} needs 2 <= k <= {e.size - 1}")
    lk, lk1 = abs(e[k - 1]), abs(e[k])
    if lk <= ZERO_EIG_TOL or lk1 <= ZERO_EIG_TOL:
        raise NumericalError(
            f"degenerate spectrum: eigenvalue {k if lk <= ZERO_EIG_TOL else k + 1} is zero "
            "(fewer decaying modes than requested)")
    lo, hi = 1.0 / lk1, 1.0 / lk
    return TauInterval(lo, hi, float(np.sqrt(lo * hi)))


def suggest_tau(spec: SpectrumReport, k: int) -> TauInterval:
    return tau_interval(spec.eigenvalues, k)


def intersect_intervals(intervals: Iterable[TauInterval]) -> tuple[float, float] | None:
    """Common part of several ``(lo, hi)`` intervals, ``None`` when disjoint."""
    lo, hi = -np.inf, np.inf
    for iv in intervals:
        lo, hi = max(lo, iv.lo), min(hi, iv.hi)
    return (float(lo), float(hi)) if lo < hi else None
