"""Random walk across snapshots on the reduced similarity network."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalError, ValidationError
from .similarity import SimilarityMatrix
from .spatial import ZERO_EIG_TOL, SpectrumReport, _check_tau, gap_index, spectrum_report, tau_interval

MAX_GAP_SEARCH = 10


@dataclass(frozen=True)
class TemporalGenerator:
    L: np.ndarray
    degrees: np.ndarray

    @property
    def size(self) -> int:
        return self.L.shape[0]

    def stationary(self) -> np.ndarray:
        sq = self.degrees ** 2
        return sq / sq.sum()

    def symmetrized(self) -> np.ndarray:
        d = self.degrees
        S = d[:, None] * self.L / d[None, :]
        return 0.5 * (S + S.T)


@dataclass(frozen=True)
class TemporalTransitionMatrix:
    P: np.ndarray
    tau_temp: float
    degrees: np.ndarray | None = None


def build_temporal_generator(K: SimilarityMatrix | np.ndarray) -> TemporalGenerator:
    """Rate matrix over snapshots: ``-1/d`` on the diagonal and ``K / d**2``
    off it, where ``d`` are the similarity row sums.

    Raises
    ------
    NumericalError
        If a snapshot has zero similarity mass (bandwidth far too small).
    """
    K = np.asarray(getattr(K, "K", K), dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValidationError("similarity matrix must be square")
    K = K.copy()
    np.fill_diagonal(K, 0.0)
    d = K.sum(axis=1)
    if not np.isfinite(d).all():
        raise NumericalError("non-finite similarity values")
    if (d <= 0).any():
        bad = np.flatnonzero(d <= 0).tolist()
        raise NumericalError(f"snapshots {bad} have zero similarity to all others; increase sigma")
    L = K / (d[:, None] ** 2)
    L[np.diag_indices_from(L)] = -1.0 / d
    return TemporalGenerator(L, d)


def temporal_transition(Lt: TemporalGenerator, tau_temp: float) -> TemporalTransitionMatrix:
    """``exp(L_temp * tau_temp)``, evaluated through the symmetric form so the
    result is exactly reversible up to round-off."""
    tau_temp = _check_tau(tau_temp, "tau_temp")
    vals, vecs = scipy.linalg.eigh(Lt.symmetrized())
    d = Lt.degrees
    E = (vecs * np.exp(vals * tau_temp)) @ vecs.T
    P = E * d[None, :] / d[:, None]
    if not np.isfinite(P).all():
        raise NumericalError("temporal transition matrix has non-finite entries")
    return TemporalTransitionMatrix(P, tau_temp, d)


def temporal_spectrum(Lt: TemporalGenerator, m: int | None = None) -> SpectrumReport:
    """Full (or leading ``m``) eigenvalues of ``L_temp``, non-increasing."""
    vals = np.sort(scipy.linalg.eigvalsh(Lt.symmetrized()))[::-1]
    if not np.isfinite(vals).all():
        raise NumericalError("non-finite temporal generator eigenvalues")
    return spectrum_report(vals, vals.size if m is None else m)


def select_tau_temp(spec: SpectrumReport, gap_choice: int | None = None) -> float:
    """Temporal exploration time from the spectral gap of ``L_temp``.

    The gap index ``k`` is ``gap_choice`` when given, otherwise the position
    of the largest difference ``eig[k] - eig[k+1]`` over
    ``2 <= k <= min(M-1, 10)``. Returns the geometric mean of
    ``1/|eig_{k+1}|`` and ``1/|eig_k|``.
    """
    e = np.asarray(spec.eigenvalues, dtype=np.float64)
    if e.size < 3:
        raise NumericalError("temporal spectrum too short to place a gap (need >= 3 snapshots)")
    if abs(e[1]) <= ZERO_EIG_TOL:
        raise NumericalError("degenerate temporal spectrum: reduced network is disconnected")
    if gap_choice is None:
        k = gap_index(e, lo=2, hi=min(e.size - 1, MAX_GAP_SEARCH))
    else:
        k = int(gap_choice)
    return tau_interval(e, k).estimate


def transition_eigenvalues(Pt: TemporalTransitionMatrix) -> np.ndarray:
    """Eigenvalues of ``P_temp``, non-increasing."""
    if Pt.degrees is not None:
        d = Pt.degrees
        S = d[:, None] * Pt.P / d[None, :]
        vals = scipy.linalg.eigvalsh(0.5 * (S + S.T))
    else:
        vals = np.real(scipy.linalg.eigvals(Pt.P))
    return np.sort(vals)[::-1]
