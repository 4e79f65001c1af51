"""End-to-end phase detection (LNE and IMC) and result emission.

LNE encodes each snapshot by its spatial transition matrix ``exp(L tau)``;
IMC encodes it by the walk's invariant measure. Both then build the Gaussian
similarity network over snapshots, run the temporal walk for ``tau_temp`` and
cluster the dominant eigenvectors of ``P_temp`` with k-means.
"""
from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .clustering import (EmbeddingMatrix, PhaseDistanceMatrix, PhaseLabels, detect_num_phases, distance_matrix,
                         kmeans_rows, snapshot_coordinates, spectral_embedding)
from .errors import NumericalError, PhaseWalkError, ValidationError
from .network import TemporalNetwork, degree_vector
from .similarity import (MEASURE, TRANSITION, SimilarityMatrix, SnapshotEncoding, pairwise_distances,
                         select_bandwidth, similarity_from_distances)
from .spatial import gap_index, invariant_measure, transition_matrices
from .temporal import (build_temporal_generator, select_tau_temp, temporal_spectrum, temporal_transition,
                       transition_eigenvalues)

log = logging.getLogger(__name__)

DEFAULT_TAU_RATIO = 5.0


@dataclass(frozen=True)
class RunConfig:
    """Pipeline parameters; ``None`` means resolve automatically."""

    method: str = "lne"
    tau: float | None = None
    sigma: float | None = None
    tau_temp: float | None = None
    phases: int | None = None
    gap_choice: int | None = None
    seed: int = 0
    threads: int | None = 1
    ratio: float = DEFAULT_TAU_RATIO
    restarts: int = 10
    backend: str = "pade"
    weighted_embedding: bool = False

    def __post_init__(self):
        if self.method not in ("lne", "imc"):
            raise ValidationError(f"method must be 'lne' or 'imc', got {self.method!r}")
        for name in ("tau", "sigma", "tau_temp"):
            v = getattr(self, name)
            if v is not None and not (np.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be positive, got {v}")
        if self.phases is not None and self.phases < 1:
            raise ValidationError("phases must be >= 1")
        if self.ratio <= 0:
            raise ValidationError("ratio must be positive")
        if self.restarts < 1:
            raise ValidationError("restarts must be >= 1")


@dataclass
class PhaseResult:
    config: RunConfig
    labels: PhaseLabels
    embedding: EmbeddingMatrix
    distance: PhaseDistanceMatrix
    similarity: SimilarityMatrix
    temporal_eigenvalues: np.ndarray
    transition_eigenvalues: np.ndarray
    gap_index: int | None
    timings: dict = field(default_factory=dict)

    @property
    def s(self) -> int:
        return self.embedding.s

    def coordinates(self) -> np.ndarray:
        if self.s < 2:
            return np.zeros((self.embedding.U.shape[0], 0))
        return snapshot_coordinates(self.embedding, self.config.weighted_embedding)


class StageError(PhaseWalkError):
    """Wraps a failure with the pipeline stage that raised it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


def mean_degree(net: TemporalNetwork) -> float:
    """Mean over snapshots of the mean weighted degree."""
    return float(np.mean([degree_vector(g).mean() for g in net.snapshots]))


def auto_tau(net: TemporalNetwork, ratio: float = DEFAULT_TAU_RATIO) -> float:
    tau = ratio * mean_degree(net)
    if tau <= 0:
        raise ValidationError("network has no edges; cannot derive tau")
    return tau


def encode(net: TemporalNetwork, method: str, tau: float | None = None, threads: int | None = 1,
           backend: str = "pade") -> list[SnapshotEncoding]:
    if method == "lne":
        mats = transition_matrices(net.snapshots, tau, threads or 1, backend)
        return [SnapshotEncoding(TRANSITION, P.P, P.index) for P in mats]
    return [SnapshotEncoding(MEASURE, invariant_measure(g).mu, g.index) for g in net.snapshots]


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (NumericalError, ValidationError) as exc:
        raise StageError(name, exc) from exc


def _detect(net: TemporalNetwork, config: RunConfig) -> PhaseResult:
    if len(net) < 2:
        raise ValidationError(f"phase detection needs at least 2 snapshots, got {len(net)}")
    timings = {}
    t0 = time.perf_counter()
    tau = config.tau
    if config.method == "lne" and tau is None:
        tau = _stage("tau", auto_tau, net, config.ratio)
    encodings = _stage("encode", encode, net, config.method, tau, config.threads, config.backend)
    D = _stage("distances", pairwise_distances, encodings, config.threads or 1)
    timings["encode"] = time.perf_counter() - t0

    sigma = config.sigma
    if sigma is None:
        sigma = _stage("sigma", select_bandwidth, distances=D)
    K = _stage("similarity", similarity_from_distances, D, sigma)
    Lt = _stage("temporal-generator", build_temporal_generator, K)
    spec = _stage("temporal-spectrum", temporal_spectrum, Lt)

    gap = None
    tau_temp = config.tau_temp
    if tau_temp is None:
        tau_temp = _stage("tau_temp", select_tau_temp, spec, config.gap_choice)
        gap = config.gap_choice or gap_index(spec.eigenvalues, 2, min(len(net) - 1, 10))
    Pt = _stage("temporal-transition", temporal_transition, Lt, tau_temp)
    peigs = transition_eigenvalues(Pt)

    s = config.phases
    if s is None:
        s = _stage("phases", detect_num_phases, peigs)
    emb = _stage("embedding", spectral_embedding, Pt, s)
    labels = _stage("kmeans", kmeans_rows, emb, s, config.restarts, config.seed)
    S = distance_matrix(emb)
    timings["total"] = time.perf_counter() - t0

    resolved = replace(config, tau=tau if config.method == "lne" else None, sigma=float(sigma),
                       tau_temp=float(tau_temp), phases=int(s))
    return PhaseResult(resolved, labels, emb, S, K, spec.eigenvalues, peigs, gap, timings)


def run_lne(net: TemporalNetwork, config: RunConfig | None = None, **overrides) -> PhaseResult:
    """Phase detection with transition-matrix encodings."""
    config = replace(config or RunConfig(), method="lne", **overrides)
    return _detect(net, config)


def run_imc(net: TemporalNetwork, config: RunConfig | None = None, **overrides) -> PhaseResult:
    """Phase detection with invariant-measure encodings (no ``tau``)."""
    config = replace(config or RunConfig(), method="imc", **overrides)
    return _detect(net, config)


def detect(net: TemporalNetwork, config: RunConfig) -> PhaseResult:
    return run_lne(net, config) if config.method == "lne" else run_imc(net, config)


def resolve_auto_parameters(config: RunConfig, net: TemporalNetwork) -> RunConfig:
    """Fill every automatic field (``tau``, ``sigma``, ``tau_temp``, ``phases``).

    Explicit values are never overridden.
    """
    return detect(net, config).config


# --- result emission ---------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def write_csv(path: Path, M: np.ndarray, header: list[str] | None = None) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    lines = [",".join(header)] if header else []
    lines += [",".join(_fmt(v) for v in row) for row in M]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_result(result: PhaseResult, out: str | os.PathLike) -> Path:
    """Emit ``labels.json``, ``embedding.csv``, ``distance_matrix.csv``,
    ``similarity_matrix.csv``, ``temporal_spectrum.json`` and ``run.json``."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    write_json(out / "labels.json", {
        "s": result.s,
        "tau": cfg.tau,
        "sigma": cfg.sigma,
        "tau_temp": cfg.tau_temp,
        "labels": [int(x) for x in result.labels.labels],
        "inertia": float(result.labels.inertia),
    })
    coords = result.coordinates()
    write_csv(out / "embedding.csv", coords if coords.size else np.zeros((len(result.labels.labels), 0)),
              header=[f"psi_{k}" for k in range(2, result.s + 1)] or None)
    write_csv(out / "distance_matrix.csv", result.distance.S)
    write_csv(out / "similarity_matrix.csv", result.similarity.K)
    write_json(out / "temporal_spectrum.json", {
        "temporal_generator_eigenvalues": [float(x) for x in result.temporal_eigenvalues],
        "transition_eigenvalues": [float(x) for x in result.transition_eigenvalues],
        "gap_index": result.gap_index,
        "tau_temp": cfg.tau_temp,
    })
    write_json(out / "run.json", {
        "config": asdict(cfg),
        "distance_scale": result.distance.Z,
    })
    return out
