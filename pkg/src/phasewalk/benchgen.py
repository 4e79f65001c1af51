"""Agent-based temporal network benchmark.

``N`` agents follow overdamped Langevin dynamics in a piecewise-constant,
time-dependent 2-D potential

    U_t(x) = kappa * |x|**2 / 2 - sum_i a_i * exp(-|x - c_i|**2 / (2 s_i**2)),

integrated with Euler-Maruyama. Every ``r`` steps the agent positions become
a snapshot: each pair is linked with probability ``f(distance)``, where ``f``
is a shifted arctan step. Changing the wells of ``U_t`` re-arranges agents and
with them the community structure, so the potential's phases provide ground
truth phase labels.

All randomness derives from one integer seed through independent streams
(initial positions, per-step noise, per-snapshot edge draws), so a scenario
is a pure function of its seed.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import NumericalError, ValidationError
from .network import SnapshotGraph, TemporalNetwork

_STREAM_INIT = 0
_STREAM_NOISE = 1
_STREAM_EDGES = 2


@dataclass(frozen=True)
class Well:
    center: tuple[float, float]
    depth: float
    width: float

    def __post_init__(self):
        if self.depth <= 0 or self.width <= 0:
            raise ValidationError("well depth and width must be positive")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))


@dataclass(frozen=True)
class PotentialPhase:
    start_time: float
    wells: tuple[Well, ...]


@dataclass(frozen=True)
class PotentialSpec:
    phases: tuple[PotentialPhase, ...]
    confinement: float = 0.0

    def __post_init__(self):
        phases = tuple(self.phases)
        object.__setattr__(self, "phases", phases)
        if not phases:
            raise ValidationError("potential needs at least one phase")
        if phases[0].start_time != 0:
            raise ValidationError("first potential phase must start at t = 0")
        starts = [p.start_time for p in phases]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValidationError("phase start times must be strictly increasing")
        if any(len(p.wells) == 0 for p in phases):
            raise ValidationError("every potential phase needs at least one well")
        if self.confinement < 0:
            raise ValidationError("confinement must be >= 0")

    def phase_index(self, t: float) -> int:
        """Index of the phase active at time ``t`` (last start <= t)."""
        k = 0
        for i, p in enumerate(self.phases):
            if p.start_time <= t:
                k = i
        return k


@dataclass(frozen=True)
class SimulationConfig:
    N: int
    T: float
    h: float
    r: int
    burn_in: int
    beta: float
    seed: int = 0

    def __post_init__(self):
        if self.N < 2:
            raise ValidationError("need at least two agents")
        if self.h <= 0 or self.beta <= 0 or self.T <= 0:
            raise ValidationError("T, h and beta must be positive")
        if self.r < 1 or self.burn_in < 0:
            raise ValidationError("r must be >= 1 and burn_in >= 0")
        if self.num_frames < 2:
            raise ValidationError("configuration yields fewer than two snapshots")

    @property
    def num_steps(self) -> int:
        return int(round(self.T / self.h))

    @property
    def num_frames(self) -> int:
        return (self.num_steps - self.burn_in) // self.r + 1 if self.num_steps >= self.burn_in else 0

    def frame_steps(self) -> np.ndarray:
        return self.burn_in + self.r * np.arange(self.num_frames)


@dataclass(frozen=True)
class EdgeModel:
    """Edge probability ``f(x) = 1 - xi (1 - nu (1/2 - arctan(theta x - omega) / pi))``.

    ``1 - xi`` is the long-range (between-community) density; ``nu`` scales
    the short-range excess; ``omega / theta`` sets the distance threshold.
    """

    xi: float
    nu: float
    theta: float
    omega: float

    def __post_init__(self):
        if not self.theta > 0:
            raise ValidationError("edge model needs theta > 0")
        if not 0 <= self.xi <= 1:
            raise ValidationError("edge model needs 0 <= xi <= 1 so that f stays in [0, 1]")
        if not 0 <= self.nu <= 1:
            raise ValidationError("edge model needs 0 <= nu <= 1 so that f stays in [0, 1]")


@dataclass(frozen=True)
class BenchmarkScenario:
    name: str
    potential: PotentialSpec
    sim: SimulationConfig
    edges: EdgeModel
    weighted: bool = False
    ground_truth: tuple[int, ...] = field(default=())

    def __post_init__(self):
        gt = tuple(self.ground_truth) or tuple(frame_phases(self.potential, self.sim))
        if len(gt) != self.sim.num_frames:
            raise ValidationError("ground truth length differs from the number of snapshots")
        object.__setattr__(self, "ground_truth", gt)

    def with_seed(self, seed: int) -> "BenchmarkScenario":
        return replace(self, sim=replace(self.sim, seed=int(seed)))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "potential": {
                "confinement": self.potential.confinement,
                "phases": [
                    {"start_time": p.start_time,
                     "wells": [{"center": list(w.center), "depth": w.depth, "width": w.width} for w in p.wells]}
                    for p in self.potential.phases
                ],
            },
            "simulation": asdict(self.sim),
            "edge_model": asdict(self.edges),
            "weighted": self.weighted,
            "num_snapshots": self.sim.num_frames,
            "ground_truth": list(self.ground_truth),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BenchmarkScenario":
        pot = data["potential"]
        potential = PotentialSpec(
            tuple(PotentialPhase(float(p["start_time"]),
                                 tuple(Well(tuple(w["center"]), w["depth"], w["width"]) for w in p["wells"]))
                  for p in pot["phases"]),
            float(pot.get("confinement", 0.0)))
        return cls(data["name"], potential, SimulationConfig(**data["simulation"]),
                   EdgeModel(**data["edge_model"]), bool(data.get("weighted", False)),
                   tuple(data.get("ground_truth", ())))


def frame_phases(potential: PotentialSpec, sim: SimulationConfig) -> list[int]:
    """Ground-truth phase per snapshot: the potential phase that drove the
    integration step ending at the snapshot."""
    out = []
    for n in sim.frame_steps():
        t = max(int(n) - 1, 0) * sim.h
        out.append(potential.phase_index(t))
    return out


def potential_gradient(spec: PotentialSpec, t: float, x, T: float | None = None) -> np.ndarray:
    """``grad U_t(x)`` for one point ``(2,)`` or a batch ``(n, 2)``."""
    if t < 0 or (T is not None and t > T) or not math.isfinite(t):
        raise ValidationError(f"time {t} outside the simulated interval")
    x = np.asarray(x, dtype=np.float64)
    g = spec.confinement * x
    for w in spec.phases[spec.phase_index(t)].wells:
        diff = x - np.asarray(w.center)
        r2 = (diff * diff).sum(axis=-1, keepdims=True)
        g = g + (w.depth / w.width ** 2) * diff * np.exp(-r2 / (2.0 * w.width ** 2))
    return g


def potential_value(spec: PotentialSpec, t: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    u = 0.5 * spec.confinement * (x * x).sum(axis=-1)
    for w in spec.phases[spec.phase_index(t)].wells:
        diff = x - np.asarray(w.center)
        u = u - w.depth * np.exp(-(diff * diff).sum(axis=-1) / (2.0 * w.width ** 2))
    return u


def euler_maruyama_step(x, t: float, spec: PotentialSpec, beta: float, h: float, noise) -> np.ndarray:
    """One step ``x - grad U_t(x) h + sqrt(2 h / beta) * noise``."""
    if h <= 0 or beta <= 0:
        raise ValidationError("step size and beta must be positive")
    with np.errstate(over="ignore", invalid="ignore"):
        x_new = np.asarray(x, dtype=np.float64) - potential_gradient(spec, t, x) * h \
            + math.sqrt(2.0 * h / beta) * np.asarray(noise, dtype=np.float64)
    if not np.isfinite(x_new).all():
        raise NumericalError(f"simulation diverged at t={t:.6g}; reduce the step size")
    return x_new


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *key])))


def initial_positions(scenario: BenchmarkScenario) -> np.ndarray:
    wells = scenario.potential.phases[0].wells
    rng = _rng(scenario.sim.seed, _STREAM_INIT)
    pick = rng.integers(len(wells), size=scenario.sim.N)
    centers = np.array([w.center for w in wells])[pick]
    widths = np.array([w.width for w in wells])[pick]
    return centers + widths[:, None] * rng.standard_normal((scenario.sim.N, 2))


def simulate_agents(scenario: BenchmarkScenario) -> np.ndarray:
    """Agent positions at every snapshot step, shape ``(frames, N, 2)``."""
    sim, pot = scenario.sim, scenario.potential
    x = initial_positions(scenario)
    steps = set(sim.frame_steps().tolist())
    frames = []
    if 0 in steps:
        frames.append(x.copy())
    for n in range(sim.num_steps):
        noise = _rng(sim.seed, _STREAM_NOISE, n).standard_normal((sim.N, 2))
        x = euler_maruyama_step(x, n * sim.h, pot, sim.beta, sim.h, noise)
        if n + 1 in steps:
            frames.append(x.copy())
    return np.stack(frames)


def edge_probability(model: EdgeModel, x):
    """Edge probability at distance ``x >= 0``."""
    x = np.asarray(x, dtype=np.float64)
    if (x < 0).any():
        raise ValidationError("distances must be non-negative")
    inner = 0.5 - np.arctan(model.theta * x - model.omega) / np.pi
    f = 1.0 - model.xi * (1.0 - model.nu * inner)
    f = np.clip(f, 0.0, 1.0)
    return float(f) if f.ndim == 0 else f


def sample_snapshot(frame, model: EdgeModel, rng: np.random.Generator, weighted: bool = False,
                    index: int = 0) -> SnapshotGraph:
    """Random proximity graph: pair ``(u, v)`` is linked with probability
    ``f(|x_u - x_v|)``; weight 1, or ``f`` itself in weighted mode."""
    X = np.asarray(frame, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise ValidationError("need at least two agents")
    iu, iv = np.triu_indices(n, k=1)
    dist = np.sqrt(((X[iu] - X[iv]) ** 2).sum(axis=1))
    p = np.atleast_1d(edge_probability(model, dist))
    keep = rng.random(p.size) < p
    w = p[keep] if weighted else None
    return SnapshotGraph.from_arrays(n, iu[keep], iv[keep], w, index=index)


def generate(scenario: BenchmarkScenario, frames: np.ndarray | None = None) -> tuple[TemporalNetwork, np.ndarray]:
    """Simulate the scenario and sample one snapshot per frame."""
    if frames is None:
        frames = simulate_agents(scenario)
    snaps = [
        sample_snapshot(fr, scenario.edges, _rng(scenario.sim.seed, _STREAM_EDGES, k), scenario.weighted, index=k)
        for k, fr in enumerate(frames)
    ]
    net = TemporalNetwork(tuple(snaps), scenario.sim.N, name=scenario.name, weighted=scenario.weighted,
                          ground_truth=scenario.ground_truth)
    return net, frames


def _phase(start: float, centers: Sequence[tuple[float, float]], depth: float, width: float) -> PotentialPhase:
    return PotentialPhase(start, tuple(Well(c, depth, width) for c in centers))


# Calibrated preset constants; see README for the calibration targets.
SPLIT_DEPTH = 16.0
SPLIT_WIDTH = 1.0
SPLIT_CONFINEMENT = 1.5
SPLIT_OFFSET = 1.5
SPLIT_EDGES = EdgeModel(xi=0.99, nu=0.9, theta=5.0, omega=4.0)

HIERARCHY_DEPTH = 16.0
HIERARCHY_WIDTH = 1.0
HIERARCHY_CONFINEMENT = 0.5
HIERARCHY_EDGES = EdgeModel(xi=0.99, nu=0.9, theta=5.0, omega=7.0)


def community_split(seed: int = 0) -> BenchmarkScenario:
    """120 agents, 15 snapshots; the right community splits after snapshot 7."""
    d, w = SPLIT_DEPTH, SPLIT_WIDTH
    potential = PotentialSpec((
        _phase(0.0, [(-2.0, 0.0), (2.0, 0.0)], d, w),
        _phase(4.0, [(-2.0, 0.0), (2.0, SPLIT_OFFSET), (2.0, -SPLIT_OFFSET)], d, w),
    ), SPLIT_CONFINEMENT)
    sim = SimulationConfig(N=120, T=7.5, h=0.05, r=10, burn_in=10, beta=0.45, seed=seed)
    return BenchmarkScenario("community-split", potential, sim, SPLIT_EDGES)


def community_hierarchy(seed: int = 0) -> BenchmarkScenario:
    """100 agents, 210 snapshots; the left community splits at t=32 into two
    nearby wells, the right one at t=68 into two distant wells."""
    d, w = HIERARCHY_DEPTH, HIERARCHY_WIDTH
    potential = PotentialSpec((
        _phase(0.0, [(-3.0, 0.0), (3.0, 0.0)], d, w),
        _phase(32.0, [(-3.0, 1.8), (-3.0, -1.8), (3.0, 0.0)], d, w),
        _phase(68.0, [(-3.0, 1.8), (-3.0, -1.8), (3.0, 3.0), (3.0, -3.0)], d, w),
    ), HIERARCHY_CONFINEMENT)
    sim = SimulationConfig(N=100, T=105.0, h=0.05, r=10, burn_in=10, beta=0.75, seed=seed)
    return BenchmarkScenario("community-hierarchy", potential, sim, HIERARCHY_EDGES)


PRESETS = {
    "community-split": community_split,
    "community-hierarchy": community_hierarchy,
}


def preset(name: str, seed: int = 0) -> BenchmarkScenario:
    try:
        return PRESETS[name](seed)
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
