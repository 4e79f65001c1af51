"""Temporal network data model, dataset I/O and basic graph queries.

A temporal network is an ordered sequence of weighted, undirected snapshots
over a fixed node set ``0 .. num_nodes - 1``. Edges are stored once per
unordered pair with ``u < v`` and a strictly positive weight.

Dataset directory layout::

    <dir>/manifest.json          {name, num_nodes, num_snapshots, weighted, ground_truth?}
    <dir>/snapshots/00000.edges  one edge per line: ``u v [w]``
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc

from .errors import DatasetError, ValidationError

MANIFEST = "manifest.json"
SNAPSHOT_DIR = "snapshots"


# Phase detection compares snapshots, so datasets need at least two. Single
# snapshot networks are still representable (e.g. a full-length aggregation).
MIN_SNAPSHOTS = 2


def snapshot_filename(index: int) -> str:
    return f"{index:05d}.edges"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SnapshotGraph:
    """One static, undirected, weighted snapshot.

    Parameters
    ----------
    num_nodes : int
        Size of the (shared) node set.
    u, v : ndarray of int
        Edge endpoints with ``u < v`` elementwise, sorted lexicographically.
    w : ndarray of float
        Strictly positive edge weights.
    index : int
        Position of the snapshot in its temporal network.
    """

    num_nodes: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    index: int = 0

    @classmethod
    def from_edges(cls, num_nodes: int, edges: Iterable[Sequence[float]], index: int = 0) -> "SnapshotGraph":
        """Build a snapshot from ``(u, v)`` or ``(u, v, w)`` tuples.

        Endpoints are canonicalized to ``u < v``; zero weights are dropped.
        Self-loops, out-of-range ids, negative or non-finite weights and
        duplicate pairs raise :class:`DatasetError`.
        """
        us, vs, ws = [], [], []
        for e in edges:
            if len(e) == 2:
                a, b, c = e[0], e[1], 1.0
            elif len(e) == 3:
                a, b, c = e
            else:
                raise DatasetError(f"edge must have 2 or 3 fields, got {tuple(e)!r}")
            us.append(a)
            vs.append(b)
            ws.append(c)
        return cls.from_arrays(num_nodes, us, vs, ws, index=index)

    @classmethod
    def from_arrays(cls, num_nodes: int, u, v, w=None, index: int = 0) -> "SnapshotGraph":
        num_nodes = int(num_nodes)
        if num_nodes < 1:
            raise DatasetError(f"num_nodes must be positive, got {num_nodes}")
        u = np.asarray(u, dtype=np.int64).reshape(-1)
        v = np.asarray(v, dtype=np.int64).reshape(-1)
        w = np.ones(u.shape, dtype=np.float64) if w is None else np.asarray(w, dtype=np.float64).reshape(-1)
        if not (u.shape == v.shape == w.shape):
            raise DatasetError("edge arrays must have equal length")
        if u.size:
            if (u == v).any():
                k = int(np.flatnonzero(u == v)[0])
                raise DatasetError(f"snapshot {index}: self-loop on node {int(u[k])}")
            lo, hi = np.minimum(u, v), np.maximum(u, v)
            if lo.min() < 0 or hi.max() >= num_nodes:
                raise DatasetError(f"snapshot {index}: node id out of range [0, {num_nodes})")
            if not np.isfinite(w).all():
                raise DatasetError(f"snapshot {index}: non-finite edge weight")
            if (w < 0).any():
                raise DatasetError(f"snapshot {index}: negative edge weight")
            keep = w > 0
            lo, hi, w = lo[keep], hi[keep], w[keep]
            order = np.lexsort((hi, lo))
            lo, hi, w = lo[order], hi[order], w[order]
            dup = (lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])
            if dup.any():
                k = int(np.flatnonzero(dup)[0])
                raise DatasetError(f"snapshot {index}: duplicate edge ({int(lo[k])}, {int(hi[k])})")
            u, v = lo, hi
        return cls(num_nodes, _frozen(u), _frozen(v), _frozen(w), int(index))

    @property
    def num_edges(self) -> int:
        return int(self.u.size)

    def edges(self) -> list[tuple[int, int, float]]:
        return [(int(a), int(b), float(c)) for a, b, c in zip(self.u, self.v, self.w)]

    def sparse_adjacency(self) -> sp.csr_matrix:
        n = self.num_nodes
        a = sp.coo_matrix((self.w, (self.u, self.v)), shape=(n, n))
        return (a + a.T).tocsr()

    def adjacency(self) -> np.ndarray:
        """Dense symmetric adjacency matrix ``A`` with ``A[u, v] = w(u, v)``."""
        a = np.zeros((self.num_nodes, self.num_nodes))
        a[self.u, self.v] = self.w
        a[self.v, self.u] = self.w
        return a

    def with_index(self, index: int) -> "SnapshotGraph":
        return SnapshotGraph(self.num_nodes, self.u, self.v, self.w, int(index))


@dataclass(frozen=True)
class TemporalNetwork:
    """Ordered sequence of snapshots sharing one node set."""

    snapshots: tuple[SnapshotGraph, ...]
    num_nodes: int
    name: str = "network"
    weighted: bool = True
    ground_truth: tuple[int, ...] | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        snaps = tuple(self.snapshots)
        object.__setattr__(self, "snapshots", snaps)
        if len(snaps) < 1:
            raise DatasetError("a temporal network needs at least one snapshot")
        for k, g in enumerate(snaps):
            if g.num_nodes != self.num_nodes:
                raise DatasetError(
                    f"snapshot {k} has {g.num_nodes} nodes, network has {self.num_nodes}")
            if g.index != k:
                object.__setattr__(self, "snapshots", tuple(s.with_index(i) for i, s in enumerate(snaps)))
                break
        if self.ground_truth is not None:
            gt = tuple(int(x) for x in self.ground_truth)
            if len(gt) != len(snaps):
                raise DatasetError(
                    f"ground truth has {len(gt)} labels for {len(snaps)} snapshots")
            object.__setattr__(self, "ground_truth", gt)

    def __len__(self) -> int:
        return len(self.snapshots)

    def __iter__(self):
        return iter(self.snapshots)

    def __getitem__(self, k: int) -> SnapshotGraph:
        return self.snapshots[k]

    @property
    def num_snapshots(self) -> int:
        return len(self.snapshots)


def degree_vector(g: SnapshotGraph) -> np.ndarray:
    """Weighted degrees ``d(u) = sum_v A(u, v)``; zero for isolated nodes."""
    d = np.zeros(g.num_nodes)
    np.add.at(d, g.u, g.w)
    np.add.at(d, g.v, g.w)
    return d


def connected_components(g: SnapshotGraph) -> list[list[int]]:
    """Maximal connected node sets, each sorted, ordered by smallest member.

    Isolated nodes come back as singleton components.
    """
    n, labels = _cc(g.sparse_adjacency(), directed=False)
    comps: list[list[int]] = [[] for _ in range(n)]
    for node, lab in enumerate(labels):
        comps[lab].append(node)
    return sorted(comps, key=lambda c: c[0])


def aggregate_window(net: TemporalNetwork, window: int, stride: int) -> TemporalNetwork:
    """Sliding-window aggregation: union of ``window`` consecutive snapshots
    every ``stride`` steps, summing weights per edge.

    Output length is ``(M - window) // stride + 1``. Ground truth labels do
    not survive aggregation and are dropped.
    """
    m = len(net)
    if window < 1 or stride < 1:
        raise ValidationError("window and stride must be >= 1")
    if window > m:
        raise ValidationError(f"window {window} exceeds number of snapshots {m}")
    count = (m - window) // stride + 1
    n = net.num_nodes
    out = []
    for j in range(count):
        acc: dict[tuple[int, int], float] = {}
        for g in net.snapshots[j * stride: j * stride + window]:
            for a, b, c in zip(g.u.tolist(), g.v.tolist(), g.w.tolist()):
                acc[(a, b)] = acc.get((a, b), 0.0) + c
        keys = sorted(acc)
        out.append(SnapshotGraph.from_arrays(
            n, [k[0] for k in keys], [k[1] for k in keys], [acc[k] for k in keys], index=j))
    weighted = net.weighted or window > 1
    return TemporalNetwork(tuple(out), n, name=f"{net.name}-w{window}s{stride}", weighted=weighted)


def _format_weight(w: float) -> str:
    return repr(float(w))


def save_temporal_network(net: TemporalNetwork, path: str | os.PathLike) -> Path:
    """Write ``net`` as a dataset directory (see module docstring)."""
    root = Path(path)
    snap_dir = root / SNAPSHOT_DIR
    snap_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "name": net.name,
        "num_nodes": net.num_nodes,
        "num_snapshots": len(net),
        "weighted": bool(net.weighted),
    }
    if net.ground_truth is not None:
        manifest["ground_truth"] = list(net.ground_truth)
    (root / MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    for g in net.snapshots:
        if net.weighted:
            lines = [f"{a} {b} {_format_weight(c)}" for a, b, c in zip(g.u.tolist(), g.v.tolist(), g.w.tolist())]
        else:
            if not np.all(g.w == 1.0):
                raise ValidationError("unweighted network has edge weights other than 1")
            lines = [f"{a} {b}" for a, b in zip(g.u.tolist(), g.v.tolist())]
        text = "\n".join(lines) + ("\n" if lines else "")
        with open(snap_dir / snapshot_filename(g.index), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return root


def _parse_edge_file(path: Path, num_nodes: int, weighted: bool, index: int) -> SnapshotGraph:
    us, vs, ws = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if len(parts) == 2 and not weighted:
                w = 1.0
            elif len(parts) == 3:
                w = float(parts[2])
            else:
                raise DatasetError(f"{path}:{lineno}: expected 'u v w'"
                                   + ("" if weighted else " or 'u v'"))
            try:
                us.append(int(parts[0]))
                vs.append(int(parts[1]))
            except ValueError:
                raise DatasetError(f"{path}:{lineno}: node ids must be integers") from None
            ws.append(w)
    return SnapshotGraph.from_arrays(num_nodes, us, vs, ws, index=index)


def load_temporal_network(path: str | os.PathLike) -> TemporalNetwork:
    """Load and validate a dataset directory.

    Raises
    ------
    DatasetError
        Missing manifest or snapshot file, node id out of range, self-loop,
        negative weight, duplicate edge, or inconsistent ground truth.
    """
    root = Path(path)
    mpath = root / MANIFEST
    if not mpath.is_file():
        raise DatasetError(f"missing {MANIFEST} in {root}")
    try:
        manifest = json.loads(mpath.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetError(f"malformed {mpath}: {exc}") from None
    for key in ("num_nodes", "num_snapshots"):
        if key not in manifest:
            raise DatasetError(f"{mpath} lacks required field '{key}'")
    n = int(manifest["num_nodes"])
    m = int(manifest["num_snapshots"])
    if m < MIN_SNAPSHOTS:
        raise DatasetError(f"a dataset needs at least {MIN_SNAPSHOTS} snapshots, got {m}")
    weighted = bool(manifest.get("weighted", True))
    snaps = []
    for k in range(m):
        f = root / SNAPSHOT_DIR / snapshot_filename(k)
        if not f.is_file():
            raise DatasetError(f"missing snapshot file {f}")
        snaps.append(_parse_edge_file(f, n, weighted, k))
    return TemporalNetwork(
        tuple(snaps), n,
        name=str(manifest.get("name", root.name)),
        weighted=weighted,
        ground_truth=manifest.get("ground_truth"),
    )
