import numpy as np
import pytest

from phasewalk.network import SnapshotGraph, TemporalNetwork


def random_graph(rng, n, p=0.6, weighted=True, connected=True, index=0):
    """Random simple graph; with ``connected=True`` a random spanning path is added."""
    edges = {}
    if connected:
        perm = rng.permutation(n)
        for a, b in zip(perm[:-1], perm[1:]):
            edges[(min(a, b), max(a, b))] = 1.0
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < p:
                edges[(a, b)] = 1.0
    if weighted:
        edges = {k: float(rng.uniform(0.5, 2.0)) for k in edges}
    return SnapshotGraph.from_edges(n, [(a, b, w) for (a, b), w in edges.items()], index=index)


def random_network(rng, n=6, m=4, p=0.5, weighted=True):
    return TemporalNetwork(tuple(random_graph(rng, n, p, weighted, index=k) for k in range(m)), n,
                           weighted=weighted)


def two_block_graph(n_per=6, p_in=1.0, bridges=1, split=False, index=0):
    """Two cliques joined by ``bridges`` edges; ``split=True`` cuts the second
    clique into two halves joined by one edge."""
    edges = set()
    blocks = [list(range(n_per)), list(range(n_per, 2 * n_per))]
    if split:
        h = n_per // 2
        blocks = [blocks[0], blocks[1][:h], blocks[1][h:]]
    for blk in blocks:
        for i, a in enumerate(blk):
            for b in blk[i + 1:]:
                edges.add((a, b))
    for k in range(bridges):
        edges.add((k, n_per + k))
    if split:
        edges.add((blocks[1][0], blocks[2][0]))
    return SnapshotGraph.from_edges(2 * n_per, sorted(edges), index=index)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def triangle():
    return SnapshotGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def single_edge():
    return SnapshotGraph.from_edges(2, [(0, 1, 1.0)])


def pytest_terminal_summary(terminalreporter):
    import test_acceptance
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
