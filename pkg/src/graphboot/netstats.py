"""Network statistics computed directly on adjacency matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graphs import AdjacencyMatrix, is_connected, shortest_path_matrix

__all__ = [
    "NetworkStatistic",
    "StatisticError",
    "DisconnectedGraphError",
    "NoConnectedTriplesError",
    "triangle_density",
    "induced_subgraph_density",
    "global_clustering",
    "average_shortest_path",
    "average_degree",
    "edge_density",
    "STATISTICS",
]


class StatisticError(ValueError):
    """Statistic undefined for this input."""


class DisconnectedGraphError(StatisticError):
    """Statistic requires a connected graph."""


class NoConnectedTriplesError(StatisticError):
    """Clustering denominator is zero: the graph has no 2-paths."""


@dataclass(frozen=True)
class NetworkStatistic:
    """A named, permutation-invariant map from a graph to a real number."""

    name: str
    func: Callable[[AdjacencyMatrix], float]
    defined_on_disconnected: bool

    def __call__(self, a: AdjacencyMatrix) -> float:
        return self.func(a)


def _triangle_count(a: AdjacencyMatrix) -> int:
    m = a.matrix.astype(np.int64)
    return int(np.trace(m @ m @ m)) // 6


def triangle_density(a: AdjacencyMatrix) -> float:
    """Fraction of vertex triples that form a triangle."""
    if a.n < 3:
        raise StatisticError(f"triangle density needs n >= 3, got n={a.n}")
    return _triangle_count(a) / math.comb(a.n, 3)


def induced_subgraph_density(a: AdjacencyMatrix, r_adj: np.ndarray) -> float:
    """Fraction of m-subsets whose induced subgraph is isomorphic to R.

    Isomorphism testing is brute force over the m! relabelings of R,
    precomputed once; limited to patterns on at most 5 vertices.
    """
    import itertools

    r_adj = np.asarray(r_adj)
    m = r_adj.shape[0]
    if m > 5:
        raise ValueError(f"patterns limited to 5 vertices, got {m}")
    if a.n < m:
        raise StatisticError(f"need n >= {m} vertices, got {a.n}")
    ku, kl = np.triu_indices(m, 1)
    patterns = set()
    for tau in itertools.permutations(range(m)):
        perm = np.asarray(tau)
        patterns.add(r_adj[np.ix_(perm, perm)][ku, kl].astype(np.int8).tobytes())
    mat = a.matrix
    hits = 0
    for c in itertools.combinations(range(a.n), m):
        sub = mat[np.ix_(c, c)]
        if sub[ku, kl].tobytes() in patterns:
            hits += 1
    return hits / math.comb(a.n, m)


def global_clustering(a: AdjacencyMatrix) -> float:
    """3 * (number of triangles) / (number of connected triples).

    The denominator counts 2-paths: for each center vertex, the pairs of
    distinct neighbors, i.e. sum_i C(d_i, 2).
    """
    deg = a.degrees()
    wedges = int((deg * (deg - 1)).sum()) // 2
    if wedges == 0:
        raise NoConnectedTriplesError("graph has no 2-paths; clustering is undefined")
    return 3.0 * _triangle_count(a) / wedges


def average_shortest_path(a: AdjacencyMatrix) -> float:
    """Mean hop count over all vertex pairs; requires a connected graph."""
    if a.n < 2:
        raise StatisticError("average shortest path needs n >= 2")
    sp = shortest_path_matrix(a)
    iu, ju = np.triu_indices(a.n, 1)
    vals = sp[iu, ju]
    if np.isinf(vals).any():
        raise DisconnectedGraphError(
            "average shortest path is undefined on a disconnected graph; "
            "condition sampling on connectivity first"
        )
    return float(vals.mean())


def average_degree(a: AdjacencyMatrix) -> float:
    """Mean of degree / (n - 1) over vertices."""
    if a.n < 2:
        raise StatisticError("average degree needs n >= 2")
    return float(a.degrees().mean()) / (a.n - 1)


def edge_density(a: AdjacencyMatrix) -> float:
    """Fraction of vertex pairs joined by an edge."""
    if a.n < 2:
        raise StatisticError("edge density needs n >= 2")
    return a.num_edges() / math.comb(a.n, 2)


STATISTICS: dict[str, NetworkStatistic] = {
    s.name: s
    for s in [
        NetworkStatistic("triangle-density", triangle_density, True),
        NetworkStatistic("average-degree", average_degree, True),
        NetworkStatistic("global-clustering", global_clustering, True),
        NetworkStatistic("average-shortest-path", average_shortest_path, False),
        NetworkStatistic("edge-density", edge_density, True),
    ]
}
