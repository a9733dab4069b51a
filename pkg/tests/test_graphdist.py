import itertools
import math

import numpy as np
import pytest

from graphboot.graphdist import (
    empirical_wasserstein,
    matching_distance_approx,
    matching_distance_exact,
)
from graphboot.graphs import AdjacencyMatrix
from graphboot.rng import SeededRng


def random_graph(n, p, gen):
    m = np.triu((gen.random((n, n)) < p).astype(int), 1)
    return AdjacencyMatrix(m + m.T)


def relabel(a, perm):
    return AdjacencyMatrix(a.matrix[np.ix_(perm, perm)])


def brute_distance(a1, a2):
    n = a1.n
    best = math.inf
    for perm in itertools.permutations(range(n)):
        p = np.asarray(perm)
        best = min(best, np.abs(a1.matrix.astype(int) - a2.matrix[np.ix_(p, p)]).sum())
    return best / 2 / math.comb(n, 2)


def test_exact_identical_graphs():
    a = AdjacencyMatrix.from_edges(4, [(0, 1), (1, 2)])
    assert matching_distance_exact(a, a).distance == 0.0


def test_exact_isomorphic_graphs():
    a1 = AdjacencyMatrix.from_edges(3, [(0, 1)])
    a2 = AdjacencyMatrix.from_edges(3, [(1, 2)])
    assert matching_distance_exact(a1, a2).distance == 0.0


def test_exact_triangle_vs_edge():
    k3 = AdjacencyMatrix.from_edges(3, [(0, 1), (1, 2), (2, 0)])
    e = AdjacencyMatrix.from_edges(3, [(0, 1)])
    result = matching_distance_exact(k3, e)
    assert result.distance == pytest.approx(2 / 3)
    assert result.exact


def test_exact_matches_brute_force():
    gen = SeededRng(0).generator()
    for _ in range(15):
        n = int(gen.integers(2, 7))
        a1 = random_graph(n, 0.5, gen)
        a2 = random_graph(n, 0.5, gen)
        result = matching_distance_exact(a1, a2)
        assert result.distance == pytest.approx(brute_distance(a1, a2), abs=1e-12)
        # reported permutation realizes the reported distance
        realized = np.abs(a1.matrix.astype(int)
                          - a2.matrix[np.ix_(result.permutation, result.permutation)]).sum()
        assert realized / 2 / math.comb(n, 2) == pytest.approx(result.distance)


def test_exact_size_limits():
    big = AdjacencyMatrix(np.zeros((10, 10)))
    with pytest.raises(ValueError):
        matching_distance_exact(big, big)
    a = AdjacencyMatrix(np.zeros((3, 3)))
    b = AdjacencyMatrix(np.zeros((4, 4)))
    with pytest.raises(ValueError):
        matching_distance_exact(a, b)


def test_exact_metric_axioms():
    gen = SeededRng(1).generator()
    for _ in range(30):
        n = int(gen.integers(3, 7))
        graphs = [random_graph(n, 0.5, gen) for _ in range(3)]
        d01 = matching_distance_exact(graphs[0], graphs[1]).distance
        d10 = matching_distance_exact(graphs[1], graphs[0]).distance
        d12 = matching_distance_exact(graphs[1], graphs[2]).distance
        d02 = matching_distance_exact(graphs[0], graphs[2]).distance
        assert d01 == pytest.approx(d10, abs=1e-12)
        assert matching_distance_exact(graphs[0], graphs[0]).distance == 0.0
        assert d02 <= d01 + d12 + 1e-12
        assert 0.0 <= d01 <= 1.0


def test_isomorphism_invariance():
    gen = SeededRng(2).generator()
    for _ in range(10):
        n = int(gen.integers(3, 8))
        a = random_graph(n, 0.5, gen)
        b = relabel(a, gen.permutation(n))
        assert matching_distance_exact(a, b).distance == 0.0


def test_approx_identical_inputs_zero_at_first_restart():
    gen = SeededRng(3).generator()
    a = random_graph(8, 0.5, gen)
    result = matching_distance_approx(a, a, restarts=1)
    assert result.distance == 0.0
    assert not result.exact


def test_approx_never_below_exact():
    gen = SeededRng(4).generator()
    for k in range(60):
        n = int(gen.integers(3, 9))
        a1 = random_graph(n, 0.5, gen)
        a2 = random_graph(n, 0.5, gen)
        exact = matching_distance_exact(a1, a2).distance
        approx = matching_distance_approx(a1, a2, restarts=3, rng=SeededRng(5).substream(k)).distance
        assert approx >= exact - 1e-12


def test_approx_recovers_isomorphisms():
    gen = SeededRng(6).generator()
    hits = 0
    trials = 50
    for k in range(trials):
        a = random_graph(8, 0.5, gen)
        b = relabel(a, gen.permutation(8))
        d = matching_distance_approx(a, b, restarts=5, rng=SeededRng(7).substream(k)).distance
        hits += d == 0.0
    assert hits >= 0.9 * trials


def test_wasserstein_identical_lists():
    gen = SeededRng(8).generator()
    samples = [random_graph(6, 0.5, gen) for _ in range(5)]
    assert empirical_wasserstein(samples, list(samples)) == pytest.approx(0.0)


def test_wasserstein_empty_vs_complete():
    empty = [AdjacencyMatrix(np.zeros((4, 4)))] * 3
    full = [AdjacencyMatrix(np.ones((4, 4)) - np.eye(4))] * 3
    assert empirical_wasserstein(empty, full) == pytest.approx(1.0)


def test_wasserstein_single_pair():
    k3 = AdjacencyMatrix.from_edges(3, [(0, 1), (1, 2), (2, 0)])
    e = AdjacencyMatrix.from_edges(3, [(0, 1)])
    assert empirical_wasserstein([k3], [e]) == pytest.approx(2 / 3)


def test_wasserstein_validation():
    a = AdjacencyMatrix(np.zeros((3, 3)))
    b = AdjacencyMatrix(np.zeros((4, 4)))
    with pytest.raises(ValueError):
        empirical_wasserstein([a], [a, a])
    with pytest.raises(ValueError):
        empirical_wasserstein([a], [b])
