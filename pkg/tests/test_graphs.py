import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphboot.graphs import (
    AdjacencyMatrix,
    DuplicateEdgeError,
    MalformedLineError,
    SelfLoopError,
    VertexRangeError,
    is_connected,
    read_edge_list,
    shortest_path_matrix,
    write_edge_list,
)
from graphboot.rng import SeededRng


def path3():
    return AdjacencyMatrix.from_edges(3, [(0, 1), (1, 2)])


def test_is_connected_path():
    assert is_connected(path3())


def test_is_connected_two_components():
    a = AdjacencyMatrix.from_edges(4, [(0, 1), (2, 3)])
    assert not is_connected(a)


def test_singleton_is_connected():
    assert is_connected(AdjacencyMatrix(np.zeros((1, 1))))


def test_shortest_path_path_graph():
    sp = shortest_path_matrix(path3())
    assert sp[0, 2] == 2
    assert sp[0, 0] == 0


def test_shortest_path_complete():
    a = AdjacencyMatrix(np.ones((4, 4)) - np.eye(4))
    sp = shortest_path_matrix(a)
    off = sp[~np.eye(4, dtype=bool)]
    assert np.all(off == 1)


def test_shortest_path_disconnected_is_inf():
    a = AdjacencyMatrix.from_edges(4, [(0, 1), (2, 3)])
    sp = shortest_path_matrix(a)
    assert np.isinf(sp[0, 2])


def test_edge_list_round_trip():
    text = "n 3\n0 1\n1 2\n"
    assert write_edge_list(read_edge_list(text)) == text


def test_edge_list_parses_path():
    a = read_edge_list("n 3\n0 1\n1 2")
    assert a == path3()


@pytest.mark.parametrize(
    "text,exc",
    [
        ("n 2\n0 0", SelfLoopError),
        ("n 2\n0 5", VertexRangeError),
        ("n 2\n0 1\n1 0", DuplicateEdgeError),
        ("n 2\n0 1 2", MalformedLineError),
        ("2\n0 1", MalformedLineError),
        ("n x", MalformedLineError),
        ("", MalformedLineError),
    ],
)
def test_edge_list_errors(text, exc):
    with pytest.raises(exc):
        read_edge_list(text)


def test_adjacency_validation():
    with pytest.raises(ValueError):
        AdjacencyMatrix(np.array([[0, 1], [0, 0]]))  # asymmetric
    with pytest.raises(ValueError):
        AdjacencyMatrix(np.eye(2))  # nonzero diagonal
    with pytest.raises(ValueError):
        AdjacencyMatrix(np.full((2, 2), 0.5))  # non-binary


def _random_graph(n, p, seed):
    gen = SeededRng(seed).generator()
    m = np.triu((gen.random((n, n)) < p).astype(int), 1)
    return AdjacencyMatrix(m + m.T)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 30), st.floats(0.05, 0.9), st.integers(0, 10_000))
def test_shortest_path_symmetric_triangle_inequality(n, p, seed):
    a = _random_graph(n, p, seed)
    sp = shortest_path_matrix(a)
    assert np.array_equal(sp, sp.T)
    finite = np.isfinite(sp)
    # d(i,k) <= d(i,j) + d(j,k) wherever all three are finite
    for j in range(n):
        both = finite[:, [j]] & finite[[j], :]
        bound = sp[:, [j]] + sp[[j], :]
        violation = (sp - bound)[both & finite]
        assert np.all(violation <= 1e-9)


def test_matrix_is_immutable():
    a = path3()
    with pytest.raises(ValueError):
        a.matrix[0, 1] = 0


def test_shortest_path_matches_scipy_oracle():
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import shortest_path as scipy_sp

    gen = SeededRng(42).generator()
    for _ in range(15):
        n = int(gen.integers(2, 60))
        p = gen.uniform(0.03, 0.6)
        a = _random_graph(n, p, int(gen.integers(1e6)))
        mine = shortest_path_matrix(a)
        ref = scipy_sp(csr_matrix(a.matrix), method="D", directed=False, unweighted=True)
        assert np.array_equal(mine, ref)


def test_is_connected_matches_scipy_oracle():
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    gen = SeededRng(43).generator()
    for _ in range(20):
        n = int(gen.integers(2, 50))
        a = _random_graph(n, gen.uniform(0.02, 0.3), int(gen.integers(1e6)))
        ncomp, _ = connected_components(csr_matrix(a.matrix), directed=False)
        assert is_connected(a) == (ncomp == 1)
