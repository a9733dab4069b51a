"""Graph container, deterministic edge-list I/O, connectivity and shortest paths.

Graphs are simple and undirected: symmetric binary adjacency with a zero
diagonal.  Dense storage; everything here is sized for n up to a few
thousand vertices.
"""

from __future__ import annotations

import io

import numpy as np

__all__ = [
    "AdjacencyMatrix",
    "EdgeListError",
    "MalformedLineError",
    "VertexRangeError",
    "SelfLoopError",
    "DuplicateEdgeError",
    "is_connected",
    "shortest_path_matrix",
    "read_edge_list",
    "write_edge_list",
]


class EdgeListError(ValueError):
    """Base class for edge-list parse failures."""


class MalformedLineError(EdgeListError):
    """A line that is not a valid header or 'i j' pair."""


class VertexRangeError(EdgeListError):
    """An endpoint outside [0, n)."""


class SelfLoopError(EdgeListError):
    """An edge joining a vertex to itself."""


class DuplicateEdgeError(EdgeListError):
    """The same unordered pair listed twice."""


class AdjacencyMatrix:
    """Immutable symmetric binary adjacency matrix with zero diagonal."""

    __slots__ = ("_m",)

    def __init__(self, matrix: np.ndarray):
        m = np.asarray(matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"adjacency matrix must be square, got shape {m.shape}")
        if m.shape[0] < 1:
            raise ValueError("graph must have at least one vertex")
        vals = np.unique(m)
        if not np.all(np.isin(vals, (0, 1))):
            raise ValueError("adjacency entries must be 0 or 1")
        m = m.astype(np.int8)
        if not np.array_equal(m, m.T):
            raise ValueError("adjacency matrix must be symmetric")
        if np.any(np.diagonal(m) != 0):
            raise ValueError("adjacency diagonal must be zero")
        m.setflags(write=False)
        self._m = m

    @classmethod
    def from_edges(cls, n: int, edges) -> "AdjacencyMatrix":
        m = np.zeros((n, n), dtype=np.int8)
        for i, j in edges:
            m[i, j] = m[j, i] = 1
        return cls(m)

    @property
    def n(self) -> int:
        return self._m.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """Read-only int8 view of the full symmetric matrix."""
        return self._m

    def degrees(self) -> np.ndarray:
        return self._m.sum(axis=1).astype(np.int64)

    def num_edges(self) -> int:
        return int(self._m.sum()) // 2

    def edges(self) -> list[tuple[int, int]]:
        """Edges as sorted (i, j) pairs with i < j, lexicographic order."""
        iu, ju = np.nonzero(np.triu(self._m, 1))
        return list(zip(iu.tolist(), ju.tolist()))

    def __eq__(self, other) -> bool:
        return isinstance(other, AdjacencyMatrix) and np.array_equal(self._m, other._m)

    def __hash__(self):
        return hash((self.n, self._m.tobytes()))

    def __repr__(self) -> str:
        return f"AdjacencyMatrix(n={self.n}, edges={self.num_edges()})"


def is_connected(a: AdjacencyMatrix) -> bool:
    """True iff every vertex is reachable from vertex 0 (BFS)."""
    m = a.matrix.astype(bool)
    n = a.n
    reached = np.zeros(n, dtype=bool)
    reached[0] = True
    frontier = reached.copy()
    while frontier.any():
        nxt = m[frontier].any(axis=0) & ~reached
        reached |= nxt
        frontier = nxt
    return bool(reached.all())


def shortest_path_matrix(a: AdjacencyMatrix) -> np.ndarray:
    """All-pairs hop counts via BFS from every vertex.

    The BFS runs over all sources at once: the level-k frontier is expanded
    by one boolean matrix product per level.  Entry (i, j) is the minimum
    hop count; disconnected pairs are ``numpy.inf``, so consumers must
    check for it rather than silently averaging.
    """
    n = a.n
    if n == 1:
        return np.zeros((1, 1))
    adj = a.matrix.astype(np.float32)
    dist = np.where(adj > 0, 1.0, np.inf)
    np.fill_diagonal(dist, 0.0)
    reached = (adj > 0) | np.eye(n, dtype=bool)
    frontier = adj
    level = 1
    while True:
        # path counts stay exact in float32 up to 2**24; only positivity is used
        expanded = (frontier @ adj) > 0
        new = expanded & ~reached
        if not new.any():
            return dist
        level += 1
        dist[new] = level
        reached |= new
        frontier = new.astype(np.float32)


def read_edge_list(text: str) -> AdjacencyMatrix:
    """Parse the canonical edge-list format.

    Header line ``n <count>`` followed by one ``i j`` pair per line,
    0-indexed.  Blank lines and ``#`` comments are ignored.
    """
    lines = [ln.strip() for ln in io.StringIO(text)]
    rows = [(k + 1, ln) for k, ln in enumerate(lines) if ln and not ln.startswith("#")]
    if not rows:
        raise MalformedLineError("empty input: expected header line 'n <count>'")
    lineno, header = rows[0]
    parts = header.split()
    if len(parts) != 2 or parts[0] != "n":
        raise MalformedLineError(f"line {lineno}: expected header 'n <count>', got {header!r}")
    try:
        n = int(parts[1])
    except ValueError:
        raise MalformedLineError(f"line {lineno}: vertex count {parts[1]!r} is not an integer") from None
    if n < 1:
        raise MalformedLineError(f"line {lineno}: vertex count must be >= 1, got {n}")

    m = np.zeros((n, n), dtype=np.int8)
    for lineno, ln in rows[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise MalformedLineError(f"line {lineno}: expected 'i j', got {ln!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise MalformedLineError(f"line {lineno}: endpoints must be integers, got {ln!r}") from None
        if not (0 <= i < n and 0 <= j < n):
            raise VertexRangeError(f"line {lineno}: edge ({i}, {j}) outside [0, {n})")
        if i == j:
            raise SelfLoopError(f"line {lineno}: self-loop at vertex {i}")
        if m[i, j]:
            raise DuplicateEdgeError(f"line {lineno}: duplicate edge ({min(i, j)}, {max(i, j)})")
        m[i, j] = m[j, i] = 1
    return AdjacencyMatrix(m)


def write_edge_list(a: AdjacencyMatrix) -> str:
    """Serialize to canonical form: header, then sorted 'i j' lines, i < j."""
    out = [f"n {a.n}"]
    out.extend(f"{i} {j}" for i, j in a.edges())
    return "\n".join(out) + "\n"
