"""Symmetric eigendecomposition and the adjacency spectral embedding (ASE).

The ASE estimates latent positions as ``U * sqrt(S)`` from the top-d
eigenpairs of the (optionally diagonal-augmented) adjacency matrix.
Embeddings are unique only up to an orthogonal transformation, so all
downstream consumers must either be rotation-invariant or Procrustes-align
first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .graphs import AdjacencyMatrix

__all__ = [
    "EigenPairs",
    "SpectralError",
    "EigenSolverError",
    "NegativeEigenvalueError",
    "augment_diagonal",
    "top_eigenpairs",
    "ase",
    "procrustes_align",
    "clamp_probabilities",
]

# Dense decomposition below this size; Lanczos-type iterative solver above.
DENSE_CUTOFF = 512
RESIDUAL_RTOL = 1e-8


class SpectralError(Exception):
    """Base class for spectral failures."""


class EigenSolverError(SpectralError):
    """Iterative solver failed to converge or violated the residual contract."""


class NegativeEigenvalueError(SpectralError):
    """A strictly negative eigenvalue was selected for embedding.

    The inner-product model implies positive spectral structure, so this
    usually signals a mis-specified embedding dimension.  The offending
    spectrum is attached for diagnosis; callers may retry with smaller d.
    """

    def __init__(self, message: str, values: np.ndarray):
        super().__init__(message)
        self.values = values


@dataclass(frozen=True)
class EigenPairs:
    """Top eigenpairs, sorted by descending eigenvalue magnitude."""

    values: np.ndarray   # shape (d,)
    vectors: np.ndarray  # shape (n, d), orthonormal columns

    @property
    def d(self) -> int:
        return len(self.values)


def augment_diagonal(a: AdjacencyMatrix) -> np.ndarray:
    """Adjacency as float matrix with diagonal replaced by degree / n."""
    m = a.matrix.astype(float)
    n = a.n
    m[np.diag_indices(n)] = a.degrees() / n
    return m


def _check_residuals(m: np.ndarray, values: np.ndarray, vectors: np.ndarray) -> None:
    # values[0] is the largest-magnitude eigenvalue, i.e. the spectral norm.
    scale = max(float(np.abs(values).max()), 1e-300)
    resid = np.linalg.norm(m @ vectors - vectors * values, axis=0)
    worst = resid.max() / scale
    if worst > RESIDUAL_RTOL:
        raise EigenSolverError(
            f"eigenpair residual {worst:.3e} exceeds contract {RESIDUAL_RTOL:.1e}"
        )


def top_eigenpairs(m: np.ndarray, d: int) -> EigenPairs:
    """The d eigenpairs of largest eigenvalue magnitude of a symmetric matrix.

    Uses a full dense decomposition for n <= 512 and an implicitly restarted
    Lanczos iteration above; both must satisfy the residual contract
    ``|m v - lambda v| <= 1e-8 |m|``.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix must be square, got shape {m.shape}")
    if not (1 <= d <= n):
        raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
    if not np.allclose(m, m.T, atol=1e-12):
        raise ValueError("matrix must be symmetric")

    if n <= DENSE_CUTOFF or d > n - 2:
        w, v = np.linalg.eigh(m)
        order = np.argsort(-np.abs(w), kind="stable")[:d]
        values, vectors = w[order], v[:, order]
    else:
        # Deterministic start vector keeps repeated runs bit-identical.
        v0 = np.full(n, 1.0 / np.sqrt(n))
        try:
            w, v = eigsh(m, k=d, which="LM", v0=v0)
        except ArpackNoConvergence as exc:
            raise EigenSolverError(
                f"Lanczos iteration did not converge: {len(exc.eigenvalues)} of {d} "
                f"eigenpairs after ARPACK's iteration budget"
            ) from exc
        order = np.argsort(-np.abs(w), kind="stable")
        values, vectors = w[order], v[:, order]

    if len(values) and np.abs(values[0]) > 0:
        _check_residuals(m, values, vectors)
    return EigenPairs(values=values, vectors=vectors)


def _select_for_embedding(m: np.ndarray, d: int, selection: str) -> EigenPairs:
    if selection == "magnitude":
        return top_eigenpairs(m, d)
    if selection == "algebraic":
        # d algebraically largest eigenvalues; for the positive-definite
        # expected structure these coincide with the magnitude choice, but
        # they stay usable when noise makes the magnitude choice negative.
        n = m.shape[0]
        if n <= DENSE_CUTOFF or d > n - 2:
            w, v = np.linalg.eigh(m)
            order = np.argsort(-w, kind="stable")[:d]
            return EigenPairs(values=w[order], vectors=v[:, order])
        v0 = np.full(n, 1.0 / np.sqrt(n))
        try:
            w, v = eigsh(m, k=d, which="LA", v0=v0)
        except ArpackNoConvergence as exc:
            raise EigenSolverError("Lanczos iteration did not converge") from exc
        order = np.argsort(-w, kind="stable")
        return EigenPairs(values=w[order], vectors=v[:, order])
    raise ValueError(f"unknown eigenvalue selection {selection!r}")


def ase(
    a: AdjacencyMatrix | np.ndarray,
    d: int,
    augment: bool = True,
    selection: str = "magnitude",
) -> np.ndarray:
    """Adjacency spectral embedding: rows are estimated latent positions.

    Args:
        a: adjacency matrix (or a raw symmetric matrix, e.g. an exact edge
           probability matrix for noiseless tests).
        d: embedding dimension.
        augment: replace the zero diagonal with degree / n first.  Default on,
           matching the experimental pipeline; turn off to embed an exact
           probability matrix.
        selection: "magnitude" picks the d largest-|eigenvalue| pairs and
           raises ``NegativeEigenvalueError`` if any is strictly negative;
           "algebraic" picks the d algebraically largest, which is the robust
           choice when the trailing signal eigenvalues sit inside the noise
           bulk (small or sparse graphs).

    Returns:
        (n, d) array ``vectors * sqrt(values)``.
    """
    if isinstance(a, AdjacencyMatrix):
        m = augment_diagonal(a) if augment else a.matrix.astype(float)
    else:
        m = np.asarray(a, dtype=float)
        if augment:
            deg = m.sum(axis=1) - np.diagonal(m)
            m = m.copy()
            m[np.diag_indices(m.shape[0])] = deg / m.shape[0]
    pairs = _select_for_embedding(m, d, selection)
    # Tolerate solver-level jitter on an exactly singular spectrum.
    tol = 1e-10 * max(np.abs(pairs.values).max(initial=0.0), 1.0)
    vals = pairs.values.copy()
    vals[np.abs(vals) <= tol] = 0.0
    if np.any(vals < 0):
        raise NegativeEigenvalueError(
            f"selected eigenvalues {np.sort(vals)[::-1]} include a negative value; "
            f"retry with smaller d",
            values=pairs.values,
        )
    return pairs.vectors * np.sqrt(vals)


def procrustes_align(xhat: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Orthogonal alignment of one configuration onto another.

    Returns ``(q, aligned, max_row_error)`` where ``q`` minimizes
    ``|xhat q - x|_F`` over orthogonal matrices (no centering or scaling)
    and ``max_row_error = max_i |(xhat q)_i - x_i|``.
    """
    xhat = np.asarray(xhat, dtype=float)
    x = np.asarray(x, dtype=float)
    if xhat.shape != x.shape:
        raise ValueError(f"configurations must share shape, got {xhat.shape} vs {x.shape}")
    u, _, vt = np.linalg.svd(xhat.T @ x)
    q = u @ vt
    aligned = xhat @ q
    err = float(np.linalg.norm(aligned - x, axis=1).max())
    return q, aligned, err


def clamp_probabilities(p: np.ndarray) -> tuple[np.ndarray, int]:
    """Clamp entries to [0, 1]; returns (clamped matrix, number clamped)."""
    p = np.asarray(p, dtype=float)
    n_clamped = int(np.count_nonzero((p < 0.0) | (p > 1.0)))
    return np.clip(p, 0.0, 1.0), n_clamped
