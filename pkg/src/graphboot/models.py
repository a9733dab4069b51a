"""Latent position distributions and network samplers.

An inner-product distribution F must satisfy ``0 <= x.T y <= 1`` for all
x, y in its support; edge probabilities are then ``rho * x.T y`` with an
optional sparsity factor ``rho`` in (0, 1].  The stochastic block model is
sampled directly from its block matrix, and is a special case of the inner
product model exactly when the block matrix is positive semidefinite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import AdjacencyMatrix, is_connected
from .rng import SeededRng
from .spectral import clamp_probabilities

__all__ = [
    "LatentDistribution",
    "BetaScalar",
    "Empirical",
    "PointMix",
    "SbmParams",
    "NotPositiveSemidefiniteError",
    "ConnectivityError",
    "sample_latents",
    "sample_rdpg",
    "sbm_to_latents",
    "sample_sbm",
    "sample_connected",
]

_SIMPLEX_TOL = 1e-12


class NotPositiveSemidefiniteError(ValueError):
    """Block matrix admits no inner-product representation."""


class ConnectivityError(RuntimeError):
    """No connected graph produced within the attempt budget."""

    def __init__(self, attempts: int):
        super().__init__(f"no connected graph after {attempts} attempts; model may be too sparse")
        self.attempts = attempts


class LatentDistribution:
    """Base class; subclasses implement ``draw`` and expose ``d``."""

    d: int

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class BetaScalar(LatentDistribution):
    """Scalar latent positions drawn from Beta(a, b); support in [0, 1]."""

    a: float
    b: float
    d: int = field(default=1, init=False)

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError(f"Beta parameters must be positive, got ({self.a}, {self.b})")

    def draw(self, n, rng):
        return rng.beta(self.a, self.b, size=(n, 1))

    def mean(self) -> float:
        return self.a / (self.a + self.b)

    def moment(self, k: int) -> float:
        """E X^k via the rising-factorial product formula."""
        val = 1.0
        for r in range(k):
            val *= (self.a + r) / (self.a + self.b + r)
        return val


class Empirical(LatentDistribution):
    """Uniform resampling of the rows of a stored configuration.

    Rows coming from a spectral embedding may violate the inner-product
    constraint slightly; validity is enforced lazily, at graph-sampling
    time, by probability clamping (the clamped count is reported there).
    """

    def __init__(self, positions: np.ndarray):
        positions = np.atleast_2d(np.asarray(positions, dtype=float))
        if positions.ndim != 2 or positions.shape[0] < 1:
            raise ValueError("positions must be a nonempty (n, d) array")
        if not np.all(np.isfinite(positions)):
            raise ValueError("positions must be finite")
        self.positions = positions
        self.d = positions.shape[1]

    def draw(self, n, rng):
        idx = rng.integers(self.positions.shape[0], size=n)
        return self.positions[idx]


class PointMix(LatentDistribution):
    """Finite mixture of point masses (e.g. block representatives)."""

    def __init__(self, atoms: np.ndarray, weights: np.ndarray):
        atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
        weights = np.asarray(weights, dtype=float)
        if atoms.shape[0] != weights.shape[0]:
            raise ValueError("one weight per atom required")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > _SIMPLEX_TOL:
            raise ValueError(f"weights must be a simplex vector, got sum {weights.sum()!r}")
        gram = atoms @ atoms.T
        if gram.min() < -1e-12 or gram.max() > 1.0 + 1e-12:
            raise ValueError("atom inner products must lie in [0, 1]")
        self.atoms = atoms
        self.weights = weights
        self.d = atoms.shape[1]

    def draw(self, n, rng):
        idx = rng.choice(len(self.weights), size=n, p=self.weights)
        return self.atoms[idx]


@dataclass(frozen=True)
class SbmParams:
    """Stochastic block model: symmetric block matrix and block proportions."""

    block_matrix: np.ndarray
    proportions: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.block_matrix, dtype=float)
        pi = np.asarray(self.proportions, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError("block matrix must be square")
        if not np.allclose(b, b.T, atol=1e-12):
            raise ValueError("block matrix must be symmetric")
        if b.min() < 0 or b.max() > 1:
            raise ValueError("block matrix entries must lie in [0, 1]")
        if len(pi) != b.shape[0]:
            raise ValueError("one proportion per block required")
        if np.any(pi < 0) or abs(pi.sum() - 1.0) > _SIMPLEX_TOL:
            raise ValueError(f"proportions must be a simplex vector, got sum {pi.sum()!r}")
        object.__setattr__(self, "block_matrix", b)
        object.__setattr__(self, "proportions", pi)

    @property
    def k(self) -> int:
        return self.block_matrix.shape[0]


def sample_latents(f: LatentDistribution, n: int, rng: SeededRng) -> np.ndarray:
    """n i.i.d. rows from the latent distribution, shape (n, d)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return f.draw(n, rng.generator())


def _bernoulli_graph(p: np.ndarray, gen: np.random.Generator) -> AdjacencyMatrix:
    """Independent upper-triangle Bernoulli draws from a probability matrix."""
    n = p.shape[0]
    u = gen.random((n, n))
    upper = (np.triu(u, 1) < np.triu(p, 1)).astype(np.int8)
    return AdjacencyMatrix(upper + upper.T)


def sample_rdpg(
    x: np.ndarray,
    rng: SeededRng,
    rho: float = 1.0,
    return_clamped: bool = False,
):
    """Sample a graph with edge probabilities ``rho * x_i . x_j``.

    Probabilities are clamped to [0, 1]; the clamped-entry count is
    returned when ``return_clamped`` is set (nonzero counts flag latent
    positions that overshoot the valid inner-product range).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if not (0.0 < rho <= 1.0):
        raise ValueError(f"sparsity factor must lie in (0, 1], got {rho}")
    p, n_clamped = clamp_probabilities(rho * (x @ x.T))
    a = _bernoulli_graph(p, rng.generator())
    if return_clamped:
        # Clamp count over off-diagonal entries only (the diagonal is unused).
        diag = rho * np.einsum("ij,ij->i", x, x)
        diag_clamped = int(np.count_nonzero((diag < 0) | (diag > 1)))
        return a, n_clamped - diag_clamped
    return a


def sbm_to_latents(p: SbmParams) -> np.ndarray:
    """Block representatives nu_k with ``nu_k . nu_l = B[k, l]``.

    Requires a positive semidefinite block matrix; the embedding dimension
    is its rank.
    """
    b = p.block_matrix
    w, v = np.linalg.eigh(b)
    tol = 1e-10 * max(abs(w).max(), 1.0)
    if w.min() < -tol:
        raise NotPositiveSemidefiniteError(
            f"block matrix is not positive semidefinite (eigenvalues {w}); "
            f"such block models are not inner-product models"
        )
    keep = w > tol
    latents = v[:, keep] * np.sqrt(w[keep])
    return latents


def sample_sbm(p: SbmParams, n: int, rng: SeededRng) -> tuple[AdjacencyMatrix, np.ndarray]:
    """Sample (graph, block labels) with labels i.i.d. from the proportions."""
    gen = rng.generator()
    labels = gen.choice(p.k, size=n, p=p.proportions)
    probs = p.block_matrix[labels][:, labels]
    return _bernoulli_graph(probs, gen), labels


def sample_connected(sampler, rng: SeededRng, max_attempts: int = 100):
    """First connected draw from ``sampler(rng_stream)``; reports attempts.

    ``sampler`` receives a fresh substream per attempt so retries stay
    reproducible.  Returns ``(graph, attempts)``.
    """
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    for attempt in range(1, max_attempts + 1):
        a = sampler(rng.substream(attempt - 1))
        if is_connected(a):
            return a, attempt
    raise ConnectivityError(max_attempts)
