"""U-statistics over latent positions: kernels, evaluation, and weighted bootstraps.

A kernel is a symmetric function of m latent position vectors.  The
U-statistic is its average over all strictly increasing m-tuples of a
configuration's rows; the plug-in variant evaluates the same average at
spectral estimates of the positions.

Weighted bootstrap replicates are driven by a multinomial vertex weight
vector W (n trials, uniform cells).  Two per-tuple weight schemes are
implemented:

* ``efron``: product weights ``W[i1] * ... * W[im]``, the classical
  resample-from-the-empirical-distribution bootstrap in weighted form.
* ``additive``: sum weights ``(W[i1] + ... + W[im]) / m``.  These admit an
  O(n)-per-replicate shortcut: the weighted average over all tuples equals
  ``mean_i W[i] * inclusion_mean[i]`` where ``inclusion_mean[i]`` is the
  kernel average over tuples containing vertex i.  Raw additive replicates
  concentrate at 1/m times the scale of the statistic's sampling
  distribution, so published replicates inflate deviations from the center
  by m (and by the finite-n weight-variance correction sqrt(1 - 1/n)),
  after which both schemes target the same limiting variance.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graphs import AdjacencyMatrix
from .inference import BootstrapSample
from .netstats import edge_density
from .rng import SeededRng
from .spectral import ase

__all__ = [
    "KernelSpec",
    "UStatResult",
    "TupleBudgetError",
    "KernelInvarianceError",
    "average_degree_kernel",
    "subgraph_density_kernel",
    "mmd_statistic",
    "degree_variance_vstatistic",
    "u_statistic_exact",
    "u_statistic_mc",
    "plug_in_u_statistic",
    "vertex_inclusion_means",
    "bootstrap_u_statistic",
    "normalized_subgraph_density",
]

DEFAULT_TUPLE_BUDGET = 20_000_000
MAX_KERNEL_ARITY = 5
_CHUNK = 262_144

WEIGHT_SCHEMES = ("additive", "efron")


class TupleBudgetError(ValueError):
    """Exact enumeration would exceed the tuple budget; use the MC mode."""


class KernelInvarianceError(ValueError):
    """Kernel is not flagged rotation-invariant, so spectral estimates

    (which are defined only up to an orthogonal transformation) cannot be
    plugged into it.
    """


@dataclass(frozen=True)
class KernelSpec:
    """A symmetric m-argument kernel over d-dimensional vectors.

    ``eval_batch`` maps a (T, m, d) stack of argument tuples to (T,) values.
    ``homogeneity_degree`` r, when set, asserts
    ``h(a*x1, ..., a*xm) == a**r * h(x1, ..., xm)``.
    ``d`` of None means the kernel accepts any dimension.
    """

    name: str
    m: int
    eval_batch: Callable[[np.ndarray], np.ndarray]
    rotation_invariant: bool
    homogeneity_degree: float | None = None
    d: int | None = None

    def evaluate(self, tuples: np.ndarray) -> np.ndarray:
        tuples = np.asarray(tuples, dtype=float)
        if tuples.ndim != 3 or tuples.shape[1] != self.m:
            raise ValueError(f"expected (T, {self.m}, d) argument stack, got {tuples.shape}")
        if self.d is not None and tuples.shape[2] != self.d:
            raise ValueError(f"kernel {self.name} expects d={self.d}, got {tuples.shape[2]}")
        return np.asarray(self.eval_batch(tuples), dtype=float)

    def __call__(self, *vectors) -> float:
        stack = np.stack([np.atleast_1d(np.asarray(v, dtype=float)) for v in vectors])
        return float(self.evaluate(stack[None, :, :])[0])


@dataclass
class UStatResult:
    value: float
    arity: int
    mode: str            # "exact" | "mc"
    tuples_used: int


def average_degree_kernel() -> KernelSpec:
    """h(x, y) = 2 x.y — the kernel of the normalized average degree."""

    def _eval(tuples):
        return 2.0 * np.einsum("td,td->t", tuples[:, 0, :], tuples[:, 1, :])

    return KernelSpec(
        name="average-degree",
        m=2,
        eval_batch=_eval,
        rotation_invariant=True,
        homogeneity_degree=2.0,
    )


def _distinct_isomorphs(r_adj: np.ndarray) -> list[np.ndarray]:
    """Distinct labeled graphs isomorphic to R, by brute-force relabeling."""
    m = r_adj.shape[0]
    seen: dict[bytes, np.ndarray] = {}
    for tau in itertools.permutations(range(m)):
        perm = np.asarray(tau)
        h = r_adj[np.ix_(perm, perm)]
        seen.setdefault(h.astype(np.int8).tobytes(), h)
    return list(seen.values())


def subgraph_density_kernel(r_adj: np.ndarray) -> KernelSpec:
    """Kernel whose U-statistic is the expected induced-subgraph density of R.

    Evaluates the probability that m independently connected vertices with
    the given latent positions induce a graph isomorphic to R: the sum,
    over the distinct labeled copies of R, of the edge/non-edge probability
    products.  (Equivalently the symmetrized product form averaged over all
    m! argument orders and weighted by the number of labeled copies.)

    For a complete R the kernel is exactly homogeneous of degree
    ``2 * |E(R)|`` in a common scaling of its arguments; with missing edges
    the (1 - p) factors break exact homogeneity, so the degree is left unset.
    """
    r_adj = np.asarray(r_adj)
    m = r_adj.shape[0]
    if r_adj.ndim != 2 or r_adj.shape[0] != r_adj.shape[1]:
        raise ValueError("subgraph pattern must be a square adjacency matrix")
    if m > MAX_KERNEL_ARITY:
        raise ValueError(f"subgraph patterns limited to {MAX_KERNEL_ARITY} vertices, got {m}")
    if not np.array_equal(r_adj, r_adj.T) or np.any(np.diagonal(r_adj) != 0):
        raise ValueError("subgraph pattern must be symmetric with zero diagonal")
    isomorphs = _distinct_isomorphs(r_adj)
    ku, kl = np.triu_indices(m, 1)
    # Pair masks: for each labeled copy, which of the m(m-1)/2 slots are edges.
    masks = np.stack([h[ku, kl].astype(bool) for h in isomorphs])
    n_edges = int(r_adj[ku, kl].sum())
    complete = n_edges == len(ku)

    def _eval(tuples):
        gram = np.einsum("tkd,tld->tkl", tuples, tuples)
        p = gram[:, ku, kl]                      # (T, pairs)
        out = np.zeros(tuples.shape[0])
        for mask in masks:
            factors = np.where(mask[None, :], p, 1.0 - p)
            out += factors.prod(axis=1)
        return out

    return KernelSpec(
        name=f"subgraph-density-m{m}e{n_edges}",
        m=m,
        eval_batch=_eval,
        rotation_invariant=True,
        homogeneity_degree=2.0 * n_edges if complete else None,
    )


def mmd_statistic(
    kappa: Callable[[np.ndarray, np.ndarray], np.ndarray],
    labels: np.ndarray,
    cross_factor: float = 2.0,
) -> Callable[[np.ndarray], float]:
    """Two-sample maximum mean discrepancy over a position configuration.

    ``kappa(X, Y)`` must return the Gram matrix of a positive-definite
    kernel.  ``labels`` is a binary group indicator.  The statistic is

        within-1 mean + within-2 mean - cross_factor * cross mean,

    with within-group means over distinct ordered pairs.  ``cross_factor=2``
    is the conventional squared-MMD normalization (identical samples give
    exactly 0); ``cross_factor=1`` evaluates the literal three-term form
    with a unit cross coefficient.
    """
    labels = np.asarray(labels).astype(bool)
    idx1 = np.nonzero(labels)[0]
    idx2 = np.nonzero(~labels)[0]
    if len(idx1) < 2 or len(idx2) < 2:
        raise ValueError("both groups need at least 2 members")

    def _stat(positions: np.ndarray) -> float:
        x = np.atleast_2d(np.asarray(positions, dtype=float))
        x1, x2 = x[idx1], x[idx2]
        n1, n2 = len(x1), len(x2)
        g11 = np.asarray(kappa(x1, x1), dtype=float)
        g22 = np.asarray(kappa(x2, x2), dtype=float)
        g12 = np.asarray(kappa(x1, x2), dtype=float)
        t1 = (g11.sum() - np.trace(g11)) / (n1 * (n1 - 1))
        t2 = (g22.sum() - np.trace(g22)) / (n2 * (n2 - 1))
        t12 = g12.sum() / (n1 * n2)
        return float(t1 + t2 - cross_factor * t12)

    return _stat


def degree_variance_vstatistic(x: np.ndarray) -> float:
    """Degree-variance V-statistic of a configuration, in O(n d) time.

    Computes ``n**-4 * sum_{i,j,k,l} (x_i . x_k) * ((x_i - x_j) . x_l)``
    via the factorization with s = sum_l x_l:
    the quadruple sum collapses to ``n * sum_i (x_i . s)**2 - (sum_i x_i . s)**2``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least 2 positions")
    a = x @ x.sum(axis=0)
    return float((n * (a**2).sum() - a.sum() ** 2) / n**4)


# ---------------------------------------------------------------------------
# Tuple enumeration and sampling


def _num_tuples(n: int, m: int) -> int:
    return math.comb(n, m)


def _iter_tuple_chunks(n: int, m: int, chunk: int = _CHUNK):
    """Yield (T, m) arrays covering all strictly increasing m-tuples."""
    if m == 2:
        iu, ju = np.triu_indices(n, 1)
        idx = np.column_stack([iu, ju])
        for s in range(0, len(idx), chunk):
            yield idx[s : s + chunk]
        return
    it = itertools.combinations(range(n), m)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.asarray(block, dtype=np.int64)


def _sample_tuples(n: int, m: int, count: int, gen: np.random.Generator) -> np.ndarray:
    """Uniform sample, with replacement, from the set of increasing m-tuples.

    Sorted-distinct rejection sampling; the rejection rate is O(m^2 / n).
    """
    out = np.empty((count, m), dtype=np.int64)
    filled = 0
    while filled < count:
        need = count - filled
        draw = gen.integers(0, n, size=(need + need // 4 + 8, m))
        draw.sort(axis=1)
        ok = np.all(draw[:, 1:] > draw[:, :-1], axis=1)
        good = draw[ok][:need]
        out[filled : filled + len(good)] = good
        filled += len(good)
    return out


def _sample_tuples_containing(
    i: int, n: int, m: int, count: int, gen: np.random.Generator
) -> np.ndarray:
    """Uniform increasing m-tuples constrained to contain index i."""
    others = _sample_tuples(n - 1, m - 1, count, gen) if m > 1 else np.empty((count, 0), dtype=np.int64)
    others = others + (others >= i)  # skip over i
    full = np.concatenate([np.full((count, 1), i, dtype=np.int64), others], axis=1)
    full.sort(axis=1)
    return full


# ---------------------------------------------------------------------------
# Evaluation


def _config(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError(f"positions must be an (n, d) array, got shape {x.shape}")
    return x


def u_statistic_exact(
    h: KernelSpec, x: np.ndarray, budget: int = DEFAULT_TUPLE_BUDGET
) -> UStatResult:
    """Average of the kernel over all C(n, m) increasing tuples."""
    x = _config(x)
    n = x.shape[0]
    if n < h.m:
        raise ValueError(f"need at least m={h.m} positions, got {n}")
    total = _num_tuples(n, h.m)
    if total > budget:
        raise TupleBudgetError(
            f"C({n}, {h.m}) = {total} exceeds the tuple budget {budget}; "
            f"use u_statistic_mc"
        )
    partial = [float(h.evaluate(x[idx]).sum()) for idx in _iter_tuple_chunks(n, h.m)]
    return UStatResult(value=math.fsum(partial) / total, arity=h.m, mode="exact", tuples_used=total)


def u_statistic_mc(
    h: KernelSpec, x: np.ndarray, num_samples: int, rng: SeededRng
) -> UStatResult:
    """Unbiased Monte Carlo estimate over uniformly sampled tuples."""
    x = _config(x)
    n = x.shape[0]
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    if n < h.m:
        raise ValueError(f"need at least m={h.m} positions, got {n}")
    gen = rng.generator()
    sums = []
    remaining = num_samples
    while remaining > 0:
        t = min(remaining, _CHUNK)
        idx = _sample_tuples(n, h.m, t, gen)
        sums.append(float(h.evaluate(x[idx]).sum()))
        remaining -= t
    return UStatResult(
        value=math.fsum(sums) / num_samples, arity=h.m, mode="mc", tuples_used=num_samples
    )


def plug_in_u_statistic(
    a: AdjacencyMatrix,
    d: int,
    h: KernelSpec,
    mode: str = "exact",
    num_samples: int | None = None,
    rng: SeededRng | None = None,
    budget: int = DEFAULT_TUPLE_BUDGET,
    selection: str = "magnitude",
) -> UStatResult:
    """U-statistic evaluated at the spectral embedding of the graph.

    The kernel must be rotation-invariant: the embedding is defined only up
    to an orthogonal transformation.
    """
    if not h.rotation_invariant:
        raise KernelInvarianceError(
            f"kernel {h.name} is not rotation-invariant; plug-in evaluation "
            f"at spectral estimates is not meaningful"
        )
    xhat = ase(a, d, augment=True, selection=selection)
    if mode == "exact":
        return u_statistic_exact(h, xhat, budget=budget)
    if mode == "mc":
        if num_samples is None or rng is None:
            raise ValueError("mc mode requires num_samples and rng")
        return u_statistic_mc(h, xhat, num_samples, rng)
    raise ValueError(f"unknown mode {mode!r}")


def vertex_inclusion_means(
    h: KernelSpec,
    x: np.ndarray,
    mode: str = "exact",
    num_samples: int | None = None,
    rng: SeededRng | None = None,
    budget: int = DEFAULT_TUPLE_BUDGET,
) -> np.ndarray:
    """Per-vertex kernel averages over the tuples containing each vertex.

    Entry i is the mean of h over the C(n-1, m-1) increasing tuples that
    include i (estimated from ``num_samples`` uniformly sampled such tuples
    per vertex in "mc" mode).  These means power the O(n)-per-replicate
    additive bootstrap: for any weight vector W,

        mean_i W[i] * means[i]
        == binom(n, m)^-1 * sum_tuples (sum_k W[i_k] / m) * h(tuple),

    and their plain average equals the full U-statistic.
    """
    x = _config(x)
    n = x.shape[0]
    if n < h.m:
        raise ValueError(f"need at least m={h.m} positions, got {n}")
    if mode == "exact":
        total = _num_tuples(n, h.m)
        if total > budget:
            raise TupleBudgetError(
                f"C({n}, {h.m}) = {total} exceeds the tuple budget {budget}; use mode='mc'"
            )
        sums = np.zeros(n)
        for idx in _iter_tuple_chunks(n, h.m):
            vals = h.evaluate(x[idx])
            for k in range(h.m):
                np.add.at(sums, idx[:, k], vals)
        return sums / math.comb(n - 1, h.m - 1)
    if mode == "mc":
        if num_samples is None or rng is None:
            raise ValueError("mc mode requires num_samples and rng")
        gen = rng.generator()
        means = np.empty(n)
        block = max(1, _CHUNK // num_samples)
        for start in range(0, n, block):
            stop = min(start + block, n)
            idx = np.concatenate(
                [_sample_tuples_containing(i, n, h.m, num_samples, gen) for i in range(start, stop)]
            )
            vals = h.evaluate(x[idx]).reshape(stop - start, num_samples)
            means[start:stop] = vals.mean(axis=1)
        return means
    raise ValueError(f"unknown mode {mode!r}")


def _max_tuple_weight(w: np.ndarray, m: int, scheme: str) -> float:
    """Largest per-tuple weight magnitude implied by a vertex weight vector."""
    n = len(w)
    top = np.sort(w)[-m:]
    if scheme == "additive":
        return float(top.sum() / (m * math.sqrt(1.0 - 1.0 / n)))
    return float(np.prod(top))


def bootstrap_u_statistic(
    h: KernelSpec,
    x: np.ndarray,
    scheme: str,
    num_replicates: int,
    rng: SeededRng,
    mode: str = "exact",
    num_samples: int | None = None,
    budget: int = DEFAULT_TUPLE_BUDGET,
    observed: float | None = None,
) -> BootstrapSample:
    """Weighted-bootstrap replicates of a U-statistic.

    Additive scheme: vertex inclusion means are computed once (exactly or
    by MC) and each replicate costs O(n); replicate deviations from the
    center are scaled by ``m / sqrt(1 - 1/n)`` so the replicate spread
    targets the statistic's limiting variance (see module docstring).
    Efron scheme: the per-tuple values are computed once and every
    replicate reweights them by products of multinomial vertex weights.
    """
    if scheme not in WEIGHT_SCHEMES:
        raise ValueError(f"unknown weight scheme {scheme!r}; choose from {WEIGHT_SCHEMES}")
    if num_replicates < 1:
        raise ValueError("num_replicates must be >= 1")
    x = _config(x)
    n = x.shape[0]
    gen = rng.generator()
    pvals = np.full(n, 1.0 / n)

    if scheme == "additive":
        means = vertex_inclusion_means(
            h, x, mode=mode, num_samples=num_samples, rng=rng.substream(0), budget=budget
        )
        center = float(means.mean())
        weights = gen.multinomial(n, pvals, size=num_replicates).astype(float)
        raw = weights @ means / n
        correction = math.sqrt(1.0 - 1.0 / n)
        values = center + h.m * (raw - center) / correction
        max_w = max(_max_tuple_weight(w, h.m, scheme) for w in weights)
        meta = {"center": center, "max_tuple_weight": max_w, "inclusion_mode": mode}
    else:
        if mode == "exact":
            total = _num_tuples(n, h.m)
            if total > budget:
                raise TupleBudgetError(
                    f"C({n}, {h.m}) = {total} exceeds the tuple budget {budget}; use mode='mc'"
                )
            idx = np.concatenate(list(_iter_tuple_chunks(n, h.m)), axis=0)
        else:
            if num_samples is None:
                raise ValueError("mc mode requires num_samples")
            idx = _sample_tuples(n, h.m, num_samples, rng.substream(0).generator())
        vals = h.evaluate(x[idx])
        weights = gen.multinomial(n, pvals, size=num_replicates).astype(float)
        values = np.empty(num_replicates)
        for b in range(num_replicates):
            tuple_w = weights[b][idx].prod(axis=1)
            values[b] = float(tuple_w @ vals) / len(vals)
        max_w = max(_max_tuple_weight(w, h.m, scheme) for w in weights)
        meta = {"max_tuple_weight": max_w, "tuples_used": len(vals), "mode": mode}

    return BootstrapSample(
        values=values,
        method=scheme,
        seed=repr(rng),
        observed_statistic=observed,
        meta=meta,
    )


def normalized_subgraph_density(
    a: AdjacencyMatrix,
    d: int,
    r_adj: np.ndarray,
    mode: str = "exact",
    num_samples: int | None = None,
    rng: SeededRng | None = None,
    budget: int = DEFAULT_TUPLE_BUDGET,
) -> float:
    """Plug-in subgraph density rescaled by edge density to the edge count.

    Dividing the plug-in density of pattern R by ``edge_density ** |E(R)|``
    removes the sparsity scale, so sparse and dense regimes estimate the
    same population quantity.
    """
    rho = edge_density(a)
    if rho <= 0:
        raise ValueError("normalized subgraph density is undefined for an empty graph")
    r_adj = np.asarray(r_adj)
    h = subgraph_density_kernel(r_adj)
    n_edges = int(np.triu(r_adj, 1).sum())
    result = plug_in_u_statistic(
        a, d, h, mode=mode, num_samples=num_samples, rng=rng, budget=budget
    )
    return result.value / rho**n_edges
