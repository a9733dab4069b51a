import itertools
import math

import numpy as np
import pytest

from graphboot.graphs import AdjacencyMatrix
from graphboot.models import BetaScalar, sample_latents, sample_rdpg
from graphboot.rng import SeededRng
from graphboot.spectral import ase
from graphboot.ustat import (
    KernelInvarianceError,
    KernelSpec,
    TupleBudgetError,
    average_degree_kernel,
    bootstrap_u_statistic,
    degree_variance_vstatistic,
    mmd_statistic,
    normalized_subgraph_density,
    plug_in_u_statistic,
    subgraph_density_kernel,
    u_statistic_exact,
    u_statistic_mc,
    vertex_inclusion_means,
)

K3 = np.ones((3, 3)) - np.eye(3)
EDGE = np.array([[0, 1], [1, 0]])


# ---------------------------------------------------------------------------
# oracles


def brute_u_statistic(kernel, x):
    n = len(x)
    vals = [kernel(*(x[i] for i in c)) for c in itertools.combinations(range(n), kernel.m)]
    return math.fsum(vals) / math.comb(n, kernel.m)


def brute_inclusion_means(kernel, x):
    n = len(x)
    sums = np.zeros(n)
    for c in itertools.combinations(range(n), kernel.m):
        v = kernel(*(x[i] for i in c))
        for i in c:
            sums[i] += v
    return sums / math.comb(n - 1, kernel.m - 1)


def brute_additive_weighted_sum(kernel, x, w):
    """Direct weighted tuple sum with per-tuple weight mean(W over the tuple)."""
    n = len(x)
    total = 0.0
    for c in itertools.combinations(range(n), kernel.m):
        tuple_w = sum(w[i] for i in c) / kernel.m
        total += tuple_w * kernel(*(x[i] for i in c))
    return total / math.comb(n, kernel.m)


def random_orthogonal(d, gen):
    q, r = np.linalg.qr(gen.standard_normal((d, d)))
    return q * np.sign(np.diagonal(r))


# ---------------------------------------------------------------------------
# kernels


def test_average_degree_kernel_values():
    h = average_degree_kernel()
    assert h([0.5], [0.5]) == pytest.approx(0.5)
    assert h([0.0], [0.7]) == 0.0
    assert h([0.6, 0.0], [0.0, 0.8]) == 0.0


def test_subgraph_kernel_triangle_values():
    h = subgraph_density_kernel(K3)
    assert h([0.5], [0.5], [0.5]) == pytest.approx(0.25**3)
    assert h([0.0], [0.5], [0.5]) == 0.0


def test_subgraph_kernel_edge_value():
    h = subgraph_density_kernel(EDGE)
    assert h([0.4], [0.5]) == pytest.approx(0.2)


def test_subgraph_kernel_one_edge_on_three():
    # pattern: one edge plus isolated vertex; 3 labeled copies
    r = np.zeros((3, 3))
    r[0, 1] = r[1, 0] = 1
    h = subgraph_density_kernel(r)
    p = 0.25
    x = [0.5], [0.5], [0.5]
    assert h(*x) == pytest.approx(3 * p * (1 - p) ** 2)


def test_subgraph_kernel_rejects_large_pattern():
    with pytest.raises(ValueError):
        subgraph_density_kernel(np.zeros((6, 6)))


@pytest.mark.parametrize("maker,m", [(average_degree_kernel, 2),
                                     (lambda: subgraph_density_kernel(K3), 3),
                                     (lambda: subgraph_density_kernel(EDGE), 2)])
def test_kernel_symmetry_and_rotation_invariance(maker, m):
    h = maker()
    gen = SeededRng(0).generator()
    for d in (1, 3):
        args = [gen.random(d) * 0.5 for _ in range(m)]
        base = h(*args)
        for perm in itertools.permutations(range(m)):
            assert h(*(args[i] for i in perm)) == pytest.approx(base, abs=1e-12)
        q = random_orthogonal(d, gen)
        rotated = [q @ a for a in args]
        assert h(*rotated) == pytest.approx(base, abs=1e-10)


def test_kernel_homogeneity():
    gen = SeededRng(1).generator()
    for maker in (average_degree_kernel, lambda: subgraph_density_kernel(K3)):
        h = maker()
        assert h.homogeneity_degree is not None
        args = [gen.random(2) * 0.6 for _ in range(h.m)]
        for alpha in (0.0, 0.3, 0.7, 1.0):
            scaled = h(*(alpha * a for a in args))
            assert scaled == pytest.approx(alpha**h.homogeneity_degree * h(*args), abs=1e-10)


def test_incomplete_pattern_has_no_homogeneity_degree():
    r = np.zeros((3, 3))
    r[0, 1] = r[1, 0] = 1
    assert subgraph_density_kernel(r).homogeneity_degree is None


# ---------------------------------------------------------------------------
# MMD and degree variance


def test_mmd_identical_positions():
    labels = np.array([1, 1, 0, 0])
    kappa = lambda a, b: a @ b.T
    x = np.full((4, 1), 0.7)
    assert mmd_statistic(kappa, labels, cross_factor=2.0)(x) == pytest.approx(0.0)
    assert mmd_statistic(kappa, labels, cross_factor=1.0)(x) == pytest.approx(0.49)


def test_mmd_hand_value():
    labels = np.array([1, 1, 0, 0])
    kappa = lambda a, b: a @ b.T
    x = np.array([[1.0], [1.0], [0.0], [0.0]])
    assert mmd_statistic(kappa, labels)(x) == pytest.approx(1.0)


def test_mmd_requires_two_per_group():
    with pytest.raises(ValueError):
        mmd_statistic(lambda a, b: a @ b.T, np.array([1, 0, 0]))


def test_degree_variance_all_equal_is_zero():
    x = np.full((6, 2), 0.3)
    assert degree_variance_vstatistic(x) == pytest.approx(0.0, abs=1e-15)


def brute_degree_variance(x):
    n = len(x)
    total = 0.0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    total += (x[i] @ x[k]) * ((x[i] - x[j]) @ x[l])
    return total / n**4


def test_degree_variance_two_points():
    x = np.array([[1.0], [0.0]])
    assert degree_variance_vstatistic(x) == pytest.approx(brute_degree_variance(x))
    assert degree_variance_vstatistic(x) == pytest.approx(1 / 16)


def test_degree_variance_matches_brute_force():
    gen = SeededRng(2).generator()
    x = gen.random((8, 2)) * 0.5
    assert degree_variance_vstatistic(x) == pytest.approx(brute_degree_variance(x), rel=1e-12)


# ---------------------------------------------------------------------------
# evaluation


def test_exact_constant_configuration():
    h = average_degree_kernel()
    x = np.full((3, 1), 0.5)
    assert u_statistic_exact(h, x).value == pytest.approx(0.5)
    hk = subgraph_density_kernel(K3)
    x4 = np.full((4, 1), 0.5)
    assert u_statistic_exact(hk, x4).value == pytest.approx(0.25**3)


def test_exact_matches_brute_force():
    gen = SeededRng(3).generator()
    for m, maker in ((2, average_degree_kernel), (3, lambda: subgraph_density_kernel(K3))):
        h = maker()
        x = gen.random((9, 1)) * 0.8
        res = u_statistic_exact(h, x)
        assert res.mode == "exact" and res.tuples_used == math.comb(9, m)
        assert res.value == pytest.approx(brute_u_statistic(h, x), rel=1e-12)


def test_exact_budget():
    h = average_degree_kernel()
    x = np.zeros((1000, 1))
    with pytest.raises(TupleBudgetError):
        u_statistic_exact(h, x, budget=1000)


def test_mc_constant_kernel_exact():
    h = KernelSpec("const", 2, lambda t: np.full(t.shape[0], 3.25), True)
    x = np.zeros((30, 1))
    assert u_statistic_mc(h, x, 7, SeededRng(4)).value == pytest.approx(3.25)


def test_mc_single_sample():
    h = average_degree_kernel()
    x = np.arange(1, 4, dtype=float)[:, None] / 10
    res = u_statistic_mc(h, x, 1, SeededRng(5))
    pairs = [h(x[i], x[j]) for i, j in itertools.combinations(range(3), 2)]
    assert any(res.value == pytest.approx(p) for p in pairs)


def test_mc_close_to_exact_for_large_m():
    h = average_degree_kernel()
    gen = SeededRng(6).generator()
    x = gen.random((20, 1))
    exact = u_statistic_exact(h, x).value
    res = u_statistic_mc(h, x, 1_000_000, SeededRng(7))
    vals = [h(x[i], x[j]) for i, j in itertools.combinations(range(20), 2)]
    mc_se = np.std(vals) / 1000.0
    assert abs(res.value - exact) <= 4 * mc_se


def test_mc_unbiasedness():
    h = subgraph_density_kernel(K3)
    gen = SeededRng(8).generator()
    x = gen.random((12, 1))
    exact = u_statistic_exact(h, x).value
    estimates = [u_statistic_mc(h, x, 50, SeededRng(9).substream(k)).value for k in range(200)]
    pooled_se = np.std(estimates, ddof=1) / math.sqrt(len(estimates))
    assert abs(np.mean(estimates) - exact) <= 4 * pooled_se


# ---------------------------------------------------------------------------
# plug-in


def test_plug_in_requires_rotation_invariance():
    h = KernelSpec("bad", 2, lambda t: t[:, 0, 0], rotation_invariant=False)
    a = AdjacencyMatrix(np.ones((4, 4)) - np.eye(4))
    with pytest.raises(KernelInvarianceError):
        plug_in_u_statistic(a, 1, h)


def test_plug_in_noiseless_matches_true_positions():
    gen = SeededRng(10).generator()
    x = gen.random((50, 1)) * 0.9
    p = x @ x.T
    h = average_degree_kernel()
    xhat = ase(p, 1, augment=False)
    assert u_statistic_exact(h, xhat).value == pytest.approx(
        u_statistic_exact(h, x).value, abs=1e-6
    )


def test_plug_in_average_degree_consistency():
    f = BetaScalar(2, 3)
    rng = SeededRng(11)
    x = sample_latents(f, 500, rng.substream(0))
    a = sample_rdpg(x, rng.substream(1))
    res = plug_in_u_statistic(a, 1, average_degree_kernel())
    assert abs(res.value - 0.32) <= 0.05


def test_plug_in_triangle_consistency():
    f = BetaScalar(2, 3)
    rng = SeededRng(12)
    x = sample_latents(f, 500, rng.substream(0))
    a = sample_rdpg(x, rng.substream(1))
    res = plug_in_u_statistic(a, 1, subgraph_density_kernel(K3), mode="mc",
                              num_samples=300_000, rng=rng.substream(2))
    assert abs(res.value - 0.008) <= 0.01


def test_plug_in_error_shrinks_with_n():
    f = BetaScalar(2, 3)
    h = average_degree_kernel()
    gaps = {}
    for n in (200, 800):
        trial_gaps = []
        for t in range(20):
            rng = SeededRng(13).substream(n, t)
            x = sample_latents(f, n, rng.substream(0))
            a = sample_rdpg(x, rng.substream(1))
            u_true = u_statistic_exact(h, x).value
            u_hat = plug_in_u_statistic(a, 1, h).value
            trial_gaps.append(math.sqrt(n) * abs(u_hat - u_true))
        gaps[n] = np.median(trial_gaps)
    assert gaps[800] < gaps[200]


# ---------------------------------------------------------------------------
# inclusion means and bootstrap


def test_inclusion_means_constant_kernel():
    h = KernelSpec("const", 2, lambda t: np.full(t.shape[0], 2.5), True)
    x = np.zeros((6, 1))
    assert np.allclose(vertex_inclusion_means(h, x), 2.5)


def test_inclusion_means_match_brute_force():
    h = average_degree_kernel()
    gen = SeededRng(14).generator()
    x = gen.random((6, 1))
    means = vertex_inclusion_means(h, x)
    assert np.allclose(means, brute_inclusion_means(h, x), rtol=1e-12)


def test_inclusion_means_average_is_u_statistic():
    h = subgraph_density_kernel(K3)
    gen = SeededRng(15).generator()
    x = gen.random((8, 1))
    means = vertex_inclusion_means(h, x)
    assert means.mean() == pytest.approx(u_statistic_exact(h, x).value, rel=1e-12)


def test_additive_weighted_identity():
    # mean_i W_i * inclusion_mean_i  ==  direct per-tuple weighted average
    gen = SeededRng(16).generator()
    for trial in range(25):
        n = int(gen.integers(4, 11))
        m = int(gen.integers(2, 4))
        maker = average_degree_kernel if m == 2 else lambda: subgraph_density_kernel(K3)
        h = maker()
        x = gen.random((n, 1))
        w = gen.multinomial(n, np.full(n, 1 / n)).astype(float)
        means = vertex_inclusion_means(h, x)
        lhs = float(w @ means / n)
        rhs = brute_additive_weighted_sum(h, x, w)
        assert lhs == pytest.approx(rhs, rel=1e-10)


def test_inclusion_means_mc_unbiased():
    h = subgraph_density_kernel(K3)
    gen = SeededRng(17).generator()
    x = gen.random((10, 1))
    exact = vertex_inclusion_means(h, x)
    acc = np.zeros(10)
    reps = 300
    for k in range(reps):
        acc += vertex_inclusion_means(h, x, mode="mc", num_samples=40, rng=SeededRng(18).substream(k))
    assert np.allclose(acc / reps, exact, atol=0.01)


def test_bootstrap_determinism():
    h = average_degree_kernel()
    gen = SeededRng(19).generator()
    x = gen.random((40, 1))
    s1 = bootstrap_u_statistic(h, x, "additive", 25, SeededRng(20))
    s2 = bootstrap_u_statistic(h, x, "additive", 25, SeededRng(20))
    assert np.array_equal(s1.values, s2.values)
    e1 = bootstrap_u_statistic(h, x, "efron", 10, SeededRng(21))
    e2 = bootstrap_u_statistic(h, x, "efron", 10, SeededRng(21))
    assert np.array_equal(e1.values, e2.values)


def test_bootstrap_additive_centers_at_u_statistic():
    h = average_degree_kernel()
    gen = SeededRng(22).generator()
    x = gen.random((100, 1))
    s = bootstrap_u_statistic(h, x, "additive", 4000, SeededRng(23))
    u = u_statistic_exact(h, x).value
    assert s.meta["center"] == pytest.approx(u, rel=1e-12)
    assert s.values.mean() == pytest.approx(u, abs=4 * s.values.std() / math.sqrt(4000))


def test_bootstrap_schemes_agree_on_variance():
    # both weight schemes target the same limiting replicate variance
    f = BetaScalar(2, 3)
    rng = SeededRng(24)
    x = sample_latents(f, 400, rng.substream(0))
    add = bootstrap_u_statistic(average_degree_kernel(), x, "additive", 3000, rng.substream(1))
    efr = bootstrap_u_statistic(average_degree_kernel(), x, "efron", 3000, rng.substream(2))
    v_add = add.values.var(ddof=1)
    v_efr = efr.values.var(ddof=1)
    assert abs(v_add - v_efr) / v_efr <= 0.25


def test_bootstrap_weight_growth():
    # max per-tuple weight stays within C log^m n for the multinomial draws
    h = average_degree_kernel()
    for n in (50, 200, 1000):
        x = np.full((n, 1), 0.5)
        s = bootstrap_u_statistic(h, x, "additive", 200, SeededRng(25).substream(n))
        assert s.meta["max_tuple_weight"] <= 3 * math.log(n) ** h.m


def test_normalized_subgraph_density_dense_identity():
    # dense regime: the function literally equals plug-in / density^edges
    f = BetaScalar(2, 3)
    rng = SeededRng(26)
    x = sample_latents(f, 150, rng.substream(0))
    a = sample_rdpg(x, rng.substream(1))
    from graphboot.netstats import edge_density

    value = normalized_subgraph_density(a, 1, K3, mode="mc", num_samples=100_000,
                                        rng=rng.substream(2))
    plug = plug_in_u_statistic(a, 1, subgraph_density_kernel(K3), mode="mc",
                               num_samples=100_000, rng=rng.substream(2))
    assert value == pytest.approx(plug.value / edge_density(a) ** 3, rel=1e-9)


def test_normalized_subgraph_density_complete_graph():
    a = AdjacencyMatrix(np.ones((200, 200)) - np.eye(200))
    value = normalized_subgraph_density(a, 1, K3, mode="mc", num_samples=50_000,
                                        rng=SeededRng(27))
    assert abs(value - 1.0) <= 0.05


def test_normalized_subgraph_density_empty_graph():
    a = AdjacencyMatrix(np.zeros((10, 10)))
    with pytest.raises(ValueError):
        normalized_subgraph_density(a, 1, K3)
