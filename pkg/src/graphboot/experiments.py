"""Config-driven experiment harness.

Four experiments, each reproducing a synthetic study at desk scale:

* ``triangle-density`` — scalar-Beta inner-product graphs; bootstrap the
  plug-in triangle-pattern U-statistic and compare three confidence
  interval constructions against the analytic target.
* ``shortest-path`` — two-block SBM; bootstrap the average shortest path
  with the three whole-network resamplers against a Monte Carlo truth band.
* ``wasserstein-decay`` — matching-distance Wasserstein estimate between
  bootstrap replicates and fresh model draws across n.
* ``ustat-clt`` — replicate-variance check of the weighted bootstrap
  against the closed-form limiting variance.

Runners return plain result objects and optionally write delimited output
plus rendered figures into ``config.output_dir``.  Every stochastic step
draws from a stream keyed by (master seed, n, trial, purpose), so outputs
are byte-identical for a fixed seed regardless of worker count.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .graphs import AdjacencyMatrix
from .inference import CI_METHODS, ci, coverage_report, mc_truth
from .models import (
    BetaScalar,
    ConnectivityError,
    SbmParams,
    sample_connected,
    sample_latents,
    sample_rdpg,
    sample_sbm,
)
from .netboot import RESAMPLER_KINDS, RdpgResampler, bootstrap_statistic, fit_resampler
from .netstats import STATISTICS, triangle_density
from .graphdist import empirical_wasserstein
from .rng import SeededRng
from .spectral import SpectralError, ase
from .ustat import bootstrap_u_statistic, subgraph_density_kernel, average_degree_kernel

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "EXPERIMENTS",
    "run_triangle_density",
    "run_shortest_path",
    "run_wasserstein_decay",
    "run_ustat_clt",
    "run_experiment",
]

EXPERIMENTS = ("triangle-density", "shortest-path", "wasserstein-decay", "ustat-clt")

# Purpose tags for stream derivation (see module docstring).
_TRUTH, _TRIAL = 0, 1

_AUTO_EXACT_LIMIT = 2_000_000
MAX_TRIAL_FAILURE_RATE = 0.05


class ConfigError(ValueError):
    """Invalid experiment configuration; message carries the field path."""


@dataclass
class ExperimentConfig:
    """Flat configuration shared by all experiments (JSON-serializable)."""

    experiment: str
    n_values: list[int] = field(default_factory=lambda: [100, 200, 500])
    trials: int = 200
    bootstrap_samples: int = 100
    mc_tuples: int = 400
    embed_dim: int = 1
    seed: int = 0
    level: float = 0.95
    scheme: str = "additive"
    inclusion_mode: str = "mc"  # "exact" | "mc" | "auto"
    methods: list[str] = field(default_factory=list)
    beta_a: float = 2.0
    beta_b: float = 3.0
    sbm_base: list[list[float]] = field(default_factory=lambda: [[0.4, 0.5], [0.5, 0.7]])
    sbm_proportions: list[float] = field(default_factory=lambda: [0.5, 0.5])
    sbm_scale_nu: float = 5.0
    fit_blocks: int = 2
    nu_values: list[float] = field(default_factory=lambda: [3.0, 4.0, 5.0, 6.0, 7.0, 8.0])
    nu_mc_samples: int = 100
    mc_truth_samples: int = 10000
    max_attempts: int = 200
    wasserstein_samples: int = 30
    matching_restarts: int = 2
    clt_seeds: int = 10
    threads: int = 1
    output_dir: str = "out"
    figures: bool = True

    def __post_init__(self):
        self.n_values = [int(n) for n in self.n_values]
        self.methods = list(self.methods)
        self.nu_values = [float(v) for v in self.nu_values]
        self.sbm_base = [[float(x) for x in row] for row in self.sbm_base]
        self.sbm_proportions = [float(x) for x in self.sbm_proportions]
        if not self.methods:
            if self.experiment == "triangle-density":
                self.methods = list(CI_METHODS)
            elif self.experiment == "shortest-path":
                self.methods = list(RESAMPLER_KINDS)

    def validate(self) -> None:
        def positive(name, value):
            if value <= 0:
                raise ConfigError(f"{name}: must be positive, got {value}")

        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment: unknown {self.experiment!r}, choose from {EXPERIMENTS}")
        if not self.n_values:
            raise ConfigError("n_values: must be nonempty")
        for i, n in enumerate(self.n_values):
            if n < 2:
                raise ConfigError(f"n_values[{i}]: must be >= 2, got {n}")
        for name in ("trials", "bootstrap_samples", "mc_tuples", "embed_dim",
                     "mc_truth_samples", "max_attempts", "wasserstein_samples",
                     "matching_restarts", "clt_seeds", "threads", "fit_blocks",
                     "nu_mc_samples"):
            positive(name, getattr(self, name))
        if not (0.0 < self.level < 1.0):
            raise ConfigError(f"level: must be in (0, 1), got {self.level}")
        if self.scheme not in ("additive", "efron"):
            raise ConfigError(f"scheme: unknown {self.scheme!r}")
        if self.inclusion_mode not in ("exact", "mc", "auto"):
            raise ConfigError(f"inclusion_mode: unknown {self.inclusion_mode!r}")
        if self.experiment == "triangle-density":
            if not self.methods:
                raise ConfigError("methods: must be nonempty")
            for i, m in enumerate(self.methods):
                if m not in CI_METHODS:
                    raise ConfigError(f"methods[{i}]: unknown CI method {m!r}")
        if self.experiment == "shortest-path":
            if not self.methods:
                raise ConfigError("methods: must be nonempty")
            for i, m in enumerate(self.methods):
                if m not in RESAMPLER_KINDS:
                    raise ConfigError(f"methods[{i}]: unknown resampler {m!r}")
            SbmParams(np.array(self.sbm_base), np.array(self.sbm_proportions))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)


# ---------------------------------------------------------------------------
# CSV output


def _write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating,)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def _resolve_mode(cfg: ExperimentConfig, n: int, arity: int) -> str:
    if cfg.inclusion_mode != "auto":
        return cfg.inclusion_mode
    return "exact" if math.comb(n, arity) <= _AUTO_EXACT_LIMIT else "mc"


def _beta_triangle_target(cfg: ExperimentConfig) -> float:
    """E[(X1 X2)(X2 X3)(X3 X1)] = (E X^2)^3 for scalar latents."""
    return BetaScalar(cfg.beta_a, cfg.beta_b).moment(2) ** 3


# ---------------------------------------------------------------------------
# Triangle density experiment


@dataclass
class TriangleDensityResult:
    theta: float
    trial_rows: list[tuple]       # (n, trial, method, lower, upper, hit, length)
    coverage_rows: list[tuple]    # (method, n, trials, rate, mean_length)
    replicate_dumps: dict[int, np.ndarray]
    failures: int


def _triangle_trial(args) -> tuple[int, int, list, np.ndarray | None, bool]:
    cfg, n, trial = args
    root = SeededRng(cfg.seed)
    model_rng = root.substream(n, _TRIAL, trial, 0)
    boot_rng = root.substream(n, _TRIAL, trial, 1)
    kernel = subgraph_density_kernel(np.ones((3, 3)) - np.eye(3))
    f = BetaScalar(cfg.beta_a, cfg.beta_b)
    try:
        x = sample_latents(f, n, model_rng.substream(0))
        a = sample_rdpg(x, model_rng.substream(1))
        observed = triangle_density(a)
        xhat = ase(a, cfg.embed_dim, augment=True)
        mode = _resolve_mode(cfg, n, kernel.m)
        sample = bootstrap_u_statistic(
            kernel, xhat, cfg.scheme, cfg.bootstrap_samples, boot_rng,
            mode=mode, num_samples=cfg.mc_tuples, observed=observed,
        )
    except SpectralError:
        return n, trial, [(n, trial, m, None) for m in cfg.methods], None, True
    intervals = [(n, trial, m, ci(sample, cfg.level, m)) for m in cfg.methods]
    dump = sample.values if trial == 0 else None
    return n, trial, intervals, dump, False


def run_triangle_density(cfg: ExperimentConfig, write: bool = True) -> TriangleDensityResult:
    cfg.validate()
    theta = _beta_triangle_target(cfg)
    tasks = [(cfg, n, t) for n in cfg.n_values for t in range(cfg.trials)]
    results = _map_tasks(_triangle_trial, tasks, cfg.threads)

    trial_rows = []
    dumps: dict[int, np.ndarray] = {}
    by_key: dict[tuple, list] = {(n, m): [] for n in cfg.n_values for m in cfg.methods}
    failures = 0
    for n, trial, intervals, dump, failed in sorted(results, key=lambda r: (r[0], r[1])):
        failures += failed
        if dump is not None:
            dumps[n] = dump
        for item in intervals:
            _, _, method, interval = item
            by_key[(n, method)].append(interval)
            if interval is None:
                trial_rows.append((n, trial, method, "", "", 0, ""))
            else:
                hit = int(interval.contains(theta))
                trial_rows.append((n, trial, method, interval.lower, interval.upper, hit, interval.length))

    _check_failure_rate(failures, len(tasks))
    coverage_rows = []
    for n in cfg.n_values:
        for method in cfg.methods:
            report = coverage_report(by_key[(n, method)], theta)
            coverage_rows.append((method, n, report.trials, report.rate, report.mean_length))

    result = TriangleDensityResult(theta, trial_rows, coverage_rows, dumps, failures)
    if write:
        out = Path(cfg.output_dir)
        _write_csv(out / "triangle_trials.csv",
                   ["n", "trial", "method", "lower", "upper", "hit", "length"], trial_rows)
        _write_csv(out / "triangle_coverage.csv",
                   ["method", "n", "trials", "rate", "mean_length"], coverage_rows)
        for n, values in dumps.items():
            _write_csv(out / f"triangle_replicates_n{n}.csv", ["value"], [(v,) for v in values])
        if cfg.figures:
            from .figures import triangle_figures

            triangle_figures(result, cfg, out)
    return result


# ---------------------------------------------------------------------------
# Shortest path experiment


@dataclass
class ShortestPathResult:
    truth: dict[int, tuple[float, float]]     # n -> (mean, se)
    trial_rows: list[tuple]                   # (n, trial, resampler, observed, lower, upper, hit, length, attempts)
    coverage_rows: list[tuple]                # (resampler, n, trials, rate, mean_length)
    nu_rows: list[tuple]                      # (n, nu, mean, se)
    failures: int


def _sbm_params(cfg: ExperimentConfig, n: int, nu: float | None = None) -> SbmParams:
    scale = (cfg.sbm_scale_nu if nu is None else nu) / math.sqrt(n)
    return SbmParams(np.array(cfg.sbm_base) * scale, np.array(cfg.sbm_proportions))


def _connected_sbm_path_stat(cfg: ExperimentConfig, n: int, params: SbmParams, rng: SeededRng) -> float:
    stat = STATISTICS["average-shortest-path"]
    a, _ = sample_connected(lambda s: sample_sbm(params, n, s)[0], rng, cfg.max_attempts)
    return stat(a)


def _shortest_path_trial(args):
    cfg, n, trial, band = args
    root = SeededRng(cfg.seed)
    params = _sbm_params(cfg, n)
    stat = STATISTICS["average-shortest-path"]
    graph_rng = root.substream(n, _TRIAL, trial, 0)
    try:
        a, _ = sample_connected(lambda s: sample_sbm(params, n, s)[0], graph_rng, cfg.max_attempts)
        observed = stat(a)
        rows = []
        for k, kind in enumerate(cfg.methods):
            fit_rng = root.substream(n, _TRIAL, trial, 2 + 2 * k)
            boot_rng = root.substream(n, _TRIAL, trial, 3 + 2 * k)
            dim = cfg.embed_dim if kind == "rdpg" else cfg.fit_blocks
            resampler = fit_resampler(kind, a, dim, fit_rng)
            sample = bootstrap_statistic(
                resampler, stat, cfg.bootstrap_samples, boot_rng,
                require_connected=True, max_attempts=cfg.max_attempts, observed=observed,
            )
            interval = ci(sample, cfg.level, "std-observed")
            hit = int(interval.overlaps(*band))
            rows.append((n, trial, kind, observed, interval.lower, interval.upper,
                         hit, interval.length, sample.meta["total_attempts"], interval))
        return n, trial, rows, False
    except (SpectralError, ConnectivityError):
        return n, trial, [(n, trial, kind, "", "", "", 0, "", "", None) for kind in cfg.methods], True


def run_shortest_path(cfg: ExperimentConfig, write: bool = True) -> ShortestPathResult:
    cfg.validate()
    root = SeededRng(cfg.seed)
    stat = STATISTICS["average-shortest-path"]

    truth: dict[int, tuple[float, float]] = {}
    for n in cfg.n_values:
        params = _sbm_params(cfg, n)
        truth[n] = mc_truth(
            lambda s, n=n, params=params: _connected_sbm_path_stat(cfg, n, params, s),
            cfg.mc_truth_samples,
            root.substream(n, _TRUTH),
        )

    bands = {n: (m - 2 * se, m + 2 * se) for n, (m, se) in truth.items()}
    tasks = [(cfg, n, t, bands[n]) for n in cfg.n_values for t in range(cfg.trials)]
    results = _map_tasks(_shortest_path_trial, tasks, cfg.threads)

    trial_rows = []
    by_key: dict[tuple, list] = {(n, m): [] for n in cfg.n_values for m in cfg.methods}
    failures = 0
    for n, trial, rows, failed in sorted(results, key=lambda r: (r[0], r[1])):
        failures += failed
        for row in rows:
            interval = row[-1]
            by_key[(n, row[2])].append(interval)
            trial_rows.append(row[:-1])
    _check_failure_rate(failures, len(tasks))

    coverage_rows = []
    for n in cfg.n_values:
        for kind in cfg.methods:
            report = coverage_report(by_key[(n, kind)], truth[n])
            coverage_rows.append((kind, n, report.trials, report.rate, report.mean_length))

    nu_rows = []
    for i, nu in enumerate(cfg.nu_values):
        for n in cfg.n_values:
            params = _sbm_params(cfg, n, nu)
            mean, se = mc_truth(
                lambda s, n=n, params=params: _connected_sbm_path_stat(cfg, n, params, s),
                max(100, cfg.nu_mc_samples),
                root.substream(n, 2, i),
            )
            nu_rows.append((n, nu, mean, se))

    result = ShortestPathResult(truth, trial_rows, coverage_rows, nu_rows, failures)
    if write:
        out = Path(cfg.output_dir)
        _write_csv(out / "sp_trials.csv",
                   ["n", "trial", "resampler", "observed", "lower", "upper", "hit", "length", "attempts"],
                   trial_rows)
        _write_csv(out / "sp_coverage.csv",
                   ["resampler", "n", "trials", "rate", "mean_length"], coverage_rows)
        _write_csv(out / "sp_truth.csv", ["n", "mean", "se"],
                   [(n, m, se) for n, (m, se) in truth.items()])
        _write_csv(out / "nu_sweep.csv", ["n", "nu", "mean", "se"], nu_rows)
        if cfg.figures:
            from .figures import shortest_path_figures

            shortest_path_figures(result, cfg, out)
    return result


# ---------------------------------------------------------------------------
# Wasserstein decay experiment


@dataclass
class WassersteinResult:
    rows: list[tuple]  # (n, estimate)


def run_wasserstein_decay(cfg: ExperimentConfig, write: bool = True) -> WassersteinResult:
    cfg.validate()
    root = SeededRng(cfg.seed)
    f = BetaScalar(cfg.beta_a, cfg.beta_b)
    size = cfg.wasserstein_samples
    rows = []
    for n in cfg.n_values:
        rng = root.substream(n)
        x = sample_latents(f, n, rng.substream(0))
        a = sample_rdpg(x, rng.substream(1))
        resampler = RdpgResampler.fit(a, cfg.embed_dim)
        replicates = [resampler.resample(rng.substream(2, j)) for j in range(size)]
        fresh = [
            sample_rdpg(sample_latents(f, n, rng.substream(3, j)), rng.substream(4, j))
            for j in range(size)
        ]
        estimate = empirical_wasserstein(
            replicates, fresh, restarts=cfg.matching_restarts, rng=rng.substream(5)
        )
        rows.append((n, estimate))
    result = WassersteinResult(rows)
    if write:
        out = Path(cfg.output_dir)
        _write_csv(out / "wasserstein.csv", ["n", "estimate"], rows)
        if cfg.figures:
            from .figures import wasserstein_figure

            wasserstein_figure(result, cfg, out)
    return result


# ---------------------------------------------------------------------------
# Bootstrap variance (CLT scale) experiment


@dataclass
class UstatCltResult:
    rows: list[tuple]  # (seed_index, n, scaled_variance)
    median: float


def run_ustat_clt(cfg: ExperimentConfig, write: bool = True) -> UstatCltResult:
    cfg.validate()
    root = SeededRng(cfg.seed)
    n = cfg.n_values[0]
    kernel = average_degree_kernel()
    f = BetaScalar(cfg.beta_a, cfg.beta_b)
    rows = []
    for s in range(cfg.clt_seeds):
        rng = root.substream(n, _TRIAL, s)
        x = sample_latents(f, n, rng.substream(0))
        a = sample_rdpg(x, rng.substream(1))
        xhat = ase(a, cfg.embed_dim, augment=True)
        mode = _resolve_mode(cfg, n, kernel.m)
        sample = bootstrap_u_statistic(
            kernel, xhat, cfg.scheme, cfg.bootstrap_samples, rng.substream(2),
            mode=mode, num_samples=cfg.mc_tuples,
        )
        scaled = float(n * sample.values.var(ddof=1))
        rows.append((s, n, scaled))
    median = float(np.median([r[2] for r in rows]))
    result = UstatCltResult(rows, median)
    if write:
        out = Path(cfg.output_dir)
        _write_csv(out / "ustat_clt.csv", ["seed", "n", "scaled_variance"], rows)
        if cfg.figures:
            from .figures import clt_figure

            clt_figure(result, cfg, out)
    return result


# ---------------------------------------------------------------------------


def _check_failure_rate(failures: int, total: int) -> None:
    if total and failures / total > MAX_TRIAL_FAILURE_RATE:
        raise RuntimeError(
            f"trial failure rate {failures}/{total} exceeds "
            f"{MAX_TRIAL_FAILURE_RATE:.0%}; the configuration is not viable"
        )


def _map_tasks(fn, tasks, threads: int):
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (8 * threads))))


def default_config(experiment: str) -> ExperimentConfig:
    """Paper-derived defaults at desk scale for each experiment."""
    if experiment == "triangle-density":
        return ExperimentConfig(experiment=experiment, n_values=[100, 200, 500],
                                embed_dim=1, inclusion_mode="mc")
    if experiment == "shortest-path":
        return ExperimentConfig(experiment=experiment, n_values=[50, 100, 200], embed_dim=2)
    if experiment == "wasserstein-decay":
        return ExperimentConfig(experiment=experiment, n_values=[30, 60, 120], embed_dim=1)
    if experiment == "ustat-clt":
        return ExperimentConfig(experiment=experiment, n_values=[1000], embed_dim=1,
                                bootstrap_samples=2000, inclusion_mode="exact")
    raise ConfigError(f"experiment: unknown {experiment!r}, choose from {EXPERIMENTS}")


def run_experiment(cfg: ExperimentConfig, write: bool = True):
    runner = {
        "triangle-density": run_triangle_density,
        "shortest-path": run_shortest_path,
        "wasserstein-decay": run_wasserstein_decay,
        "ustat-clt": run_ustat_clt,
    }[cfg.experiment]
    return runner(cfg, write=write)
