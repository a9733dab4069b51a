"""Command-line interface.

Direct subcommands wrap single library operations (edge-list in, CSV out);
experiment subcommands run the full harnesses and write delimited output
plus rendered figures into the output directory.  Usage errors exit with
code 2; computational failures print one machine-readable line
``error <ExceptionType>: <message>`` on stderr and exit with code 1.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import experiments
from .graphs import read_edge_list, write_edge_list
from .graphdist import matching_distance_approx, matching_distance_exact
from .inference import CI_METHODS, ci
from .netboot import RESAMPLER_KINDS, bootstrap_statistic, fit_resampler
from .netstats import STATISTICS
from .rng import SeededRng
from .spectral import ase
from .ustat import (
    average_degree_kernel,
    bootstrap_u_statistic,
    subgraph_density_kernel,
)

KERNELS = {
    "average-degree": average_degree_kernel,
    "edge": lambda: subgraph_density_kernel(np.array([[0, 1], [1, 0]])),
    "triangle": lambda: subgraph_density_kernel(np.ones((3, 3)) - np.eye(3)),
}


def _read_graph(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return read_edge_list(text)


def _emit(lines, out: str | None):
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_stat(args) -> None:
    a = _read_graph(args.graph)
    stat = STATISTICS[args.stat]
    print(repr(float(stat(a))))


def _cmd_ase(args) -> None:
    a = _read_graph(args.graph)
    x = ase(a, args.d, augment=not args.no_augment, selection=args.selection)
    lines = [",".join(f"x{k}" for k in range(x.shape[1]))]
    lines += [",".join(repr(float(v)) for v in row) for row in x]
    _emit(lines, args.out)


def _cmd_dist(args) -> None:
    a1 = _read_graph(args.graph1)
    a2 = _read_graph(args.graph2)
    if args.exact:
        result = matching_distance_exact(a1, a2)
    else:
        result = matching_distance_approx(
            a1, a2, restarts=args.restarts, rng=SeededRng(args.seed)
        )
    print(repr(result.distance))
    if args.permutation:
        print(",".join(str(int(p)) for p in result.permutation))


def _cmd_ustat_boot(args) -> None:
    a = _read_graph(args.graph)
    kernel = KERNELS[args.kernel]()
    x = ase(a, args.d, augment=True, selection=args.selection)
    sample = bootstrap_u_statistic(
        kernel, x, args.scheme, args.B, SeededRng(args.seed),
        mode=args.mode, num_samples=args.M,
    )
    interval = ci(sample, args.level, args.method if args.method in CI_METHODS else "percentile")
    print(f"center {repr(float(sample.values.mean()))}")
    print(f"ci {repr(interval.lower)} {repr(interval.upper)}")
    if args.out:
        _emit(["value"] + [repr(float(v)) for v in sample.values], args.out)


def _cmd_net_boot(args) -> None:
    a = _read_graph(args.graph)
    stat = STATISTICS[args.stat]
    resampler = fit_resampler(args.method, a, args.d, SeededRng(args.seed).substream(0))
    sample = bootstrap_statistic(
        resampler, stat, args.B, SeededRng(args.seed).substream(1),
        require_connected=not stat.defined_on_disconnected,
        observed=stat(a),
    )
    _emit(["value"] + [repr(float(v)) for v in sample.values], args.out)


def _load_config(experiment: str, args) -> experiments.ExperimentConfig:
    base = asdict(experiments.default_config(experiment))
    if args.config:
        data = json.loads(Path(args.config).read_text())
        unknown = set(data) - set(base)
        if unknown:
            raise experiments.ConfigError(f"unknown config fields: {sorted(unknown)}")
        base.update(data)
    base["experiment"] = experiment
    for flag in ("trials", "B", "M", "seed", "threads", "output_dir", "level", "n_values"):
        value = getattr(args, flag.replace("-", "_"), None)
        if value is not None:
            key = {"B": "bootstrap_samples", "M": "mc_tuples"}.get(flag, flag)
            base[key] = value
    if getattr(args, "no_figures", False):
        base["figures"] = False
    cfg = experiments.ExperimentConfig(**base)
    cfg.validate()
    return cfg


def _cmd_experiment(experiment: str, args) -> None:
    cfg = _load_config(experiment, args)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(cfg.to_json() + "\n")
    result = experiments.run_experiment(cfg, write=True)
    if experiment == "triangle-density":
        print(f"target {repr(result.theta)}")
        for method, n, trials, rate, mean_length in result.coverage_rows:
            print(f"coverage {method} n={n} rate={rate:.3f} mean_length={repr(mean_length)}")
    elif experiment == "shortest-path":
        for kind, n, trials, rate, mean_length in result.coverage_rows:
            print(f"coverage {kind} n={n} rate={rate:.3f} mean_length={repr(mean_length)}")
    elif experiment == "wasserstein-decay":
        for n, estimate in result.rows:
            print(f"estimate n={n} {repr(estimate)}")
    else:
        print(f"median_scaled_variance {repr(result.median)}")
    print(f"outputs written to {out}")


def _add_seed(p):
    p.add_argument("--seed", type=int, default=0, help="master seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphboot",
        description="Bootstrap methods for networks with latent space structure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stat", help="evaluate a network statistic on an edge list")
    p.add_argument("graph", help="edge-list file, or - for stdin")
    p.add_argument("--stat", required=True, choices=sorted(STATISTICS))
    p.set_defaults(func=_cmd_stat)

    p = sub.add_parser("ase", help="adjacency spectral embedding to CSV")
    p.add_argument("graph")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--no-augment", action="store_true")
    p.add_argument("--selection", choices=("magnitude", "algebraic"), default="magnitude")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_ase)

    p = sub.add_parser("dist", help="graph matching distance between two edge lists")
    p.add_argument("graph1")
    p.add_argument("graph2")
    p.add_argument("--exact", action="store_true", help="exact enumeration (n <= 9)")
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--permutation", action="store_true", help="also print the matching")
    _add_seed(p)
    p.set_defaults(func=_cmd_dist)

    p = sub.add_parser("ustat-boot", help="bootstrap a latent-position U-statistic")
    p.add_argument("graph")
    p.add_argument("--kernel", choices=sorted(KERNELS), default="triangle")
    p.add_argument("--scheme", choices=("additive", "efron"), default="additive")
    p.add_argument("--B", type=int, default=100)
    p.add_argument("--M", type=int, default=400, help="MC tuples per vertex")
    p.add_argument("--mode", choices=("exact", "mc"), default="mc")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--method", choices=CI_METHODS, default="percentile")
    p.add_argument("--selection", choices=("magnitude", "algebraic"), default="magnitude")
    p.add_argument("--out", help="replicate dump CSV")
    _add_seed(p)
    p.set_defaults(func=_cmd_ustat_boot)

    p = sub.add_parser("net-boot", help="whole-network bootstrap of a statistic")
    p.add_argument("graph")
    p.add_argument("--method", choices=RESAMPLER_KINDS, required=True)
    p.add_argument("--stat", choices=sorted(STATISTICS), default="average-shortest-path")
    p.add_argument("--B", type=int, default=100)
    p.add_argument("--d", type=int, default=2, help="embedding dimension / block count")
    p.add_argument("--out", help="replicate dump CSV")
    _add_seed(p)
    p.set_defaults(func=_cmd_net_boot)

    for name in experiments.EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON config file (partial overrides allowed)")
        p.add_argument("--n-values", type=lambda s: [int(v) for v in s.split(",")],
                       dest="n_values", default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--B", type=int, default=None, dest="B")
        p.add_argument("--M", type=int, default=None, dest="M")
        p.add_argument("--level", type=float, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--output-dir", default=None, dest="output_dir")
        p.add_argument("--no-figures", action="store_true")
        p.add_argument("--seed", type=int, default=None)
        p.set_defaults(func=lambda args, name=name: _cmd_experiment(name, args))

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # computational failure: one machine-readable line
        print(f"error {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
