"""Render experiment figures to files next to the delimited output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["triangle_figures", "shortest_path_figures", "wasserstein_figure", "clt_figure"]

_METHOD_COLORS = {
    "percentile": "tab:red",
    "std-boot-mean": "tab:green",
    "std-observed": "tab:blue",
    "rdpg": "tab:blue",
    "graphon": "tab:red",
    "sbm": "tab:green",
}


def _color(name: str):
    return _METHOD_COLORS.get(name, "tab:gray")


def _coverage_length_panels(coverage_rows, n_values, methods, level, title):
    fig, (ax_len, ax_cov) = plt.subplots(1, 2, figsize=(9.5, 3.8))
    table = {(m, n): (rate, length) for m, n, _, rate, length in coverage_rows}
    for m in methods:
        lengths = [table[(m, n)][1] for n in n_values]
        rates = [table[(m, n)][0] for n in n_values]
        ax_len.plot(n_values, lengths, "o-", color=_color(m), label=m)
        ax_cov.plot(n_values, rates, "o-", color=_color(m), label=m)
    ax_len.set_xlabel("number of vertices")
    ax_len.set_ylabel("mean CI length")
    ax_len.set_title(f"{title}: interval length")
    ax_cov.axhline(level, color="k", lw=0.8, ls="--")
    ax_cov.set_xlabel("number of vertices")
    ax_cov.set_ylabel("coverage rate")
    ax_cov.set_ylim(0, 1.05)
    ax_cov.set_title(f"{title}: coverage")
    ax_cov.legend(fontsize=8)
    fig.tight_layout()
    return fig


def triangle_figures(result, cfg, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    fig = _coverage_length_panels(
        result.coverage_rows, cfg.n_values, cfg.methods, cfg.level, "triangle density"
    )
    fig.savefig(out / "triangle_summary.png", dpi=150)
    plt.close(fig)

    if result.replicate_dumps:
        fig, ax = plt.subplots(figsize=(6, 3.8))
        for n, values in sorted(result.replicate_dumps.items()):
            ax.hist(values, bins=30, density=True, alpha=0.45, label=f"n={n}")
        ax.axvline(result.theta, color="red", lw=1.2, label="target")
        ax.set_xlabel("bootstrap replicate value")
        ax.set_ylabel("density")
        ax.set_title("triangle density: replicate distributions (first trial)")
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(out / "triangle_replicates.png", dpi=150)
        plt.close(fig)


def shortest_path_figures(result, cfg, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    fig = _coverage_length_panels(
        result.coverage_rows, cfg.n_values, cfg.methods, cfg.level, "average shortest path"
    )
    fig.savefig(out / "sp_summary.png", dpi=150)
    plt.close(fig)

    if result.nu_rows:
        fig, ax = plt.subplots(figsize=(6, 3.8))
        for n in cfg.n_values:
            rows = [(nu, m, se) for (nn, nu, m, se) in result.nu_rows if nn == n]
            if not rows:
                continue
            nus = np.array([r[0] for r in rows])
            means = np.array([r[1] for r in rows])
            ses = np.array([r[2] for r in rows])
            (line,) = ax.plot(nus, means, "o-", label=f"n={n}")
            ax.fill_between(nus, means - 2 * ses, means + 2 * ses,
                            color=line.get_color(), alpha=0.25)
        ax.set_xlabel("block matrix scale")
        ax.set_ylabel("mean average shortest path")
        ax.set_title("degree scaling vs. average shortest path")
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(out / "nu_sweep.png", dpi=150)
        plt.close(fig)


def wasserstein_figure(result, cfg, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    ns = [r[0] for r in result.rows]
    vals = [r[1] for r in result.rows]
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    ax.plot(ns, vals, "o-")
    ax.set_xlabel("number of vertices")
    ax.set_ylabel("matched transport cost")
    ax.set_title("bootstrap replicates vs fresh draws")
    fig.tight_layout()
    fig.savefig(out / "wasserstein.png", dpi=150)
    plt.close(fig)


def clt_figure(result, cfg, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    seeds = [r[0] for r in result.rows]
    vals = [r[2] for r in result.rows]
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    ax.plot(seeds, vals, "o")
    ax.axhline(result.median, color="tab:blue", lw=1.0, label=f"median {result.median:.4f}")
    ax.set_xlabel("seed")
    ax.set_ylabel("n * Var(replicates)")
    ax.set_title("weighted bootstrap replicate variance")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out / "ustat_clt.png", dpi=150)
    plt.close(fig)
