"""Figures for the report paths of the command line tool.

Everything renders off-screen with the Agg backend straight to a file.
"""
from __future__ import annotations

import math
import re

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .harness import GraphPairReport, SweepReport, parse_sweep_config  # noqa: E402

_CONFIG = re.compile(r"b\d+o\d+")


def _save(fig, path):
    fig.tight_layout()
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, dpi=120, metadata={"Software": None} if str(path).endswith(".png") else None)
    plt.close(fig)


def sweep_heatmap(report: SweepReport, path, title: str = "") -> None:
    """Rank correlation per (block size, overlap) cell; skipped configs stay blank."""
    cells = {}
    for row in report.rows:
        if not _CONFIG.fullmatch(row.name) or row.rho is None:
            continue
        cells[parse_sweep_config(row.name)] = row.rho
    if not cells:
        raise ValueError("no configuration rows with a correlation value to plot")
    size = max(max(b for b, _ in cells), 1)
    grid = np.full((size, size), np.nan)
    for (b, o), rho in cells.items():
        grid[o, b - 1] = rho
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    im = ax.imshow(grid, origin="lower", cmap="viridis", vmin=-1, vmax=1,
                   extent=(0.5, size + 0.5, -0.5, size - 0.5))
    ax.set_xlabel("block size")
    ax.set_ylabel("overlap")
    ax.set_title(title or f"Spearman rho vs {report.rows[0].reference}")
    fig.colorbar(im, ax=ax, label="rho")
    _save(fig, path)


def measure_scatter(xs, ys, path, xlabel: str, ylabel: str, labels=None, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.scatter(xs, ys, s=14, alpha=0.7)
    if labels is not None:
        for x, y, text in zip(xs, ys, labels):
            if text:
                ax.annotate(text, (x, y), fontsize=7)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    _save(fig, path)


def graph_pair_scatter(report: GraphPairReport, path) -> None:
    xs = [r[3] for r in report.rows]
    ys = [r[4] for r in report.rows]
    rho = "n/a" if report.rho is None else f"{report.rho:.3f}"
    measure_scatter(xs, ys, path, "BDM of graph (bits)", "BDM of line graph (bits)",
                    title=f"{report.config.label()}  rho={rho}")


def distribution_plot(values, path, title: str = "") -> None:
    """Block complexities sorted from simplest to most complex."""
    vals = sorted(values)
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.plot(range(1, len(vals) + 1), vals, lw=1)
    ax.set_xlabel("rank")
    ax.set_ylabel("bits")
    ax.set_xscale("log" if len(vals) > 50 else "linear")
    if title:
        ax.set_title(title)
    ax.set_ylim(bottom=math.floor(min(vals)))
    _save(fig, path)
