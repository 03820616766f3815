"""Figure rendering for campaign reports.

Renders the standard convergence / comparison / sweep views to image files
next to the CSV output.  The CSV remains the machine contract; these figures
are the human-readable report.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .traces import AggregateSeries

_DPI = 150


def plot_convergence(series: AggregateSeries, path: str | Path, title: str | None = None) -> None:
    """Delta versus iteration, mean with a +-1 std band and the median dashed."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    it = series.iteration
    ax.plot(it, series.mean_delta, color="tab:blue", label="mean")
    ax.plot(it, series.median_delta, color="tab:orange", linestyle="--", label="median")
    lower = np.clip(series.mean_delta - series.std_delta, 1e-12, None)
    ax.fill_between(it, lower, series.mean_delta + series.std_delta,
                    color="tab:blue", alpha=0.2, linewidth=0)
    ax.set_xlabel("iteration")
    ax.set_ylabel(r"$\Delta = |S_{ref} - S_{best}|$")
    if np.all(series.mean_delta > 0):
        ax.set_yscale("log")
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_comparison(curves: dict, path: str | Path) -> None:
    """Evaluation-matched mean Delta curves of several optimizers."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, curve in curves.items():
        ax.plot(curve["evals"], curve["mean_delta"], label=label)
    ax.set_xlabel("oracle evaluations")
    ax.set_ylabel(r"mean $\Delta$")
    ax.set_yscale("log")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def plot_sweep(values: list[float], final_mean_deltas: list[float],
               parameter: str, path: str | Path) -> None:
    """Final mean Delta versus the swept parameter."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(values, final_mean_deltas, marker="o")
    ax.set_xlabel(parameter)
    ax.set_ylabel(r"final mean $\Delta$")
    if all(d > 0 for d in final_mean_deltas):
        ax.set_yscale("log")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
