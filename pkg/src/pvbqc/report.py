"""Figures written next to the tabular output.

matplotlib is imported lazily and forced onto the Agg backend so the CLI
works headless; it is only needed when a figure path is requested.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

COLORS = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a"]


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_sweep(rows: Sequence[dict], path: str | Path, title: str | None = None) -> Path:
    """Acceptance rate (with 3-sigma binomial bars) and mean failure count against the swept axis."""
    plt = _pyplot()
    axis = rows[0]["axis"]
    xs = [float(r["value"]) for r in rows]
    rate = [r["acceptance_rate"] for r in rows]
    err = [3 * math.sqrt(max(a * (1 - a), 0.0) / r["trials"]) for a, r in zip(rate, rows)]
    fails = [r["mean_failures"] for r in rows]

    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    ax.errorbar(xs, rate, yerr=err, marker="o", ms=4, lw=1, capsize=2, color=COLORS[0], label="acceptance rate")
    ax.set_xlabel({"q": "error probability q", "p": "channel flip probability p", "n": "qubits n", "C": "threshold C"}.get(axis, axis))
    ax.set_ylabel("acceptance rate")
    ax.set_ylim(-0.05, 1.05)

    ax2 = ax.twinx()
    ax2.plot(xs, fails, marker="s", ms=3, lw=1, ls="--", color=COLORS[1], label="mean $K_1+K_2$")
    ax2.set_ylabel("mean failures")

    lines = ax.get_legend_handles_labels()
    lines2 = ax2.get_legend_handles_labels()
    ax.legend(lines[0] + lines2[0], lines[1] + lines2[1], loc="best", fontsize=8, frameon=False)
    if title:
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def plot_failure_histogram(rows: Sequence[dict], threshold: float, path: str | Path) -> Path:
    plt = _pyplot()
    counts = [r["K1"] + r["K2"] for r in rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    hi = max(counts + [int(math.ceil(threshold))]) + 1
    ax.hist(counts, bins=range(0, hi + 1), color=COLORS[2], alpha=0.8, align="left")
    ax.axvline(threshold, color=COLORS[3], ls="--", lw=1, label=f"C = {threshold:.4g}")
    ax.set_xlabel("$K_1 + K_2$")
    ax.set_ylabel("trials")
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
