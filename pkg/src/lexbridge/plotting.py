"""Precision-vs-k trend figures."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read_trend_csv(text: str):
    rows = list(csv.DictReader(io.StringIO(text)))
    ks = [int(r["k"]) for r in rows]
    return ks, [float(r["precision"]) for r in rows], [float(r["baseline_precision"]) for r in rows]


def plot_trend(curves: dict[str, str], path: str | Path, title: str = "") -> None:
    """Draw one precision curve per entry of ``curves`` (label -> trend CSV
    text) plus the random baseline of the first entry, on a log k axis."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    baseline_drawn = False
    for label, text in curves.items():
        ks, prec, base = read_trend_csv(text)
        ax.plot(ks, prec, marker="o", ms=3, label=label)
        if not baseline_drawn:
            ax.plot(ks, base, ls="--", color="grey", label=f"{label} (RD)")
            baseline_drawn = True
    ax.set_xscale("log")
    ax.set_ylim(0, 1.02)
    ax.set_xlabel("k")
    ax.set_ylabel("precision at top-k")
    if title:
        ax.set_title(title)
    ax.grid(True, which="major", alpha=0.3)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)
