"""Figures for campaign and benchmark reports (written next to the CSV output)."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

PALETTE = {
    "w-greedy": "#7f7f7f",
    "otg": "#d62728",
    "wdr-greedy": "#1f77b4",
    "fr": "#2ca02c",
    "exact": "#9467bd",
}


def _color(name: str) -> str:
    return PALETTE.get(name, "#333333")


def plot_campaign(rows: list[dict], al_pool, path: str | Path) -> Path:
    """Four panels: UEs/slot, normalised geomean, normalised runtime, inter-tx gap by AL."""
    path = Path(path)
    names = [r["algorithm"] for r in rows]
    colors = [_color(n) for n in names]
    fig, axes = plt.subplots(1, 4, figsize=(15, 3.6))
    for ax, key, label in zip(
        axes[:3],
        ("ues_per_slot", "geomean_norm", "runtime_norm"),
        ("UEs scheduled per slot", "geomean throughput (norm.)", "runtime (norm.)"),
    ):
        ax.bar(names, [r[key] for r in rows], color=colors)
        ax.set_title(label, fontsize=10)
        ax.tick_params(axis="x", labelrotation=30, labelsize=8)
    ax = axes[3]
    for r, c in zip(rows, colors):
        ys = [r[f"intertx_al{al}"] for al in al_pool]
        ax.plot(list(al_pool), [y if not math.isnan(y) else None for y in ys], "o-", color=c, label=r["algorithm"])
    ax.set_xscale("log", base=2)
    ax.set_xticks(list(al_pool), [str(a) for a in al_pool])
    ax.set_xlabel("aggregation level")
    ax.set_title("slots between grants", fontsize=10)
    ax.legend(fontsize=7, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_bench(rows: list[dict], path: str | Path) -> Path:
    """Median solve time against UE count, one line per algorithm."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for name in dict.fromkeys(r["algorithm"] for r in rows):
        pts = sorted((r["n_ues"], r["median_runtime_s"]) for r in rows if r["algorithm"] == name)
        ax.plot([p[0] for p in pts], [p[1] * 1e3 for p in pts], "o-", color=_color(name), label=name)
    ax.set_yscale("log")
    ax.set_xlabel("UEs per slot")
    ax.set_ylabel("median solve time [ms]")
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
