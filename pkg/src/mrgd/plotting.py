"""Figure rendering for sweep reports.

Renders to files next to the delimited output; never opens a window.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .core import is_infinite
from .harness import SweepRow


def _t_label(T) -> str:
    return "inf" if is_infinite(T) else str(T)


def plot_precision_recall(rows: Sequence[SweepRow], path) -> Path:
    """Recall vs. hallucination rate, one curve per (k, T), points along w."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    groups: dict[tuple, list[SweepRow]] = {}
    for row in rows:
        groups.setdefault((row.k, _t_label(row.T)), []).append(row)
    for (k, t_label), group in sorted(groups.items()):
        group = sorted(group, key=lambda r: r.w)
        xs = [r.report.recall for r in group]
        ys = [r.report.c_instance for r in group]
        ax.plot(xs, ys, marker="o", label=f"k={k}, T={t_label}")
        for r in group:
            ax.annotate(f"w={r.w:g}", (r.report.recall, r.report.c_instance),
                        fontsize=7, xytext=(3, 3), textcoords="offset points")
    ax.set_xlabel("object recall")
    ax.set_ylabel("hallucination rate (instance-level)")
    ax.set_title("Precision-recall trade-off across guidance strength")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    out = Path(path)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out


def plot_compute_tradeoff(rows: Sequence[SweepRow], path) -> Path:
    """Hallucination rate vs. candidate count, one curve per (w, T)."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    groups: dict[tuple, list[SweepRow]] = {}
    for row in rows:
        groups.setdefault((row.w, _t_label(row.T)), []).append(row)
    for (w, t_label), group in sorted(groups.items()):
        group = sorted(group, key=lambda r: r.k)
        xs = [r.k for r in group]
        ys = [r.report.c_instance for r in group]
        ax.plot(xs, ys, marker="s", label=f"w={w:g}, T={t_label}")
    ax.set_xlabel("candidates per round (k)")
    ax.set_ylabel("hallucination rate (instance-level)")
    ax.set_title("Compute vs. grounding trade-off")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    out = Path(path)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out


def render_sweep_figures(rows: Sequence[SweepRow], out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return [
        plot_precision_recall(rows, out_dir / "precision_recall.png"),
        plot_compute_tradeoff(rows, out_dir / "compute_tradeoff.png"),
    ]
