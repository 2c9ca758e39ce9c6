"""Figure rendering for benchmark reports (PNG files next to the CSV/JSON)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_POLICY_COLORS = {"aig": "tab:blue", "plain_gradient": "tab:orange", "random": "tab:gray"}


def _color(policy):
    return _POLICY_COLORS.get(policy, "tab:green")


def render_curve_figure(curves_by_policy, x_label, out_path, title):
    fig, ax = plt.subplots(figsize=(6, 4))
    for policy, curve in curves_by_policy.items():
        xs = [p.x_value for p in curve]
        ys = [p.accuracy for p in curve]
        if x_label.startswith("accumulated"):
            ax.step(xs, ys, where="post", label=policy, color=_color(policy))
        else:
            ax.plot(xs, ys, label=policy, color=_color(policy))
    ax.set_xlabel(x_label)
    ax.set_ylabel("accuracy")
    ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)


def render_heatmap_figure(heatmap, out_path, title):
    ranks = np.asarray(heatmap.matrix, dtype=np.float64)
    d = ranks.shape[1]
    # Warmer colours mean earlier acquisition; never-acquired stays at 0.
    priority = np.where(ranks > 0, d - ranks + 1, 0.0)
    fig, ax = plt.subplots(figsize=(max(4, min(12, d * 0.3)), 3.2))
    im = ax.imshow(priority, aspect="auto", cmap="hot", interpolation="nearest")
    ax.set_xlabel("feature index")
    ax.set_ylabel("test sample")
    ax.set_title(title)
    fig.colorbar(im, ax=ax, label="acquisition priority")
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)


def render_report(report, out_dir):
    out = Path(out_dir)
    render_curve_figure(
        {name: axes["count"] for name, axes in report.curves.items()},
        "acquired feature count", out / "curve_count.png", "Accuracy vs feature count",
    )
    render_curve_figure(
        {name: axes["cost"] for name, axes in report.curves.items()},
        "accumulated cost", out / "curve_cost.png", "Accuracy vs accumulated cost",
    )
    for name, heatmap in report.heatmaps.items():
        render_heatmap_figure(
            heatmap, out / f"heatmap_{name}.png", f"Acquisition order ({name})"
        )
