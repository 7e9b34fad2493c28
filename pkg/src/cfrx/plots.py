"""Report figures rendered to files: confusion-matrix heatmap, per-CF
change arrows, and importance bar charts. File output only (Agg backend),
so these run headless alongside the CSV/JSON the CLI writes."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_confusion_matrix_png(confusion: dict, path, class_names=("SSRI (0)", "SNRI (1)")) -> None:
    counts = np.array([
        [confusion["tn"], confusion["fp"]],
        [confusion["fn"], confusion["tp"]],
    ])
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    im = ax.imshow(counts, cmap="Blues")
    for (i, j), v in np.ndenumerate(counts):
        color = "white" if v > counts.max() / 2 else "black"
        ax.text(j, i, str(v), ha="center", va="center", color=color, fontsize=12)
    ax.set_xticks([0, 1], [class_names[0], class_names[1]])
    ax.set_yticks([0, 1], [class_names[0], class_names[1]])
    ax.set_xlabel("Predicted")
    ax.set_ylabel("Actual")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_cf_diff_png(cf_set, schema, path) -> None:
    """One panel per counterfactual; each changed feature drawn as an arrow
    from its original value to the new one, annotated with the signed delta."""
    cfs = cf_set.cfs
    if not cfs:
        raise ValueError("no counterfactuals to plot")
    height = max(2.0, 0.55 * sum(max(len(c.diff), 1) for c in cfs) + 0.8 * len(cfs))
    fig, axes = plt.subplots(len(cfs), 1, figsize=(6.5, height), squeeze=False)
    max_val = max((f.max_level if f.kind == "ordinal" else f.max) for f in schema.features)
    for ax, (idx, cf) in zip(axes.ravel(), enumerate(cfs)):
        if not cf.diff:
            ax.text(0.5, 0.5, "no changes", ha="center", va="center")
            ax.set_axis_off()
            continue
        names = [d.feature for d in cf.diff]
        ys = np.arange(len(names))[::-1]
        for y, d in zip(ys, cf.diff):
            ax.annotate(
                "", xy=(d.new, y), xytext=(d.old, y),
                arrowprops=dict(arrowstyle="->", color="tab:red" if d.delta < 0 else "tab:green", lw=2),
            )
            ax.plot([d.old], [y], "o", color="gray", ms=5)
            ax.text(max(d.old, d.new) + 0.15, y, f"{d.delta:+g}", va="center", fontsize=9)
        ax.set_yticks(ys, names)
        ax.set_xlim(-0.5, max_val + 0.9)
        ax.set_xlabel("score")
        ax.set_title(f"counterfactual {idx + 1} (p={cf.predicted_probability:.2f})", fontsize=10)
        ax.grid(axis="x", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_importance_png(report, path, top: int | None = None) -> None:
    ranked = report.ranked()
    if top:
        ranked = ranked[:top]
    names = [n for n, _ in ranked][::-1]
    scores = [s for _, s in ranked][::-1]
    fig, ax = plt.subplots(figsize=(6.0, 0.32 * len(names) + 1.4))
    ax.barh(names, scores, color="tab:blue")
    ax.set_xlabel("change frequency")
    ax.set_xlim(0, 1.0)
    ax.set_title(f"{report.scope} feature importance "
                 f"({report.instances_covered} instance{'s' if report.instances_covered != 1 else ''})",
                 fontsize=10)
    ax.grid(axis="x", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
