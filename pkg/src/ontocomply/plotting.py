"""Report figures.  Agg backend only; PNGs carry no timestamp so reruns are byte-stable."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (6.0, 3.6),
    "figure.dpi": 100,
    "font.size": 8,
    "font.family": "DejaVu Sans",
    "axes.linewidth": 0.6,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "legend.fontsize": 7,
    "legend.frameon": False,
    "xtick.major.width": 0.6,
    "ytick.major.width": 0.6,
    "savefig.dpi": 150,
    "svg.hashsalt": "ontocomply",
}

MODEL_LABELS = {"deepwalk": "DeepWalk", "node2vec": "Node2Vec", "struc2vec": "Struc2Vec"}


def _save(fig, path) -> None:
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)


def plot_sweep(original, reshaped, path) -> None:
    """Matching-level sweep: rates of both ontology scopes against max level."""
    with plt.rc_context(STYLE):
        fig, (left, right) = plt.subplots(1, 2)
        levels = [r.max_level for r in reshaped]
        left.plot(levels, [100 * r.matching_rate for r in reshaped], "o-", label="matching rate")
        left.plot(levels, [100 * r.confidence for r in reshaped], "s--", label="confidence")
        left.set_xlabel("max matching level")
        left.set_ylabel("%")
        left.set_xticks(levels)
        left.legend()
        right.plot(levels, [100 * r.used_entity_rate for r in original], "o-", label="original ontology")
        right.plot(levels, [100 * r.used_entity_rate for r in reshaped], "s-", label="reshaped ontology")
        right.set_xlabel("max matching level")
        right.set_ylabel("used entity rate (%)")
        right.set_xticks(levels)
        right.legend()
        fig.tight_layout()
        _save(fig, path)


def plot_topk(table, path) -> None:
    """Grouped hit@k bars with sd whiskers, one panel per model."""
    data = table.to_dict()
    models = list(data)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(models), sharey=True, squeeze=False)
        for ax, model in zip(axes[0], models):
            variants = list(data[model])
            ks = sorted(data[model][variants[0]], key=int)
            x = np.arange(len(ks))
            width = 0.8 / len(variants)
            for i, v in enumerate(variants):
                means = [100 * data[model][v][k]["mean"] for k in ks]
                sds = [100 * data[model][v][k]["sd"] for k in ks]
                label = v
                ax.bar(x + (i - (len(variants) - 1) / 2) * width, means, width, yerr=sds,
                       capsize=2, label=label, error_kw={"linewidth": 0.6})
            ax.set_xticks(x)
            ax.set_xticklabels([f"@{k}" for k in ks])
            ax.set_title(MODEL_LABELS.get(model, model))
            ax.set_ylim(0, 105)
        axes[0][0].set_ylabel("hit rate (%)")
        axes[0][-1].legend(loc="lower right")
        fig.tight_layout()
        _save(fig, path)


def plot_accuracy(curves: dict, path) -> None:
    """Per-fragment classification accuracy against abstraction level."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ticks = set()
        for name in sorted(curves):
            levels = sorted(curves[name], key=int)
            means = [curves[name][lv]["mean"] for lv in levels]
            sds = [curves[name][lv]["sd"] for lv in levels]
            ticks.update(int(lv) for lv in levels)
            ax.errorbar([int(lv) for lv in levels], means, yerr=sds, marker="o", capsize=2, label=name)
        ax.set_xticks(sorted(ticks))
        ax.set_xlabel("abstraction level")
        ax.set_ylabel("classification accuracy")
        ax.set_ylim(0, 1.05)
        ax.legend()
        fig.tight_layout()
        _save(fig, path)
