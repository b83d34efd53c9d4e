"""Report figures.  Every function writes one file and returns its path."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 100,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def figsize(width=5.0):
    return width, width * GOLDEN


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def reduction_bars(comparisons, path):
    """Computed vs stated energy and EDP reduction per benchmark."""
    names = [c.name for c in comparisons]
    x = np.arange(len(names))
    with plt.rc_context(RC):
        fig, (ax_e, ax_d) = plt.subplots(1, 2, figsize=figsize(7.0))
        for ax, key, title in ((ax_e, "energy", "energy"), (ax_d, "edp", "energy-delay product")):
            attr, stated = f"{key}_reduction_pct", f"stated_{key}_reduction_pct"
            ax.bar(x - 0.2, [float(getattr(c, attr)) for c in comparisons], 0.4, label="recomputed")
            ax.bar(x + 0.2, [float(getattr(c, stated)) for c in comparisons], 0.4, label="stated")
            for i, c in enumerate(comparisons):
                if f"BASELINE_MISMATCH:{key}" in c.flags:
                    ax.annotate("mismatch", (i, float(getattr(c, attr))), ha="center", va="bottom",
                                fontsize=7, color="C3")
            lo = min(min(float(getattr(c, attr)), float(getattr(c, stated))) for c in comparisons)
            ax.set_ylim(max(0.0, lo - 2.0), 100.0)
            ax.set_xticks(x, names)
            ax.set_ylabel("% reduction vs LUT")
            ax.set_title(title)
        ax_e.legend(loc="lower left")
        fig.tight_layout()
        return _save(fig, path)


def node_counts(study: dict, path):
    """TLG node count vs fan-in limit, one line per benchmark."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=figsize())
        for name, counts in study.items():
            limits = sorted(counts)
            base = counts[limits[-1]]
            ax.plot(limits, [counts[k] / base for k in limits], marker="o", label=name)
        ax.set_xlabel("fan-in limit")
        ax.set_ylabel("TLG nodes (relative to widest limit)")
        ax.set_xticks(sorted({k for c in study.values() for k in c}))
        ax.legend()
        return _save(fig, path)


def stage_profile(p, path):
    """Logic and buffer nodes per pipeline stage."""
    from .pipeline import _is_buffer

    logic = [sum(not _is_buffer(n) for n in s) for s in p.stages]
    bufs = [sum(_is_buffer(n) for n in s) for s in p.stages]
    k = np.arange(1, p.depth + 1)
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=figsize())
        ax.bar(k, logic, label="logic TLGs")
        ax.bar(k, bufs, bottom=logic, label="buffers")
        ax.set_xlabel("pipeline stage")
        ax.set_ylabel("nodes")
        ax.legend()
        return _save(fig, path)


def failure_curves(curves: dict, path, bounds: dict | None = None):
    """Monte Carlo failure rate vs sigma.  ``curves[label] = (sigmas, rates)``."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=figsize())
        for i, (label, (sigmas, rates)) in enumerate(curves.items()):
            ax.plot(sigmas, rates, marker=".", label=label, color=f"C{i}")
            if bounds and label in bounds:
                ax.axvline(bounds[label], color=f"C{i}", ls=":", lw=0.8)
        ax.set_xlabel("relative conductance sigma")
        ax.set_ylabel("failure rate")
        ax.legend()
        return _save(fig, path)
