"""Learning-curve figures (SVG) from aggregated benchmark results.

Needs matplotlib, which is imported lazily so that the rest of the package
works without it.
"""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np

from .harness import Curves

__all__ = ["read_curves", "smooth", "plot_curves"]


def read_curves(path) -> Curves:
    """Load an ``aggregate.csv`` written by :func:`tamdp.harness.write_results`."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path} holds no rows")
    return Curves(
        episode=np.array([int(r["episode"]) for r in rows]),
        mean=np.array([float(r["mean"]) for r in rows]),
        std=np.array([float(r["std"]) for r in rows]),
        phase=np.array([int(r["phase"]) for r in rows]),
        objective=[r["objective"] for r in rows],
    )


def smooth(x: np.ndarray, window: int) -> np.ndarray:
    """Trailing moving average; the first values average what is available."""
    if window <= 1:
        return np.asarray(x, dtype=float)
    c = np.cumsum(np.insert(np.asarray(x, dtype=float), 0, 0.0))
    idx = np.arange(1, len(x) + 1)
    lo = np.maximum(idx - window, 0)
    return (c[idx] - c[lo]) / (idx - lo)


def plot_curves(curves: Sequence[Curves], labels: Sequence[str], out_path, window: int = 50,
                title: str | None = None) -> Path:
    """Mean outcome per episode for one or more algorithms, phase borders marked."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if len(curves) != len(labels):
        raise ValueError("need one label per curve set")
    fig, ax = plt.subplots(figsize=(10, 4))
    for c, label in zip(curves, labels):
        m = smooth(c.mean, window)
        s = smooth(c.std, window)
        ax.plot(c.episode, m, lw=1.0, label=label)
        ax.fill_between(c.episode, m - s, m + s, alpha=0.15, lw=0)
    ref = curves[0]
    starts = np.flatnonzero(np.diff(ref.phase)) + 1
    for b in starts:
        ax.axvline(ref.episode[b], color="0.6", lw=0.6, ls=":")
    bounds = np.concatenate(([0], starts, [len(ref.episode)]))
    ymax = ax.get_ylim()[1]
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        ax.text((ref.episode[lo] + ref.episode[hi - 1]) / 2, ymax, ref.objective[lo],
                ha="center", va="bottom", fontsize=8)
    ax.set_xlabel("episode")
    ax.set_ylabel("outcome")
    if title:
        ax.set_title(title, pad=14)
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    out = Path(out_path)
    fig.savefig(out, format="svg")
    plt.close(fig)
    return out
