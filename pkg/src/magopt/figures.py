"""Convergence figures rendered to files, for the CLI's report path.

Deliberately separate from the harness: the library emits delimited data,
and only the CLI asks for pictures. Uses the non-interactive backend so it
works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_convergence_figure"]


def save_convergence_figure(traces: dict, path, title: str = "") -> None:
    """Best-so-far curves per arm with a bold per-algorithm median.

    ``traces`` maps (algorithm, seed) to a RunTrace (or to a best_so_far
    array, which is what reading plot data back produces). Saved to ``path``
    in whatever format its extension implies.
    """
    curves: dict = {}
    for (algo, seed), tr in traces.items():
        best = tr if isinstance(tr, np.ndarray) else tr.best_curve()
        curves.setdefault(algo, []).append(np.asarray(best, dtype=float))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    positive = all(np.all(c[np.isfinite(c)] > 0) for cs in curves.values()
                   for c in cs if np.isfinite(c).any())
    for k, (algo, cs) in enumerate(sorted(curves.items())):
        color = colors[k % len(colors)]
        for c in cs:
            ax.plot(np.arange(1, c.size + 1), c, color=color, alpha=0.25, lw=0.8)
        shortest = min(c.size for c in cs)
        stack = np.vstack([c[:shortest] for c in cs])
        ax.plot(np.arange(1, shortest + 1), np.median(stack, axis=0),
                color=color, lw=2.0, label=algo)
    if positive:
        ax.set_yscale("log")
    ax.set_xlabel("evaluations")
    ax.set_ylabel("best objective value")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
