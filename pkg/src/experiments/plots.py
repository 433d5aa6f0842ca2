"""Loss and rank trajectories as SVG figures."""

from typing import Optional

import numpy as np
from matplotlib.figure import Figure

from src.trainer.trace import TrainingTrace

# Losses are clipped here before going on a log axis.
LOSS_FLOOR = 1e-300


def loss_figure(trace: TrainingTrace, title: Optional[str] = None) -> Figure:
    """Minibatch loss at every step and full loss at monitored steps, log scale."""
    fig = Figure(figsize=(7, 4))
    ax = fig.add_subplot(1, 1, 1)
    steps = [row.step for row in trace if row.minibatch_loss is not None]
    batch = [row.minibatch_loss for row in trace if row.minibatch_loss is not None]
    if steps:
        ax.plot(steps, np.maximum(batch, LOSS_FLOOR), label="minibatch loss", linewidth=0.8)
    monitored = trace.monitored_rows()
    ax.plot(
        [row.step for row in monitored],
        np.maximum([row.full_loss for row in monitored], LOSS_FLOOR),
        marker="o",
        markersize=3,
        label="full loss Q(w)",
    )
    ax.set_yscale("log")
    ax.set_xlabel("Step")
    ax.set_ylabel("Loss")
    ax.set_title(title or "Training loss")
    ax.legend()
    fig.tight_layout()
    return fig


def rank_figure(trace: TrainingTrace, n_columns: int, title: Optional[str] = None) -> Figure:
    """Numerical rank of H(w) at monitored steps against the full-rank line N."""
    fig = Figure(figsize=(7, 4))
    ax = fig.add_subplot(1, 1, 1)
    ranked = trace.ranked_rows()
    ax.step([row.step for row in ranked], [row.rank for row in ranked], where="post", label="rank H(w)")
    ax.axhline(n_columns, linestyle="--", color="gray", label=f"N = {n_columns}")
    ax.set_ylim(0, n_columns + 1)
    ax.set_xlabel("Step")
    ax.set_ylabel("Numerical rank")
    ax.set_title(title or "Disparity matrix rank")
    ax.legend()
    fig.tight_layout()
    return fig
