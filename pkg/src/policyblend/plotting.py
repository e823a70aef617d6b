"""Static trajectory plots from episode traces."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import EpisodeRecord


def emit_trajectory_plot(record: EpisodeRecord, path) -> None:
    """Write a deterministic SVG of one episode.

    Shows the arena, obstacle snapshots at a few times, start (orange), goal
    (green) and the trajectory polyline.  Output bytes depend only on the
    record.
    """
    if not record.trace:
        raise ValueError("record has no trace steps")
    plt.rcParams["svg.hashsalt"] = "policyblend"
    traj = np.array([s.q for s in record.trace])
    fig, ax = plt.subplots(figsize=(6, 6))
    snap_idx = sorted({0, len(record.trace) // 2, len(record.trace) - 1})
    alphas = np.linspace(0.15, 0.45, len(snap_idx))
    for a, i in zip(alphas, snap_idx):
        for cx, cy, _, _, r in record.trace[i].obstacles:
            ax.add_patch(plt.Circle((cx, cy), r, color="grey", alpha=float(a), lw=0))
    ax.plot(traj[:, 0], traj[:, 1], "-", color="tab:blue", lw=1.2)
    ax.plot([record.trace[0].q[0]], [record.trace[0].q[1]], "o", color="orange", ms=8)
    goal = record.trace[-1].goal
    ax.plot([goal[0]], [goal[1]], "o", color="green", ms=8)
    xs = np.concatenate([traj[:, 0], [0.0, 1000.0]])
    ys = np.concatenate([traj[:, 1], [0.0, 1000.0]])
    ax.set_xlim(min(xs.min(), 0.0), max(xs.max(), 1000.0))
    ax.set_ylim(min(ys.min(), 0.0), max(ys.max(), 1000.0))
    ax.set_aspect("equal")
    ax.set_title(f"suc={record.suc} safe={record.safe} ts={record.ts}")
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
