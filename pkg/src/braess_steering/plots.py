"""Figure rendering for experiment outputs.

Every function takes in-memory results, writes a PNG next to the data
files, and returns the path. Rendering is optional everywhere in the
CLI, so keep these free of side effects beyond the file write.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiments import CellResult
from .metrics import simplex_trajectory
from .runner import EpisodeResult


def _mean_over_reps(result: CellResult, field: str) -> np.ndarray:
    stacked = np.stack([getattr(ep, field) for ep in result.episodes])
    return stacked.mean(axis=0)


def plot_welfare_curves(results: list[CellResult], path: str) -> str:
    fig, ax = plt.subplots(figsize=(7, 4))
    for result in results:
        curve = _mean_over_reps(result, "welfare_rescaled")
        ax.plot(curve, lw=0.8, label=result.run_id)
    ax.set_xlabel("step")
    ax.set_ylabel("rescaled social welfare")
    ax.set_ylim(-0.02, 1.02)
    if len(results) <= 12:
        ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_sweep_heatmap(results: list[CellResult], path: str) -> str:
    """Mean full-horizon welfare of the closed-loop cells on the (m, n) grid."""
    cells = [r for r in results if r.config.recommender == "heuristic"]
    if not cells:
        cells = results
    agents = sorted({r.config.agents for r in cells})
    states = sorted({r.config.states for r in cells})
    grid = np.full((len(agents), len(states)), np.nan)
    for r in cells:
        i = agents.index(r.config.agents)
        j = states.index(r.config.states)
        grid[i, j] = float(np.mean([ep.welfare_rescaled.mean() for ep in r.episodes]))
    fig, ax = plt.subplots(figsize=(6, 4))
    im = ax.imshow(grid, origin="lower", aspect="auto", vmin=0.0, vmax=1.0, cmap="viridis")
    ax.set_xticks(range(len(states)), [str(m) for m in states])
    ax.set_yticks(range(len(agents)), [str(n) for n in agents])
    ax.set_xlabel("recommendation states")
    ax.set_ylabel("agents")
    fig.colorbar(im, ax=ax, label="mean rescaled welfare")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _final_stretch(values: np.ndarray, fraction: float = 0.1) -> float:
    tail = max(1, int(len(values) * fraction))
    return float(values[-tail:].mean())


def plot_metric_vs_epsilon(
    results: list[CellResult], metric: str, path: str, ylabel: str | None = None
) -> str:
    """Final-stretch value of a per-step metric against exploration rate.

    Groups cells by recommender kind; expects constant-epsilon cells.
    """
    kinds: dict[str, list[tuple[float, float]]] = {}
    for result in results:
        values = []
        for ep in result.episodes:
            series = getattr(ep, metric)
            if series is None:
                break
            values.append(_final_stretch(np.asarray(series)))
        if not values:
            continue
        kinds.setdefault(result.config.recommender, []).append(
            (result.config.epsilon, float(np.mean(values)))
        )
    fig, ax = plt.subplots(figsize=(6, 4))
    for kind, points in sorted(kinds.items()):
        points.sort()
        xs, ys = zip(*points)
        ax.plot(xs, ys, marker="o", ms=3, label=kind)
    ax.set_xscale("log")
    ax.set_xlabel("exploration rate")
    ax.set_ylabel(ylabel or metric)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_simplex(episode: EpisodeResult, path: str) -> str:
    """Route-distribution trajectory drawn on the action simplex."""
    points, deltas = simplex_trajectory(episode.counts)
    if points.shape[1] == 2:
        xy = np.column_stack([points[:, 0], np.zeros(len(points))])
        corners = np.array([[0.0, 0.0], [1.0, 0.0]])
    else:
        corners = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
        xy = points @ corners
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(*np.vstack([corners, corners[:1]]).T, color="0.6", lw=1)
    step = max(1, len(xy) // 400)
    segs = xy[::step]
    ax.quiver(
        segs[:-1, 0],
        segs[:-1, 1],
        np.diff(segs[:, 0]),
        np.diff(segs[:, 1]),
        np.linspace(0, 1, len(segs) - 1),
        cmap="plasma",
        angles="xy",
        scale_units="xy",
        scale=1,
        width=0.003,
    )
    labels = ("up", "down", "cross")[: points.shape[1]]
    for corner, label in zip(corners, labels):
        ax.annotate(label, corner, textcoords="offset points", xytext=(4, 4), fontsize=9)
    ax.set_aspect("equal")
    ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_coverage(coverage: np.ndarray, path: str) -> str:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(np.arange(1, len(coverage) + 1), coverage, marker=".", ms=3)
    ax.set_xlabel("table rows")
    ax.set_ylabel("fraction of actions reachable")
    ax.set_ylim(0, 1.02)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
