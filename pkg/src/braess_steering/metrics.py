"""Population-level measurements taken each step of a run.

Welfare lives in env; here are the distributional metrics (route
occupation, divergence from the optimal split), the alignment score
(do agents greedily follow what they are told), and the simplex
trajectory used for vector-field plots of the collective dynamics.
"""

from __future__ import annotations

import numpy as np

KL_SMOOTHING = 1e-6


class UndefinedMetricError(ValueError):
    """Raised when a metric's preconditions make it meaningless."""


def action_distribution(actions: np.ndarray, num_actions: int) -> np.ndarray:
    """Empirical route distribution of one step's action profile."""
    return np.bincount(actions, minlength=num_actions) / len(actions)


def kl_to_target(
    dist: np.ndarray, target: np.ndarray, smoothing: float = KL_SMOOTHING
) -> float:
    """KL divergence from the empirical distribution to a smoothed target.

    The target is smoothed so zero-probability target routes (cross at
    the optimum) stay finite; empirical zeros contribute nothing.
    """
    dist = np.asarray(dist, dtype=float)
    target = np.asarray(target, dtype=float)
    smoothed = (target + smoothing) / (1.0 + len(target) * smoothing)
    support = dist > 0
    return float(np.sum(dist[support] * np.log(dist[support] / smoothed[support])))


def alignment(view: np.ndarray, recommendations: np.ndarray) -> float:
    """Fraction of agents whose recommended row's greedy action echoes it.

    Only meaningful when states and actions share an index space
    (m = k); anything else raises UndefinedMetricError.
    """
    n, m, k = view.shape
    if m != k:
        raise UndefinedMetricError(f"alignment undefined for m={m} != k={k}")
    rows = view[np.arange(n), recommendations]
    return float(np.mean(np.argmax(rows, axis=1) == recommendations))


def simplex_trajectory(counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Occupation-fraction path and its step-to-step displacements.

    counts has one row per step. Returns (points, deltas) where points
    are rows on the probability simplex and deltas[t] = points[t+1] -
    points[t]; suitable for arrow plots of the collective flow.
    """
    counts = np.asarray(counts, dtype=float)
    if counts.ndim != 2 or counts.shape[0] < 1:
        raise ValueError("counts must be (num_steps, num_actions) with at least one step")
    points = counts / counts.sum(axis=1, keepdims=True)
    deltas = np.diff(points, axis=0)
    return points, deltas
