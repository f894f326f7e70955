"""Tabular Q-learners whose observed state is a recommendation.

Each agent holds an m x k table: one row per recommendation state, one
column per route. The recommender chooses which row an agent consults,
the agent acts epsilon-greedily on that row, and the Bellman update
writes back into the same row. Ties in any argmax are broken toward the
lowest action index, matching numpy's argmax.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Belief matrices used by the three-state experiments. Rows are
# recommendation states, columns are routes (up, down, cross). Aligned
# beliefs make the recommended route the row argmax; misaligned beliefs
# cycle it one column over.
ALIGNED_BELIEFS = np.array(
    [
        [-1.5, -2.0, -2.0],
        [-2.0, -1.5, -2.0],
        [-2.0, -2.0, -1.5],
    ]
)
MISALIGNED_BELIEFS = np.array(
    [
        [-2.0, -1.5, -2.0],
        [-2.0, -2.0, -1.5],
        [-1.5, -2.0, -2.0],
    ]
)


@dataclass(frozen=True)
class LearnerParams:
    """Learning rate and discount shared by the whole population."""

    alpha: float = 0.1
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must be in (0, 1]")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")


@dataclass(frozen=True)
class ConstantEpsilon:
    value: float

    def at(self, step: int, horizon: int) -> float:
        return self.value


@dataclass(frozen=True)
class LinearDecayEpsilon:
    """Linear interpolation from start at step 0 to end at the horizon."""

    start: float = 1.0
    end: float = 0.0

    def at(self, step: int, horizon: int) -> float:
        if not 0 <= step <= horizon:
            raise ValueError("step must lie in [0, horizon]")
        return self.start + (self.end - self.start) * step / horizon


EpsilonSchedule = ConstantEpsilon | LinearDecayEpsilon


@dataclass(frozen=True)
class InitScheme:
    """How the population's q-tables are filled before learning.

    kind:
      two_route_constant  every entry -1.5 (two-route experiments)
      aligned             ALIGNED_BELIEFS, requires m = k = 3
      misaligned          MISALIGNED_BELIEFS, requires m = k = 3
      uniform             iid uniform draws from [low, high)
      nash_belief         every entry -2.0
    """

    kind: str = "uniform"
    low: float = -2.0
    high: float = -1.5


def init_qtensor(
    num_agents: int,
    num_states: int,
    num_actions: int,
    scheme: InitScheme,
    rng: np.random.Generator,
) -> np.ndarray:
    """Stacked q-tables for the whole population, shape (n, m, k)."""
    shape = (num_agents, num_states, num_actions)
    if scheme.kind == "two_route_constant":
        return np.full(shape, -1.5)
    if scheme.kind == "nash_belief":
        return np.full(shape, -2.0)
    if scheme.kind in ("aligned", "misaligned"):
        if num_states != 3 or num_actions != 3:
            raise ValueError(f"{scheme.kind} init requires m = k = 3")
        base = ALIGNED_BELIEFS if scheme.kind == "aligned" else MISALIGNED_BELIEFS
        return np.tile(base, (num_agents, 1, 1))
    if scheme.kind == "uniform":
        if not scheme.low < scheme.high:
            raise ValueError("uniform init needs low < high")
        return rng.uniform(scheme.low, scheme.high, shape)
    raise ValueError(f"unknown init scheme {scheme.kind!r}")


def greedy_action(table: np.ndarray, state: int) -> int:
    """Lowest-index maximizer of the given row."""
    return int(np.argmax(table[state]))


def select_action(
    table: np.ndarray, state: int, epsilon: float, rng: np.random.Generator
) -> int:
    """Epsilon-greedy choice on one row: explore uniformly, else greedy."""
    if rng.random() < epsilon:
        return int(rng.integers(table.shape[1]))
    return greedy_action(table, state)


def bellman_update(
    table: np.ndarray,
    state: int,
    action: int,
    reward: float,
    next_state: int,
    params: LearnerParams,
) -> float:
    """Standard in-place Q-learning update; returns the new entry.

    The bootstrap term reads the table before the write, so next_state
    may equal state.
    """
    target = reward + params.gamma * float(np.max(table[next_state]))
    table[state, action] += params.alpha * (target - table[state, action])
    return float(table[state, action])
