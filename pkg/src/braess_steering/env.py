"""Congestion game on the two Braess network variants.

Every agent routes one unit of traffic from start to end. The initial
network offers two routes (up, down); the augmented network adds a
zero-cost cross link that lets agents take the congested half of both
routes. Latency of a route depends only on how many agents share its
congested edges, so the game state is fully described by the per-route
agent counts.

Actions are indexed up=0, down=1, cross=2 throughout the package.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

UP, DOWN, CROSS = 0, 1, 2


class Variant(enum.Enum):
    """Which version of the network the population plays on."""

    INITIAL = "initial"
    AUGMENTED = "augmented"


@dataclass(frozen=True)
class Network:
    """A Braess network instance for a fixed population size.

    num_agents is the demand N; num_actions is 2 on the initial network
    and 3 on the augmented one.
    """

    variant: Variant
    num_agents: int

    def __post_init__(self) -> None:
        if self.num_agents < 1:
            raise ValueError("num_agents must be positive")

    @property
    def num_actions(self) -> int:
        return 2 if self.variant is Variant.INITIAL else 3

    @property
    def action_names(self) -> tuple[str, ...]:
        return ("up", "down") if self.variant is Variant.INITIAL else ("up", "down", "cross")


def latencies(network: Network, counts: np.ndarray) -> np.ndarray:
    """Per-route latency for the given occupation counts.

    counts[a] is the number of agents playing route a; entries must sum
    to num_agents. Variable edges have unit cost at full occupation
    (x/N), fixed edges cost 1, and the cross link is free, giving

        initial:    l_up = 1 + n_up/N            l_down = 1 + n_down/N
        augmented:  l_up = 1 + (n_up + n_cross)/N
                    l_down = 1 + (n_down + n_cross)/N
                    l_cross = (n_up + n_cross)/N + (n_down + n_cross)/N
    """
    counts = np.asarray(counts)
    if counts.shape != (network.num_actions,):
        raise ValueError(f"expected {network.num_actions} counts, got shape {counts.shape}")
    if counts.min() < 0 or counts.sum() != network.num_agents:
        raise ValueError("counts must be non-negative and sum to num_agents")
    n = float(network.num_agents)
    if network.variant is Variant.INITIAL:
        return np.array([1.0 + counts[UP] / n, 1.0 + counts[DOWN] / n])
    top = (counts[UP] + counts[CROSS]) / n
    bottom = (counts[DOWN] + counts[CROSS]) / n
    return np.array([1.0 + top, 1.0 + bottom, top + bottom])


def action_counts(actions: np.ndarray, num_actions: int) -> np.ndarray:
    """Occupation counts for a full action profile."""
    return np.bincount(actions, minlength=num_actions)


def rewards(network: Network, actions: np.ndarray) -> np.ndarray:
    """Per-agent reward: the negative latency of the route each agent took."""
    lat = latencies(network, action_counts(actions, network.num_actions))
    return -lat[actions]


def social_welfare(reward_vec: np.ndarray) -> float:
    """Mean reward over the population."""
    return float(np.mean(reward_vec))


def rescale_welfare(welfare: float) -> float:
    """Map raw welfare onto [0, 1] with 0 at the Nash plateau and 1 at optimum.

    Raw welfare lives in [-2, -1.5] once play settles (all-cross gives -2,
    the even split gives -1.5); transient profiles can fall outside, so the
    affine map (w + 2) / 0.5 is clamped.
    """
    return float(min(1.0, max(0.0, (welfare + 2.0) / 0.5)))


def social_optimum(network: Network) -> np.ndarray:
    """Occupation counts minimizing mean latency.

    On both variants the optimum splits the population evenly across up
    and down and leaves cross unused; an odd agent is placed on up.
    """
    n = network.num_agents
    counts = [math.ceil(n / 2), n // 2]
    if network.variant is Variant.AUGMENTED:
        counts.append(0)
    return np.array(counts)


def mean_latency(network: Network, counts: np.ndarray) -> float:
    """Population-average latency for the given occupation counts."""
    lat = latencies(network, counts)
    return float(np.dot(lat, counts) / network.num_agents)
