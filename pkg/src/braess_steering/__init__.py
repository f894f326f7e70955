"""Steering populations of Q-learners through recommendation states.

Simulates repeated play on the Braess networks by tabular epsilon-greedy
Q-learners whose observed state is chosen by a recommender, measures the
resulting welfare and alignment, and ships the reachability arguments
for why such steering works as executable checks.
"""

__version__ = "0.1.0"

from .env import Network, Variant, latencies, rescale_welfare, rewards, social_optimum
from .qlearning import (
    ConstantEpsilon,
    InitScheme,
    LearnerParams,
    LinearDecayEpsilon,
    bellman_update,
    greedy_action,
    init_qtensor,
    select_action,
)
from .recommenders import make_recommender
from .runner import EpisodeResult, ExperimentConfig, perturb_observation, run_episode, run_many
from .steering import (
    check_coverage_growth,
    check_extension_preserves_reach,
    extend,
    reachable_set,
    steering_potential,
)

__all__ = [
    "Network",
    "Variant",
    "latencies",
    "rewards",
    "rescale_welfare",
    "social_optimum",
    "LearnerParams",
    "InitScheme",
    "ConstantEpsilon",
    "LinearDecayEpsilon",
    "init_qtensor",
    "greedy_action",
    "select_action",
    "bellman_update",
    "make_recommender",
    "ExperimentConfig",
    "EpisodeResult",
    "run_episode",
    "run_many",
    "perturb_observation",
    "reachable_set",
    "extend",
    "check_extension_preserves_reach",
    "check_coverage_growth",
    "steering_potential",
]
