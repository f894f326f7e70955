"""Episode runner: the recommend / act / reward / update loop.

Reproducibility contract: a run is fully determined by its config and
base seed. Randomness is split into independent substreams, one per
role, derived as SeedSequence([seed, rep, role, index]) so that agents,
recommender and initialization never share draws. Each agent consumes a
fixed two draws per step (explore test, explore action) whether or not
it explores, which keeps per-agent streams identical across systems
that differ only in how recommendations are produced.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .env import Network, Variant, latencies, social_optimum
from .qlearning import (
    ConstantEpsilon,
    EpsilonSchedule,
    InitScheme,
    LearnerParams,
    LinearDecayEpsilon,
    init_qtensor,
)
from .recommenders import make_recommender

_ROLE_INIT, _ROLE_RECOMMENDER, _ROLE_AGENT = 0, 1, 2


def substream(seed: int, rep: int, role: int, index: int = 0) -> np.random.Generator:
    """Independent generator for one (rep, role, index) slot."""
    return np.random.default_rng(np.random.SeedSequence([seed, rep, role, index]))


def perturb_observation(
    qtensor: np.ndarray, noise_std: float, rng: np.random.Generator
) -> np.ndarray:
    """The recommender's view of the tables: optionally Gaussian-noised.

    With zero noise the true tensor is returned (no copy, no draw);
    otherwise a noised copy, leaving the agents' tables untouched.
    """
    if noise_std < 0:
        raise ValueError("noise_std must be >= 0")
    if noise_std == 0:
        return qtensor
    return qtensor + rng.normal(0.0, noise_std, qtensor.shape)


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep cell: everything a repetition needs apart from its index."""

    network: str = "augmented"
    agents: int = 100
    states: int = 3
    recommender: str = "none"
    alpha: float = 0.1
    gamma: float = 0.0
    epsilon: float = 1.0
    epsilon_decay: bool = True
    init: str = "uniform"
    steps: int = 10_000
    reps: int = 5
    seed: int = 0
    noise_std: float = 0.0

    def build_network(self) -> Network:
        return Network(Variant(self.network), self.agents)

    def learner_params(self) -> LearnerParams:
        return LearnerParams(alpha=self.alpha, gamma=self.gamma)

    def epsilon_schedule(self) -> EpsilonSchedule:
        if self.epsilon_decay:
            return LinearDecayEpsilon(start=self.epsilon, end=0.0)
        return ConstantEpsilon(self.epsilon)

    def init_scheme(self) -> InitScheme:
        known = {
            "uniform": InitScheme("uniform", -2.0, -1.5),
            "aligned": InitScheme("aligned"),
            "misaligned": InitScheme("misaligned"),
            "two_route_constant": InitScheme("two_route_constant"),
            "nash": InitScheme("nash_belief"),
        }
        if self.init not in known:
            raise ValueError(f"unknown init {self.init!r}; choose from {sorted(known)}")
        return known[self.init]

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class EpisodeResult:
    """Per-step series of one repetition."""

    rep: int
    epsilon: np.ndarray
    welfare_raw: np.ndarray
    counts: np.ndarray
    kl: np.ndarray
    alignment: np.ndarray | None
    final_qtensor: np.ndarray = field(repr=False)

    @property
    def welfare_rescaled(self) -> np.ndarray:
        return np.clip((self.welfare_raw + 2.0) / 0.5, 0.0, 1.0)

    @property
    def mean_latency(self) -> np.ndarray:
        return -self.welfare_raw


def run_episode(
    config: ExperimentConfig, rep: int, recommender=None
) -> EpisodeResult:
    """Run one repetition and record every step.

    recommender overrides the config-named strategy (used by tests and
    the theory checks); it must expose recommend(view, step, rng).
    """
    network = config.build_network()
    n, m, k = config.agents, config.states, network.num_actions
    horizon = config.steps
    params = config.learner_params()
    schedule = config.epsilon_schedule()

    tensor = init_qtensor(n, m, k, config.init_scheme(), substream(config.seed, rep, _ROLE_INIT))
    rec_rng = substream(config.seed, rep, _ROLE_RECOMMENDER)
    if recommender is None:
        recommender = make_recommender(config.recommender, network, m, params)

    explore_draws = np.empty((horizon, n))
    action_draws = np.empty((horizon, n), dtype=np.int64)
    for i in range(n):
        agent_rng = substream(config.seed, rep, _ROLE_AGENT, i)
        explore_draws[:, i] = agent_rng.random(horizon)
        action_draws[:, i] = agent_rng.integers(0, k, horizon)

    target_dist = social_optimum(network) / n
    idx = np.arange(n)
    eps_series = np.empty(horizon)
    welfare = np.empty(horizon)
    counts_series = np.empty((horizon, k), dtype=np.int64)
    kl_series = np.empty(horizon)
    align_series = np.empty(horizon) if m == k else None

    for t in range(horizon):
        eps = schedule.at(t, horizon)
        view = perturb_observation(tensor, config.noise_std, rec_rng)
        recs = np.asarray(recommender.recommend(view, t, rec_rng))

        rows = tensor[idx, recs]
        greedy = np.argmax(rows, axis=1)
        actions = np.where(explore_draws[t] < eps, action_draws[t], greedy)

        counts = np.bincount(actions, minlength=k)
        lat = latencies(network, counts)
        rewards = -lat[actions]

        # Bootstrap from the acted-on row before writing back (the next
        # recommendation is unknown at update time, so s' = s).
        row_max = rows.max(axis=1)
        current = tensor[idx, recs, actions]
        tensor[idx, recs, actions] = current + params.alpha * (
            rewards + params.gamma * row_max - current
        )

        eps_series[t] = eps
        welfare[t] = rewards.mean()
        counts_series[t] = counts
        kl_series[t] = metrics.kl_to_target(counts / n, target_dist)
        if align_series is not None:
            align_series[t] = np.mean(greedy == recs)

    return EpisodeResult(
        rep=rep,
        epsilon=eps_series,
        welfare_raw=welfare,
        counts=counts_series,
        kl=kl_series,
        alignment=align_series,
        final_qtensor=tensor,
    )


def run_many(config: ExperimentConfig, jobs: int = 1) -> list[EpisodeResult]:
    """All repetitions of one cell, serial or process-parallel.

    Repetitions are independent and individually seeded, so the results
    are identical regardless of jobs; they are returned ordered by rep.
    """
    reps = range(config.reps)
    if jobs <= 1:
        return [run_episode(config, rep) for rep in reps]
    import concurrent.futures

    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = {pool.submit(run_episode, config, rep): rep for rep in reps}
        results = {futures[f]: f.result() for f in concurrent.futures.as_completed(futures)}
    return [results[rep] for rep in sorted(results)]
