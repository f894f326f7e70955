"""Recommendation strategies for steering a learning population.

A recommender sees the stacked q-tables (possibly through observation
noise) and picks one recommendation state per agent. Strategies range
from open-loop baselines (constant, random, two-step) to closed-loop
heuristics that read the tables and choose rows whose greedy actions
move the population toward a target occupation.

The optimization heuristic works in four stages: find which routes each
agent's table can be steered to, estimate the reward each route would
yield if the population were arranged as close to the target as those
constraints allow, turn the estimates into predicted q-value updates,
and finally assign agents to recommendation states by scanning the
predicted updates in sorted order against per-route priorities.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .env import CROSS, DOWN, UP, Network, Variant, social_optimum
from .qlearning import LearnerParams

NAMES = (
    "none",
    "random",
    "heuristic",
    "route3",
    "aligned3",
    "twostep-aligned",
    "twostep-misaligned",
)


def constant_vector(num_agents: int, num_states: int) -> np.ndarray:
    """The fixed alternating recommendation (up-state, down-state, ...).

    With a single state everyone gets state 0; otherwise agents alternate
    between states 0 and 1 by index, the open-loop pattern that splits a
    population evenly across the two pure routes.
    """
    return np.arange(num_agents) % min(num_states, 2)


@dataclass(frozen=True)
class ConstantRecommender:
    """Open-loop baseline: the same alternating vector every step."""

    num_agents: int
    num_states: int

    def recommend(self, view: np.ndarray, step: int, rng: np.random.Generator) -> np.ndarray:
        return constant_vector(self.num_agents, self.num_states)


@dataclass(frozen=True)
class RandomRecommender:
    """Uniform iid recommendation states each step."""

    num_agents: int
    num_states: int

    def recommend(self, view: np.ndarray, step: int, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, self.num_states, self.num_agents)


@dataclass(frozen=True)
class FixedVectorRecommender:
    """Replays one fixed recommendation vector forever."""

    vector: np.ndarray

    def recommend(self, view: np.ndarray, step: int, rng: np.random.Generator) -> np.ndarray:
        return self.vector


@dataclass(frozen=True)
class TwoStepRecommender:
    """Hand-crafted two-phase scheme for the two-route network, m = k = 2.

    Step 0 sends everyone to one state: state 0 exploits the initial
    tie-break (everyone plays up, a fully misaligned push), state 1
    first degrades the down-state belief so the later split is aligned.
    From step 1 on the constant alternating split is replayed.
    """

    num_agents: int
    first_state: int

    def recommend(self, view: np.ndarray, step: int, rng: np.random.Generator) -> np.ndarray:
        if step == 0:
            return np.full(self.num_agents, self.first_state, dtype=np.int64)
        return constant_vector(self.num_agents, 2)


def possible_actions(view: np.ndarray) -> np.ndarray:
    """Boolean (n, k) mask of routes reachable per agent.

    A route is reachable if some recommendation state makes it the row
    argmax; only those can be induced through recommendations alone.
    """
    n, _, k = view.shape
    greedy = np.argmax(view, axis=2)
    mask = np.zeros((n, k), dtype=bool)
    np.put_along_axis(mask, greedy, True, axis=1)
    return mask


def estimate_rewards(
    possible: np.ndarray, network: Network, target: np.ndarray
) -> np.ndarray:
    """Per-route reward estimate under the best achievable arrangement.

    Agents steerable to exactly one route are locked there; the rest are
    assigned, within their reachable routes, so that the resulting mean
    latency is minimal. The minimization is exact: with k <= 3 the
    per-route count vectors can be enumerated outright and constraint
    feasibility checked in closed form. Ties prefer filling up, then
    down.

    The returned estimate is optimistic by design: each route's reward
    is the single-variable utility -(1 + count/N) at its assigned
    count, which ignores cross traffic on the shared edges of the pure
    routes (for the cross route itself, and on the two-route network,
    it coincides with the true latency).
    """
    k = network.num_actions
    if possible.shape != (network.num_agents, k):
        raise ValueError("possible-actions mask has wrong shape")
    locked = possible.sum(axis=1) == 1
    locked_counts = possible[locked].sum(axis=0).astype(np.int64)
    free = ~locked
    num_free = int(free.sum())

    if k == 2:
        extra_up = np.arange(num_free + 1)
        candidates = np.stack([extra_up, num_free - extra_up], axis=1)
        feasible = np.ones(len(candidates), dtype=bool)
    else:
        pair_counts = {
            frozenset((a, b)): int(
                np.sum(free & possible[:, a] & possible[:, b] & ~possible[:, other])
            )
            for a, b, other in ((UP, DOWN, CROSS), (UP, CROSS, DOWN), (DOWN, CROSS, UP))
        }
        grid = np.arange(num_free + 1)
        xu, xd = np.meshgrid(grid, grid, indexing="ij")
        keep = xu + xd <= num_free
        xu, xd = xu[keep], xd[keep]
        xc = num_free - xu - xd
        # Hall-type conditions: each two-route group must fit inside the
        # slots its two routes received (three-route agents are free).
        feasible = (
            (xu + xd >= pair_counts[frozenset((UP, DOWN))])
            & (xu + xc >= pair_counts[frozenset((UP, CROSS))])
            & (xd + xc >= pair_counts[frozenset((DOWN, CROSS))])
        )
        candidates = np.stack([xu, xd, xc], axis=1)

    counts = candidates[feasible] + locked_counts
    frac = counts / network.num_agents
    if network.variant is Variant.INITIAL:
        lat_u = 1.0 + frac[:, UP]
        lat_d = 1.0 + frac[:, DOWN]
        mean_lat = frac[:, UP] * lat_u + frac[:, DOWN] * lat_d
    else:
        top = frac[:, UP] + frac[:, CROSS]
        bottom = frac[:, DOWN] + frac[:, CROSS]
        mean_lat = (
            frac[:, UP] * (1.0 + top)
            + frac[:, DOWN] * (1.0 + bottom)
            + frac[:, CROSS] * (top + bottom)
        )
    order = np.lexsort((-counts[:, DOWN], -counts[:, UP], mean_lat))
    best = counts[order[0]]
    return -(1.0 + best / network.num_agents)


def estimate_updates(
    view: np.ndarray, reward_est: np.ndarray, params: LearnerParams
) -> tuple[np.ndarray, np.ndarray]:
    """Predicted q-value change per (agent, state) if that state is recommended.

    Only the greedy action of each row can be realized, so the estimate
    is evaluated there: delta[i, s] applies to action greedy[i, s]. The
    bootstrap row is taken to be the same row.
    """
    greedy = np.argmax(view, axis=2)
    row_max = np.max(view, axis=2)
    delta = params.alpha * (reward_est[greedy] + params.gamma * row_max - row_max)
    return delta, greedy


def priorities(target: np.ndarray, assigned_counts: np.ndarray) -> np.ndarray:
    """Remaining demand per route, floored at zero."""
    return np.maximum(0, target - assigned_counts)


@dataclass
class SelectionState:
    """Mutable assignment bookkeeping shared by the selection phases."""

    target: np.ndarray
    state_of: np.ndarray
    action_of: np.ndarray
    counts: np.ndarray = field(init=False)

    @classmethod
    def empty(cls, num_agents: int, target: np.ndarray) -> SelectionState:
        return cls(
            target=np.asarray(target),
            state_of=np.full(num_agents, -1, dtype=np.int64),
            action_of=np.full(num_agents, -1, dtype=np.int64),
        )

    def __post_init__(self) -> None:
        self.counts = np.zeros(len(self.target), dtype=np.int64)

    def assign(self, agent: int, state: int, action: int) -> None:
        self.state_of[agent] = state
        self.action_of[agent] = action
        self.counts[action] += 1

    def unassigned(self) -> np.ndarray:
        return self.state_of < 0


def selection_phase(
    delta: np.ndarray,
    greedy: np.ndarray,
    sel: SelectionState,
    phase: str,
) -> None:
    """One sorted scan assigning agents to recommendation states.

    Entries (agent, state) are grouped into one column per route (the
    route the state's greedy action realizes) and sorted by predicted
    update: ascending in the "min" phase, which seeks minimal belief
    disruption while routes still have unmet priority, descending in the
    "max" phase, which sweeps up leftover agents without route caps.

    The scan walks rank-rows across columns in fixed route order. In the
    min phase a column whose priority has reached zero is skipped. An
    agent appearing in one live column of the row takes that entry; an
    agent appearing in several is resolved to the highest-priority
    route, ties to the smaller predicted update, and priorities are
    recomputed after every single assignment.
    """
    if phase not in ("min", "max"):
        raise ValueError("phase must be 'min' or 'max'")
    enforce_caps = phase == "min"
    k = len(sel.target)
    columns = []
    for a in range(k):
        agents, states = np.nonzero(greedy == a)
        vals = delta[agents, states]
        order = np.argsort(vals if phase == "min" else -vals, kind="stable")
        columns.append((agents[order], states[order], vals[order]))
    depth = max((len(col[0]) for col in columns), default=0)
    pending = int(np.count_nonzero(sel.state_of < 0))

    # In the max phase conflicts are impossible when a single route has
    # entries: the scan reduces to assigning every pending agent at its
    # first occurrence in that column, which is done in one pass here.
    nonempty = [a for a in range(k) if len(columns[a][0])]
    if not enforce_caps and len(nonempty) == 1:
        agents, states, _ = columns[nonempty[0]]
        _, first = np.unique(agents, return_index=True)
        for r in sorted(first):
            i = int(agents[r])
            if sel.state_of[i] < 0:
                sel.assign(i, int(states[r]), nonempty[0])
        return

    # The scan touches single entries millions of times on large
    # tables, so the sorted columns are kept as plain lists and the cap
    # bookkeeping as ints; sel stays authoritative through assign().
    cols = [(a.tolist(), s.tolist(), v.tolist()) for a, s, v in columns]
    lengths = [len(c[0]) for c in cols]
    assigned = sel.state_of >= 0
    headroom = [int(sel.target[a] - sel.counts[a]) for a in range(k)]

    def live_fast(action: int) -> bool:
        return not enforce_caps or headroom[action] > 0

    for rank in range(depth):
        if pending == 0:
            return
        # Caps only tighten during a phase and column lengths are fixed,
        # so once no live column reaches this rank none ever will again.
        if not any(lengths[a] > rank and live_fast(a) for a in range(k)):
            return
        row: list[tuple[int, int, int, float]] = []
        for a in range(k):
            if rank >= lengths[a] or not live_fast(a):
                continue
            agents, states, vals = cols[a]
            i = agents[rank]
            if not assigned[i]:
                row.append((a, i, states[rank], vals[rank]))
        if not row:
            continue
        entries_of: dict[int, list[tuple[int, int, float]]] = {}
        for a, i, s, v in row:
            entries_of.setdefault(i, []).append((a, s, v))
        for a, i, s, v in row:
            if assigned[i] or not live_fast(a):
                continue
            options = [(ca, cs, cv) for ca, cs, cv in entries_of[i] if live_fast(ca)]
            if not options:
                continue
            if len(options) == 1:
                choice = options[0]
            else:
                remaining = priorities(sel.target, sel.counts)
                choice = min(options, key=lambda c: (-remaining[c[0]], c[2], c[0]))
            sel.assign(i, choice[1], choice[0])
            assigned[i] = True
            headroom[choice[0]] -= 1
            pending -= 1


def steering_assignments(
    view: np.ndarray, network: Network, target: np.ndarray, params: LearnerParams
) -> SelectionState:
    """Run the full two-phase selection and return the assignment state."""
    possible = possible_actions(view)
    reward_est = estimate_rewards(possible, network, target)
    delta, greedy = estimate_updates(view, reward_est, params)
    sel = SelectionState.empty(view.shape[0], target)
    selection_phase(delta, greedy, sel, "min")
    if sel.unassigned().any():
        selection_phase(delta, greedy, sel, "max")
    if sel.unassigned().any():
        raise RuntimeError("selection left agents without a recommendation")
    return sel


@dataclass(frozen=True)
class HeuristicRecommender:
    """Priority-driven steering toward a target occupation (any m, k)."""

    network: Network
    params: LearnerParams
    target: np.ndarray

    def recommend(self, view: np.ndarray, step: int, rng: np.random.Generator) -> np.ndarray:
        return steering_assignments(view, self.network, self.target, self.params).state_of


def _best_state(delta: np.ndarray, greedy: np.ndarray, agent: int, action: int, minimize: bool) -> int:
    """Extreme-update state among the agent's rows whose greedy action matches.

    Ties prefer the state indexed like the action itself (the aligned
    state, when one exists among the tied extremes), then the lowest
    index; this keeps the two three-state heuristics in agreement on
    agents that are both exclusively grouped and aligned.
    """
    masked = np.where(greedy[agent] == action, delta[agent], np.nan)
    extreme = np.nanmin(masked) if minimize else np.nanmax(masked)
    candidates = np.nonzero(masked == extreme)[0]
    if action in candidates:
        return int(action)
    return int(candidates[0])


def _alternate_split(indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Even/odd positional split; the extra agent of an odd group goes first."""
    return indices[0::2], indices[1::2]


@dataclass(frozen=True)
class RouteGroupRecommender:
    """Three-state heuristic grouping agents by reachable route.

    Agents that can be steered to both pure routes are split evenly
    between them and positively reinforced (state with the largest
    predicted update for that route); agents reaching only one pure
    route are reinforced toward it; agents locked on cross get the state
    that degrades the cross belief fastest.
    """

    network: Network
    params: LearnerParams
    target: np.ndarray

    def recommend(self, view: np.ndarray, step: int, rng: np.random.Generator) -> np.ndarray:
        possible = possible_actions(view)
        reward_est = estimate_rewards(possible, self.network, self.target)
        delta, greedy = estimate_updates(view, reward_est, self.params)
        n = view.shape[0]
        rec = np.empty(n, dtype=np.int64)
        both = possible[:, UP] & possible[:, DOWN]
        to_up, to_down = _alternate_split(np.nonzero(both)[0])
        for i in to_up:
            rec[i] = _best_state(delta, greedy, int(i), UP, minimize=False)
        for i in to_down:
            rec[i] = _best_state(delta, greedy, int(i), DOWN, minimize=False)
        for i in np.nonzero(~both)[0]:
            if possible[i, UP]:
                rec[i] = _best_state(delta, greedy, int(i), UP, minimize=False)
            elif possible[i, DOWN]:
                rec[i] = _best_state(delta, greedy, int(i), DOWN, minimize=False)
            else:
                rec[i] = _best_state(delta, greedy, int(i), CROSS, minimize=True)
        return rec


@dataclass(frozen=True)
class AlignedGroupRecommender:
    """Three-state heuristic that only hands out self-confirming states.

    A state is aligned for an agent when its greedy action equals the
    state index. Cross alignment is the most robust under the learning
    dynamics (the cross belief self-confirms), so any agent aligned on
    cross keeps that state; agents aligned on exactly the two pure
    routes are split evenly between them; a single remaining aligned
    route is handed out directly. Agents with no aligned state all
    receive the one state with the best mean predicted update over that
    group, which tends to re-establish alignment.
    """

    network: Network
    params: LearnerParams
    target: np.ndarray

    def recommend(self, view: np.ndarray, step: int, rng: np.random.Generator) -> np.ndarray:
        possible = possible_actions(view)
        reward_est = estimate_rewards(possible, self.network, self.target)
        delta, greedy = estimate_updates(view, reward_est, self.params)
        n, m, _ = view.shape
        aligned = greedy == np.arange(m)
        rec = np.full(n, -1, dtype=np.int64)
        rec[aligned[:, CROSS]] = CROSS
        both = (rec < 0) & aligned[:, UP] & aligned[:, DOWN]
        to_up, to_down = _alternate_split(np.nonzero(both)[0])
        rec[to_up] = UP
        rec[to_down] = DOWN
        rec[(rec < 0) & aligned[:, UP]] = UP
        rec[(rec < 0) & aligned[:, DOWN]] = DOWN
        misaligned = np.nonzero(rec < 0)[0]
        if len(misaligned):
            rec[misaligned] = int(np.argmax(delta[misaligned].mean(axis=0)))
        return rec


def make_recommender(
    name: str,
    network: Network,
    num_states: int,
    params: LearnerParams,
):
    """Instantiate a strategy by its public name, validating its contract."""
    n, k = network.num_agents, network.num_actions
    if name == "none":
        return ConstantRecommender(n, num_states)
    if name == "random":
        return RandomRecommender(n, num_states)
    if name == "heuristic":
        return HeuristicRecommender(network, params, social_optimum(network))
    if name in ("route3", "aligned3"):
        if num_states != 3 or k != 3:
            raise ValueError(f"{name} requires the augmented network with m = 3")
        cls = RouteGroupRecommender if name == "route3" else AlignedGroupRecommender
        return cls(network, params, social_optimum(network))
    if name in ("twostep-aligned", "twostep-misaligned"):
        if network.variant is not Variant.INITIAL or num_states != 2:
            raise ValueError(f"{name} requires the initial network with m = 2")
        first = DOWN if name == "twostep-aligned" else UP
        return TwoStepRecommender(n, first)
    raise ValueError(f"unknown recommender {name!r}; choose from {NAMES}")
