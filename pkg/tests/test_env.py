import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from braess_steering.env import (
    CROSS,
    DOWN,
    UP,
    Network,
    Variant,
    action_counts,
    latencies,
    mean_latency,
    rescale_welfare,
    rewards,
    social_optimum,
    social_welfare,
)


def augmented(n):
    return Network(Variant.AUGMENTED, n)


def initial(n):
    return Network(Variant.INITIAL, n)


def enumerate_counts(n, k):
    """All occupation vectors of n agents over k routes."""
    if k == 2:
        return [(u, n - u) for u in range(n + 1)]
    return [
        (u, d, n - u - d) for u in range(n + 1) for d in range(n + 1 - u)
    ]


class TestLatencies:
    def test_all_cross_hand_value(self):
        lat = latencies(augmented(100), np.array([0, 0, 100]))
        assert np.allclose(lat, [2.0, 2.0, 2.0], atol=0)

    def test_even_split_hand_value(self):
        lat = latencies(augmented(100), np.array([50, 50, 0]))
        assert np.allclose(lat, [1.5, 1.5, 1.0], atol=0)

    def test_mixed_hand_value(self):
        lat = latencies(augmented(4), np.array([1, 1, 2]))
        assert np.allclose(lat, [1.75, 1.75, 1.5], atol=0)

    def test_initial_boundary(self):
        lat = latencies(initial(100), np.array([100, 0]))
        assert np.allclose(lat, [2.0, 1.0], atol=0)

    @pytest.mark.parametrize("n", [2, 3, 100, 901])
    def test_all_cross_mean_exact(self, n):
        net = augmented(n)
        counts = np.array([0, 0, n])
        assert abs(mean_latency(net, counts) - 2.0) < 1e-12

    @pytest.mark.parametrize("n", [2, 100])
    def test_even_split_mean_exact(self, n):
        net = augmented(n)
        counts = social_optimum(net)
        assert abs(mean_latency(net, counts) - 1.5) < 1e-12

    @pytest.mark.parametrize("n", [3, 901])
    def test_odd_split_mean_near_half(self, n):
        net = augmented(n)
        counts = social_optimum(net)
        assert abs(mean_latency(net, counts) - 1.5) <= 0.5 / n

    def test_rejects_wrong_arity(self):
        with pytest.raises(ValueError):
            latencies(augmented(4), np.array([2, 2]))

    def test_rejects_wrong_sum(self):
        with pytest.raises(ValueError):
            latencies(augmented(4), np.array([1, 1, 1]))

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            latencies(initial(4), np.array([5, -1]))

    @given(st.integers(1, 20), st.data())
    def test_cross_never_beats_staying(self, n, data):
        # One agent switching to cross never increases its own latency,
        # whatever everyone else does: the mechanism that makes all-cross
        # the equilibrium.
        net = augmented(n)
        u = data.draw(st.integers(0, n))
        d = data.draw(st.integers(0, n - u))
        counts = np.array([u, d, n - u - d])
        lat = latencies(net, counts)
        for a in (UP, DOWN):
            if counts[a] == 0:
                continue
            moved = counts.copy()
            moved[a] -= 1
            moved[CROSS] += 1
            assert latencies(net, moved)[CROSS] <= lat[a] + 1e-12

    @given(st.integers(1, 40), st.data())
    def test_cross_latency_identity(self, n, data):
        # Under the sum constraint the cross latency collapses to
        # 1 + n_cross / N.
        u = data.draw(st.integers(0, n))
        d = data.draw(st.integers(0, n - u))
        counts = np.array([u, d, n - u - d])
        lat = latencies(augmented(n), counts)
        assert abs(lat[CROSS] - (1.0 + counts[CROSS] / n)) < 1e-12


class TestSocialOptimum:
    @pytest.mark.parametrize("n", range(1, 61))
    def test_matches_exhaustive_enumeration(self, n):
        net = augmented(n)
        best = min(mean_latency(net, np.array(c)) for c in enumerate_counts(n, 3))
        opt = social_optimum(net)
        assert mean_latency(net, opt) <= best + 1e-12
        assert opt[CROSS] == 0
        assert opt[UP] - opt[DOWN] in (0, 1)
        assert opt.sum() == n

    def test_hand_values(self):
        assert social_optimum(augmented(100)).tolist() == [50, 50, 0]
        assert social_optimum(augmented(3)).tolist() == [2, 1, 0]
        assert social_optimum(initial(2)).tolist() == [1, 1]

    @pytest.mark.parametrize("n", range(1, 41))
    def test_initial_matches_enumeration(self, n):
        net = initial(n)
        best = min(mean_latency(net, np.array(c)) for c in enumerate_counts(n, 2))
        assert mean_latency(net, social_optimum(net)) <= best + 1e-12


class TestRewardsAndWelfare:
    def test_rewards_are_negative_latency(self):
        net = augmented(4)
        actions = np.array([UP, DOWN, CROSS, CROSS])
        lat = latencies(net, action_counts(actions, 3))
        assert np.array_equal(rewards(net, actions), -lat[actions])

    def test_two_agent_initial(self):
        r = rewards(initial(2), np.array([UP, DOWN]))
        assert np.allclose(r, [-1.5, -1.5], atol=0)

    def test_welfare_is_mean(self):
        assert social_welfare(np.array([-2.0, -1.5])) == -1.75

    @given(st.integers(1, 30), st.data())
    def test_welfare_equals_negative_mean_latency(self, n, data):
        net = augmented(n)
        actions = np.array(data.draw(st.lists(st.integers(0, 2), min_size=n, max_size=n)))
        w = social_welfare(rewards(net, actions))
        ml = mean_latency(net, action_counts(actions, 3))
        assert math.isclose(w, -ml, rel_tol=0, abs_tol=1e-12)


class TestRescaleWelfare:
    def test_anchor_points(self):
        assert rescale_welfare(-2.0) == 0.0
        assert rescale_welfare(-1.5) == 1.0
        assert rescale_welfare(-1.75) == 0.5

    def test_clamping(self):
        assert rescale_welfare(-2.5) == 0.0
        assert rescale_welfare(-1.0) == 1.0

    @given(st.floats(-3.0, 0.0), st.floats(-3.0, 0.0))
    def test_monotone(self, a, b):
        lo, hi = sorted((a, b))
        assert rescale_welfare(lo) <= rescale_welfare(hi)


class TestNetwork:
    def test_action_arity(self):
        assert initial(5).num_actions == 2
        assert augmented(5).num_actions == 3
        assert augmented(5).action_names == ("up", "down", "cross")

    def test_rejects_empty_population(self):
        with pytest.raises(ValueError):
            Network(Variant.INITIAL, 0)
