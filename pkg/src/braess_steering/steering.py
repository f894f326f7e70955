"""Reachability of greedy actions under recommendation control.

A recommender that picks the row an agent consults can only ever induce
the greedy actions of existing rows. The reachable set of a table is
therefore the union of its row argmaxes, and appending a row can only
grow it. These facts, and the rate at which random rows cover the whole
action set, are checked numerically by the two verify_* routines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

RowSampler = Callable[[np.random.Generator, int], np.ndarray]
"""Draws one table row: (rng, num_actions) -> shape (num_actions,) array."""


def uniform_rows(rng: np.random.Generator, num_actions: int) -> np.ndarray:
    """Default row sampler: iid uniform values, every argmax equally likely."""
    return rng.uniform(-1.0, 0.0, num_actions)


def reachable_set(table: np.ndarray) -> frozenset[int]:
    """All actions some recommendation state makes greedy."""
    if table.ndim != 2 or table.shape[0] < 1:
        raise ValueError("table must be 2-d with at least one row")
    return frozenset(int(a) for a in np.argmax(table, axis=1))


def extend(table: np.ndarray, row: np.ndarray) -> np.ndarray:
    """Copy of the table with one row appended (one more recommendation state)."""
    row = np.asarray(row)
    if row.shape != (table.shape[1],):
        raise ValueError("row length must match the table's action count")
    return np.vstack([table, row])


def steering_potential(qtensor: np.ndarray) -> float:
    """Fraction of joint action profiles the recommender can induce.

    Per-agent reachable sets are independent, so the count of inducible
    profiles is the product of their sizes; normalizing by k^n gives a
    value in (0, 1]. The product is accumulated in log space to stay
    finite for large populations.
    """
    n, _, k = qtensor.shape
    log_total = sum(math.log(len(reachable_set(qtensor[i]))) for i in range(n))
    return math.exp(log_total - n * math.log(k))


def check_extension_preserves_reach(table: np.ndarray, row: np.ndarray) -> bool:
    """One instance of the extension property.

    Appending a row must keep every previously reachable action and add
    exactly the new row's argmax.
    """
    before = reachable_set(table)
    after = reachable_set(extend(table, row))
    return before <= after and after == before | {int(np.argmax(row))}


@dataclass(frozen=True)
class CoverageResult:
    """Empirical reachability coverage of growing tables.

    coverage[j] is the fraction of trials in which a table built by
    extending row-by-row reached the full action set within j+1 rows.
    full_support indicates every action showed up as some sampled row's
    argmax; when False the coverage limit need not be 1.
    """

    coverage: np.ndarray
    full_support: bool

    def at(self, num_states: int) -> float:
        return float(self.coverage[num_states - 1])


def check_coverage_growth(
    num_actions: int,
    max_states: int,
    trials: int,
    rng: np.random.Generator,
    row_sampler: RowSampler = uniform_rows,
) -> CoverageResult:
    """Monte Carlo check that coverage approaches 1 as tables grow.

    Each trial starts from a single sampled row and extends it to
    max_states rows; per trial the coverage indicator is monotone in the
    number of rows by construction.
    """
    if num_actions < 1 or max_states < 1 or trials < 1:
        raise ValueError("num_actions, max_states and trials must be positive")
    draws = np.empty((trials, max_states), dtype=np.int64)
    for t in range(trials):
        for j in range(max_states):
            draws[t, j] = int(np.argmax(row_sampler(rng, num_actions)))
    seen = np.zeros((trials, max_states), dtype=bool)
    hit = np.zeros((trials, num_actions), dtype=bool)
    for j in range(max_states):
        hit[np.arange(trials), draws[:, j]] = True
        seen[:, j] = hit.all(axis=1)
    full_support = bool(np.all(hit.any(axis=0)))
    return CoverageResult(coverage=seen.mean(axis=0), full_support=full_support)


def enumerate_inducible_profiles(qtensor: np.ndarray) -> int:
    """Brute-force count of distinct joint greedy profiles over all
    recommendation vectors. Exponential in n; oracle for small cases."""
    n, m, _ = qtensor.shape
    greedy = np.argmax(qtensor, axis=2)  # (n, m)
    profiles = {
        tuple(int(greedy[i, rec[i]]) for i in range(n))
        for rec in np.ndindex(*([m] * n))
    }
    return len(profiles)
