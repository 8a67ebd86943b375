"""Attacks on a chosen trajectory set and the residual coverage they leave.

``optimal_attack`` enumerates removal sets exhaustively. The two greedy
attackers come in two builds: the accelerated ones keep a
:class:`~rcm.coverage.CoverageCounter` of the working set, the ``*_naive``
ones recompute F from scratch and exist as differential-test oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, islice
from math import comb
from typing import Iterable

import numpy as np

from rcm.coverage import CoverageCounter, coverage_value
from rcm.model import FeasibleSolution, Scenario

DEFAULT_ATTACK_BUDGET = 10**7

ATTACK_MODELS = ("optimal", "a1", "a2")


class BudgetExceededError(RuntimeError):
    """An exhaustive enumeration would exceed its configured budget."""


@dataclass(frozen=True)
class AttackResult:
    removed: tuple[int, ...]
    residual: float
    evals: int


def solution_ids(sol: FeasibleSolution | Iterable[int]) -> list[int]:
    if isinstance(sol, FeasibleSolution):
        return list(sol.trajectories)
    return sorted(set(int(p) for p in sol))


def _finish(s: Scenario, ids: list[int], removed: Iterable[int], evals: int) -> AttackResult:
    removed = tuple(sorted(removed))
    gone = set(removed)
    residual = coverage_value(s, [p for p in ids if p not in gone])
    return AttackResult(removed, residual, evals)


def optimal_attack(
    s: Scenario,
    sol: FeasibleSolution | Iterable[int],
    k: int,
    budget: int = DEFAULT_ATTACK_BUDGET,
) -> AttackResult:
    """Exact worst-case removal of at most ``k`` trajectories.

    F is monotone, so only subsets of size exactly ``min(k, |sol|)`` are
    scanned, in lexicographic order; the first minimiser wins.
    """
    if k < 0:
        raise ValueError(f"attack size must be non-negative, got {k}")
    ids = solution_ids(sol)
    n = len(ids)
    m = min(k, n)
    n_subsets = comb(n, m)
    if n_subsets > budget:
        raise BudgetExceededError(
            f"optimal attack needs C({n}, {m}) = {n_subsets} subsets, budget is {budget}"
        )
    if m == 0:
        return _finish(s, ids, (), 1)

    T = s.n_targets
    incidence = np.zeros((n, T + 1), dtype=np.int32)
    rows = np.repeat(np.arange(n), s.cover_matrix.shape[1])
    np.add.at(incidence, (rows, s.cover_matrix[ids].ravel()), 1)
    incidence = incidence[:, :T]
    total = incidence.sum(axis=0)
    weights = s.weights

    chunk = max(1, 4_000_000 // (m * max(T, 1)))
    subsets = combinations(range(n), m)
    best_val, best_idx, offset = np.inf, 0, 0
    while True:
        block = np.array(list(islice(subsets, chunk)), dtype=np.intp)
        if block.size == 0:
            break
        remaining = total - incidence[block].sum(axis=1)
        vals = (remaining > 0) @ weights if T else np.zeros(len(block))
        j = int(np.argmin(vals))
        if vals[j] < best_val:
            best_val, best_idx = vals[j], offset + j
        offset += len(block)

    chosen = next(islice(combinations(range(n), m), best_idx, None))
    return _finish(s, ids, (ids[i] for i in chosen), n_subsets)


def greedy_attack_a1(s: Scenario, sol: FeasibleSolution | Iterable[int], k: int) -> AttackResult:
    """Grow the removed set by largest marginal coverage increase."""
    if k < 0:
        raise ValueError(f"attack size must be non-negative, got {k}")
    ids = solution_ids(sol)
    cand = np.asarray(ids, dtype=np.intp)
    counter = CoverageCounter(s)
    removed, evals = [], 0
    for _ in range(min(k, len(ids))):
        gains = counter.gains(cand)
        evals += len(cand)
        j = int(np.argmax(gains))
        counter.add(int(cand[j]))
        removed.append(int(cand[j]))
        cand = np.delete(cand, j)
    return _finish(s, ids, removed, evals)


def greedy_attack_a2(s: Scenario, sol: FeasibleSolution | Iterable[int], k: int) -> AttackResult:
    """Shrink the survivor set by largest marginal coverage decrease."""
    if k < 0:
        raise ValueError(f"attack size must be non-negative, got {k}")
    ids = solution_ids(sol)
    keep = np.asarray(ids, dtype=np.intp)
    counter = CoverageCounter.holding(s, keep)
    removed, evals = [], 0
    for _ in range(min(k, len(ids))):
        losses = counter.losses(keep)
        evals += len(keep)
        j = int(np.argmax(losses))
        counter.remove(int(keep[j]))
        removed.append(int(keep[j]))
        keep = np.delete(keep, j)
    return _finish(s, ids, removed, evals)


def greedy_attack_a1_naive(s: Scenario, sol: FeasibleSolution | Iterable[int], k: int) -> AttackResult:
    ids = solution_ids(sol)
    chosen: list[int] = []
    evals = 0
    for _ in range(min(k, len(ids))):
        best, best_val = None, -np.inf
        for p in ids:
            if p in chosen:
                continue
            v = coverage_value(s, chosen + [p])
            evals += 1
            if v > best_val:
                best, best_val = p, v
        chosen.append(best)
    return _finish(s, ids, chosen, evals)


def greedy_attack_a2_naive(s: Scenario, sol: FeasibleSolution | Iterable[int], k: int) -> AttackResult:
    ids = solution_ids(sol)
    keep = list(ids)
    evals = 0
    for _ in range(min(k, len(ids))):
        best, best_val = None, np.inf
        for p in keep:
            v = coverage_value(s, [q for q in keep if q != p])
            evals += 1
            if v < best_val:
                best, best_val = p, v
        keep.remove(best)
    return _finish(s, ids, set(ids) - set(keep), evals)


GREEDY_ATTACKS = {"a1": greedy_attack_a1, "a2": greedy_attack_a2}


def residual_coverage(
    s: Scenario,
    sol: FeasibleSolution | Iterable[int],
    model: str,
    k: int,
    budget: int = DEFAULT_ATTACK_BUDGET,
) -> AttackResult:
    if model == "optimal":
        return optimal_attack(s, sol, k, budget=budget)
    try:
        attack = GREEDY_ATTACKS[model]
    except KeyError:
        raise ValueError(f"unknown attack model {model!r}; expected one of {ATTACK_MODELS}") from None
    return attack(s, sol, k)
