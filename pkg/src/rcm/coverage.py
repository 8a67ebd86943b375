"""Target coverage function and its incremental counter form."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from rcm.model import Scenario


class CounterUnderflowError(RuntimeError):
    """Removing a trajectory whose targets are not all counted."""


def coverage_value(s: Scenario, trajs: Iterable[int]) -> float:
    """Total weight of the targets covered by ``trajs``."""
    ids = list(trajs)
    if not ids:
        return 0.0
    for p in ids:
        if not 0 <= p < s.n_trajectories:
            raise KeyError(f"unknown trajectory id {p}")
    covered = np.zeros(s.n_targets + 1, dtype=bool)
    covered[s.cover_matrix[ids]] = True
    covered[-1] = False
    return float(s.weights[covered[:-1]].sum())


class CoverageCounter:
    """Per-target multiplicity counts for a working set of trajectories.

    ``value`` is the total weight of targets with a positive count. Every
    update and query touches only the targets of one trajectory.
    """

    def __init__(self, s: Scenario):
        self.scenario = s
        # last slot is the padding sentinel; it is never read as covered
        self.counts = np.zeros(s.n_targets + 1, dtype=np.int64)
        self.value = 0.0

    @classmethod
    def holding(cls, s: Scenario, trajs) -> "CoverageCounter":
        """Counter pre-loaded with every trajectory in ``trajs``."""
        c = cls(s)
        ids = np.asarray(trajs, dtype=np.intp)
        if ids.size:
            c.counts = np.bincount(s.cover_matrix[ids].ravel(), minlength=s.n_targets + 1).astype(np.int64)
            c.counts[-1] = 0
            c.value = c.support_value()
        return c

    def add(self, p: int) -> float:
        cov = self.scenario.cover_arrays[p]
        fresh = cov[self.counts[cov] == 0]
        self.counts[cov] += 1
        gain = float(self.scenario.weights[fresh].sum())
        self.value += gain
        return gain

    def remove(self, p: int) -> float:
        cov = self.scenario.cover_arrays[p]
        held = self.counts[cov]
        if (held < 1).any():
            raise CounterUnderflowError(f"trajectory {p} is not held by the counter")
        lost = cov[held == 1]
        self.counts[cov] -= 1
        loss = float(self.scenario.weights[lost].sum())
        self.value -= loss
        return loss

    def marginal_gain(self, p: int) -> float:
        cov = self.scenario.cover_arrays[p]
        return float(self.scenario.weights[cov[self.counts[cov] == 0]].sum())

    def marginal_loss(self, p: int) -> float:
        """Weight lost if ``p`` were removed (targets it holds alone)."""
        cov = self.scenario.cover_arrays[p]
        return float(self.scenario.weights[cov[self.counts[cov] == 1]].sum())

    def gains(self, trajs: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`marginal_gain` over several trajectories."""
        s = self.scenario
        m = s.cover_matrix[trajs]
        return np.where(self.counts[m] == 0, s.weights_padded[m], 0.0).sum(axis=1)

    def losses(self, trajs: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`marginal_loss` over several held trajectories."""
        s = self.scenario
        m = s.cover_matrix[trajs]
        return np.where(self.counts[m] == 1, s.weights_padded[m], 0.0).sum(axis=1)

    def support_value(self) -> float:
        """Recompute value from the counts; used for audits."""
        return float(self.scenario.weights[self.counts[:-1] > 0].sum())


def counter_new(s: Scenario) -> CoverageCounter:
    return CoverageCounter(s)


def counter_add(c: CoverageCounter, p: int) -> float:
    return c.add(p)


def counter_remove(c: CoverageCounter, p: int) -> float:
    return c.remove(p)


def marginal_gain(c: CoverageCounter, p: int) -> float:
    return c.marginal_gain(p)
