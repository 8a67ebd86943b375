"""Polynomial-time solvers: oblivious greedy, ordered greedy, local search,
and the two-phase greedy baseline.

Every argmax breaks ties by lowest trajectory id and every robot ordering
by lowest robot id. ``f_evals`` counts evaluations of the coverage function
(a marginal query on the counter counts as one).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from rcm.attacks import GREEDY_ATTACKS
from rcm.coverage import CoverageCounter, coverage_value
from rcm.model import FeasibleSolution, Scenario

SOLVER_NAMES = (
    "obg",
    "org-u-i",
    "org-u-d",
    "org-m-i",
    "org-m-d",
    "org-r",
    "ls-a1-i1",
    "ls-a1-i2",
    "ls-a2-i1",
    "ls-a2-i2",
    "2pg",
)


@dataclass(frozen=True)
class SolverSpec:
    kind: str  # obg | org | ls | tpg
    org_criteria: str = "union"  # union | max_individual | random
    org_order: str = "increasing"  # increasing | decreasing
    ls_attack: str = "a2"  # a1 | a2
    ls_init: str = "i2_org_u_i"  # i1_obg | i2_org_u_i
    rng_seed: int = 0

    @property
    def name(self) -> str:
        if self.kind == "obg":
            return "obg"
        if self.kind == "tpg":
            return "2pg"
        if self.kind == "org":
            if self.org_criteria == "random":
                return "org-r"
            crit = {"union": "u", "max_individual": "m"}[self.org_criteria]
            return f"org-{crit}-{self.org_order[0]}"
        return f"ls-{self.ls_attack}-{self.ls_init[:2]}"


@dataclass(frozen=True)
class SolveReport:
    solution: FeasibleSolution
    f_evals: int
    ls_iterations: int = 0
    wall_time: float = 0.0  # seconds
    # greedy solvers: chosen marginal gain per step; local search: the
    # estimate of the initial solution and of every accepted move
    trace: tuple[float, ...] = field(default=())


def parse_solver(name: str, seed: int = 0) -> SolverSpec:
    name = name.lower()
    if name == "obg":
        return SolverSpec("obg")
    if name == "2pg":
        return SolverSpec("tpg")
    if name == "org-r":
        return SolverSpec("org", org_criteria="random", rng_seed=seed)
    parts = name.split("-")
    if len(parts) == 3 and parts[0] == "org" and parts[1] in "um" and parts[2] in ("i", "d"):
        return SolverSpec(
            "org",
            org_criteria="union" if parts[1] == "u" else "max_individual",
            org_order="increasing" if parts[2] == "i" else "decreasing",
        )
    if len(parts) == 3 and parts[0] == "ls" and parts[1] in ("a1", "a2") and parts[2] in ("i1", "i2"):
        return SolverSpec(
            "ls",
            ls_attack=parts[1],
            ls_init="i1_obg" if parts[2] == "i1" else "i2_org_u_i",
        )
    raise ValueError(f"unknown solver {name!r}; expected one of {', '.join(SOLVER_NAMES)}")


def _sorted_trajs(s: Scenario, r: int) -> np.ndarray:
    return np.sort(np.asarray(s.robots[r].trajectories, dtype=np.intp))


def solve_obg(s: Scenario) -> SolveReport:
    start = time.perf_counter()
    chosen, gains = {}, []
    for robot in s.robots:
        cand = _sorted_trajs(s, robot.id)
        vals = s.individual_values[cand]
        j = int(np.argmax(vals))
        chosen[robot.id] = int(cand[j])
        gains.append(float(vals[j]))
    return SolveReport(
        FeasibleSolution(chosen),
        f_evals=s.n_trajectories,
        wall_time=time.perf_counter() - start,
        trace=tuple(gains),
    )


def _sort_value(s: Scenario, r: int, criteria: str) -> tuple[float, int]:
    trajs = s.robots[r].trajectories
    if criteria == "union":
        return coverage_value(s, trajs), 1
    if criteria == "max_individual":
        return float(s.individual_values[list(trajs)].max()), len(trajs)
    raise ValueError(f"sort criteria must be 'union' or 'max_individual', got {criteria!r}")


def sort_value(s: Scenario, r: int, criteria: str) -> float:
    return _sort_value(s, r, criteria)[0]


def robot_order(s: Scenario, spec: SolverSpec) -> tuple[list[int], int]:
    """Robot visiting order for ordered greedy and the evaluations spent."""
    if spec.org_criteria == "random":
        rng = np.random.default_rng(spec.rng_seed)
        return [int(r) for r in rng.permutation(s.n_robots)], 0
    evals, keyed = 0, []
    for robot in s.robots:
        v, e = _sort_value(s, robot.id, spec.org_criteria)
        evals += e
        keyed.append((v, robot.id))
    if spec.org_order == "increasing":
        keyed.sort(key=lambda kv: (kv[0], kv[1]))
    elif spec.org_order == "decreasing":
        keyed.sort(key=lambda kv: (-kv[0], kv[1]))
    else:
        raise ValueError(f"order must be 'increasing' or 'decreasing', got {spec.org_order!r}")
    return [r for _, r in keyed], evals


def solve_org(s: Scenario, spec: SolverSpec) -> SolveReport:
    start = time.perf_counter()
    order, evals = robot_order(s, spec)
    counter = CoverageCounter(s)
    chosen, gains = {}, []
    for r in order:
        cand = _sorted_trajs(s, r)
        g = counter.gains(cand)
        evals += len(cand)
        j = int(np.argmax(g))
        counter.add(int(cand[j]))
        chosen[r] = int(cand[j])
        gains.append(float(g[j]))
    return SolveReport(
        FeasibleSolution(chosen),
        f_evals=evals,
        wall_time=time.perf_counter() - start,
        trace=tuple(gains),
    )


def solve_ls(s: Scenario, spec: SolverSpec) -> SolveReport:
    """First-improvement local search over single-trajectory swaps.

    A candidate's objective is estimated as its coverage after the greedy
    attack named by ``spec.ls_attack``. Neighbours are scanned robot by
    robot (ascending id), then over that robot's other trajectories
    (ascending id); the scan restarts after every accepted move.
    """
    start = time.perf_counter()
    if spec.ls_init == "i1_obg":
        init = solve_obg(s)
    elif spec.ls_init == "i2_org_u_i":
        init = solve_org(s, SolverSpec("org", "union", "increasing"))
    else:
        raise ValueError(f"unknown initial solution {spec.ls_init!r}")
    attack = GREEDY_ATTACKS[spec.ls_attack]
    evals = init.f_evals

    def estimate(assign: list[int]) -> float:
        nonlocal evals
        res = attack(s, assign, s.alpha)
        evals += res.evals + 1
        return res.residual

    current = [init.solution.chosen[r] for r in range(s.n_robots)]
    z = estimate(current)
    trace = [z]
    candidates = [sorted(r.trajectories) for r in s.robots]
    moves = 0
    improved = True
    while improved:
        improved = False
        for r, options in enumerate(candidates):
            for p in options:
                if p == current[r]:
                    continue
                neighbour = current.copy()
                neighbour[r] = p
                zn = estimate(neighbour)
                if zn > z:
                    current, z = neighbour, zn
                    trace.append(z)
                    moves += 1
                    improved = True
                    break
            if improved:
                break

    return SolveReport(
        FeasibleSolution(dict(enumerate(current))),
        f_evals=evals,
        ls_iterations=moves,
        wall_time=time.perf_counter() - start,
        trace=tuple(trace),
    )


def bait_robots(s: Scenario) -> list[int]:
    """The alpha robots whose best single trajectory covers the most."""
    best = [(float(s.individual_values[list(r.trajectories)].max()), r.id) for r in s.robots]
    best.sort(key=lambda vr: (-vr[0], vr[1]))
    return sorted(r for _, r in best[: s.alpha])


def solve_tpg(s: Scenario) -> SolveReport:
    """Two-phase greedy, reconstructed.

    Phase 1 fixes the best individual trajectory of the ``alpha`` robots
    with the largest such coverage, treating them as the ones that will
    fail. Phase 2 repeatedly assigns the globally best trajectory (by
    marginal gain over phase-2 picks only) among the remaining robots.
    """
    start = time.perf_counter()
    evals = s.n_trajectories
    chosen = {}
    for r in bait_robots(s):
        cand = _sorted_trajs(s, r)
        chosen[r] = int(cand[int(np.argmax(s.individual_values[cand]))])

    counter = CoverageCounter(s)
    gains = []
    free = [r.id for r in s.robots if r.id not in chosen]
    while free:
        cand = np.sort(np.concatenate([_sorted_trajs(s, r) for r in free]))
        g = counter.gains(cand)
        evals += len(cand)
        j = int(np.argmax(g))
        p = int(cand[j])
        counter.add(p)
        owner = s.owner(p)
        chosen[owner] = p
        free.remove(owner)
        gains.append(float(g[j]))
    return SolveReport(
        FeasibleSolution(chosen),
        f_evals=evals,
        wall_time=time.perf_counter() - start,
        trace=tuple(gains),
    )


def solve(s: Scenario, spec: SolverSpec | str) -> SolveReport:
    if isinstance(spec, str):
        spec = parse_solver(spec)
    if spec.kind == "obg":
        return solve_obg(s)
    if spec.kind == "org":
        return solve_org(s, spec)
    if spec.kind == "ls":
        return solve_ls(s, spec)
    if spec.kind == "tpg":
        return solve_tpg(s)
    raise ValueError(f"unknown solver kind {spec.kind!r}")
