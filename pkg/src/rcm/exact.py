"""Exact optimum by exhaustive enumeration, and ILP export in CPLEX LP format."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import chain, combinations
from math import comb, prod

import numpy as np

from rcm.attacks import BudgetExceededError, optimal_attack
from rcm.model import FeasibleSolution, Scenario

DEFAULT_BRUTEFORCE_BUDGET = 10**8
DEFAULT_EXPORT_BUDGET = 10**6
_CHUNK = 1 << 16


@dataclass(frozen=True)
class ExactResult:
    solution: FeasibleSolution
    residual: float
    enumerated: int


def _bitmasks(s: Scenario) -> tuple[np.ndarray, np.ndarray]:
    """Per-trajectory target bitsets (P, words) and a byte lookup of weights.

    ``lut[w, b, v]`` is the weight of the targets whose bits are set in byte
    value ``v`` at byte ``b`` of word ``w``.
    """
    T = s.n_targets
    words = max(1, -(-T // 64))
    masks = np.zeros((s.n_trajectories, words), dtype=np.uint64)
    for p in s.trajectories:
        for t in p.covers:
            masks[p.id, t // 64] |= np.uint64(1) << np.uint64(t % 64)
    w = np.zeros(words * 64)
    w[:T] = s.weights
    bits = (np.arange(256)[:, None] >> np.arange(8)[None, :]) & 1  # (256, 8)
    lut = np.einsum("vk,wbk->wbv", bits.astype(float), w.reshape(words, 8, 8))
    return masks, lut


def _masked_value(x: np.ndarray, lut: np.ndarray) -> np.ndarray:
    total = np.zeros(x.shape[0])
    for w in range(x.shape[1]):
        col = x[:, w]
        for b in range(8):
            total += lut[w, b][((col >> np.uint64(8 * b)) & np.uint64(0xFF)).astype(np.intp)]
    return total


def enumeration_size(s: Scenario) -> int:
    """Feasible solutions times attacks per solution."""
    sizes = [len(r.trajectories) for r in s.robots]
    return prod(sizes) * comb(s.n_robots, min(s.alpha, s.n_robots))


def solve_bruteforce(s: Scenario, budget: int = DEFAULT_BRUTEFORCE_BUDGET) -> ExactResult:
    """Score every feasible solution under the optimal attack.

    Solutions are visited as the lexicographic Cartesian product of the
    robots' trajectory lists (sorted by id); the first maximiser is kept.
    """
    needed = enumeration_size(s)
    if needed > budget:
        raise BudgetExceededError(
            f"brute force needs {needed} attack evaluations, budget is {budget}"
        )
    R = s.n_robots
    lists = [np.sort(np.asarray(r.trajectories, dtype=np.intp)) for r in s.robots]
    shape = tuple(len(l) for l in lists)
    n_solutions = prod(shape)
    masks, lut = _bitmasks(s)
    k = min(s.alpha, R)
    survivor_sets = [
        [r for r in range(R) if r not in attacked] for attacked in combinations(range(R), k)
    ]

    best_val, best_idx = -np.inf, 0
    for lo in range(0, n_solutions, _CHUNK):
        idx = np.arange(lo, min(lo + _CHUNK, n_solutions))
        picks = np.unravel_index(idx, shape)
        per_robot = [masks[lists[r][picks[r]]] for r in range(R)]
        worst = np.full(len(idx), np.inf)
        for survivors in survivor_sets:
            acc = np.zeros_like(per_robot[0]) if per_robot else np.zeros((len(idx), 1), np.uint64)
            for r in survivors:
                acc |= per_robot[r]
            np.minimum(worst, _masked_value(acc, lut), out=worst)
        j = int(np.argmax(worst))
        if worst[j] > best_val:
            best_val, best_idx = worst[j], lo + j

    picks = np.unravel_index(best_idx, shape)
    solution = FeasibleSolution({r: int(lists[r][picks[r]]) for r in range(R)})
    residual = optimal_attack(s, solution, s.alpha).residual
    return ExactResult(solution, residual, n_solutions)


def attack_sets(n_robots: int, alpha: int) -> list[tuple[int, ...]]:
    """All robot subsets of size at most ``alpha``, in lexicographic tuple order."""
    return sorted(chain.from_iterable(combinations(range(n_robots), k) for k in range(alpha + 1)))


def _num(x: float) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def _expr(terms: list[tuple[float, str]]) -> str:
    parts = []
    for coef, var in terms:
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = var if mag == 1 else f"{_num(mag)} {var}"
        parts.append(f"{sign} {body}")
    if parts and parts[0].startswith("+ "):
        parts[0] = parts[0][2:]
    lines, line = [], ""
    for part in parts:
        if line and len(line) + len(part) > 200:
            lines.append(line)
            line = "   " + part
        else:
            line = f"{line} {part}" if line else part
    lines.append(line)
    return "\n".join(lines)


def export_ilp(s: Scenario, budget: int = DEFAULT_EXPORT_BUDGET) -> str:
    """Write the resilient coverage ILP as CPLEX LP text.

    Variables: ``x_p{id}`` (trajectory chosen), ``y_t{id}_w{i}`` (target
    covered under attack set i) and ``z`` (worst-case residual). Attack
    sets are indexed as returned by :func:`attack_sets`. A target with no
    surviving candidate under an attack gets an explicit zero bound.
    """
    R, T = s.n_robots, s.n_targets
    n_attacks = sum(comb(R, k) for k in range(min(s.alpha, R) + 1))
    if n_attacks * max(T, 1) > budget:
        raise BudgetExceededError(
            f"ILP export needs {n_attacks} attack sets x {T} targets, budget is {budget}"
        )
    W = attack_sets(R, min(s.alpha, R))
    covering: list[list[int]] = [[] for _ in range(T)]
    for p in s.trajectories:
        for t in p.covers:
            covering[t].append(p.id)
    integral = all(float(t.weight).is_integer() for t in s.targets)

    out = [
        "\\ resilient coverage maximization",
        f"\\ robots={R} trajectories={s.n_trajectories} targets={T} alpha={s.alpha} attacks={len(W)}",
        "Maximize",
        " obj: z",
        "Subject To",
    ]
    for r in s.robots:
        terms = [(1.0, f"x_p{p}") for p in sorted(r.trajectories)]
        out.append(f" assign_r{r.id}: {_expr(terms)} = 1")
    forced_zero = []
    for t in range(T):
        for i, w in enumerate(W):
            attacked = set(w)
            terms = [(1.0, f"x_p{p}") for p in covering[t] if s.owner(p) not in attacked]
            if not terms:
                forced_zero.append(f"y_t{t}_w{i}")
            terms.append((-1.0, f"y_t{t}_w{i}"))
            out.append(f" cover_t{t}_w{i}: {_expr(terms)} >= 0")
    for i in range(len(W)):
        terms = [(s.targets[t].weight, f"y_t{t}_w{i}") for t in range(T) if s.targets[t].weight != 0]
        terms.append((-1.0, "z"))
        out.append(f" resid_w{i}: {_expr(terms)} >= 0")
    out.append("Bounds")
    out.extend(f" {v} = 0" for v in forced_zero)
    out.append(" z >= 0")
    if integral:
        out.append("Generals")
        out.append(" z")
    out.append("Binaries")
    out.extend(f" x_p{p.id}" for p in s.trajectories)
    out.extend(f" y_t{t}_w{i}" for t in range(T) for i in range(len(W)))
    out.append("End")
    return "\n".join(out) + "\n"
