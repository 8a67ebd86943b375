"""Reference implementations built from Python sets and itertools only.

Nothing here imports the package's algorithms; they are the independent
side of every differential test.
"""

from itertools import combinations, product
from math import inf


def covers_of(s):
    return {p.id: set(p.covers) for p in s.trajectories}


def F(s, trajs):
    cov = covers_of(s)
    hit = set()
    for p in trajs:
        hit |= cov[p]
    return sum(s.targets[t].weight for t in hit)


def optimal_residual(s, sol, k):
    sol = sorted(sol)
    m = min(k, len(sol))
    return min(F(s, [p for p in sol if p not in A]) for A in combinations(sol, m))


def best_k_subset_value(s, pool, k):
    """max F(A) over |A| = min(k, |pool|)."""
    return max(F(s, A) for A in combinations(sorted(pool), min(k, len(pool))))


def bruteforce(s, alpha):
    """(best residual, first maximiser as sorted trajectory tuple)."""
    lists = [sorted(r.trajectories) for r in s.robots]
    best, arg = -inf, None
    for sol in product(*lists):
        v = optimal_residual(s, sol, alpha)
        if v > best:
            best, arg = v, tuple(sorted(sol))
    return best, arg


def neighbours(s, assign):
    """Canonical neighbour order: robot ascending, then trajectory ascending."""
    for r, robot in enumerate(s.robots):
        for p in sorted(robot.trajectories):
            if p != assign[r]:
                n = list(assign)
                n[r] = p
                yield n


def greedy_a2(s, sol, k):
    keep = sorted(sol)
    for _ in range(min(k, len(keep))):
        base = F(s, keep)
        drops = [(base - F(s, [q for q in keep if q != p]), p) for p in keep]
        best = max(d for d, _ in drops)
        victim = min(p for d, p in drops if d == best)
        keep.remove(victim)
    return F(s, keep)


def greedy_a1(s, sol, k):
    X = []
    pool = sorted(sol)
    for _ in range(min(k, len(pool))):
        gains = [(F(s, X + [p]) - F(s, X), p) for p in pool if p not in X]
        best = max(g for g, _ in gains)
        X.append(min(p for g, p in gains if g == best))
    return F(s, [p for p in pool if p not in X]), sorted(X)


def argmax_lowest(items):
    """items: (value, id) pairs; highest value, lowest id on ties."""
    best = max(v for v, _ in items)
    return min(i for v, i in items if v == best)


def obg(s):
    return tuple(sorted(argmax_lowest([(F(s, [p]), p) for p in r.trajectories]) for r in s.robots))


def org(s, criteria, order):
    keys = []
    for r in s.robots:
        if criteria == "union":
            v = F(s, r.trajectories)
        else:
            v = max(F(s, [p]) for p in r.trajectories)
        keys.append((v, r.id))
    keys.sort(key=lambda vr: (vr[0] if order == "increasing" else -vr[0], vr[1]))
    picked, gains = [], []
    for _, r in keys:
        base = F(s, picked)
        options = [(F(s, picked + [p]) - base, p) for p in s.robots[r].trajectories]
        p = argmax_lowest(options)
        gains.append(F(s, picked + [p]) - base)
        picked.append(p)
    return tuple(sorted(picked)), gains


def local_search(s, init, attack):
    """attack(s, sol, k) -> residual. Returns (solution, accepted estimates)."""
    owner = {p: r.id for r in s.robots for p in r.trajectories}
    assign = [None] * len(s.robots)
    for p in init:
        assign[owner[p]] = p
    z = attack(s, assign, s.alpha)
    trace = [z]
    while True:
        for n in neighbours(s, assign):
            zn = attack(s, n, s.alpha)
            if zn > z:
                assign, z = n, zn
                trace.append(z)
                break
        else:
            return tuple(sorted(assign)), trace


def tpg(s):
    best = []
    for r in s.robots:
        p = argmax_lowest([(F(s, [q]), q) for q in r.trajectories])
        best.append((F(s, [p]), r.id, p))
    best.sort(key=lambda t: (-t[0], t[1]))
    bait = best[: s.alpha]
    chosen = [p for _, _, p in bait]
    free = {r.id for r in s.robots} - {r for _, r, _ in bait}
    phase2 = []
    while free:
        base = F(s, phase2)
        options = [(F(s, phase2 + [p]) - base, p) for r in sorted(free) for p in s.robots[r].trajectories]
        p = argmax_lowest(options)
        phase2.append(p)
        free -= {r for r in free if p in s.robots[r].trajectories}
    return tuple(sorted(chosen + phase2))
