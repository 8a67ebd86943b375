"""Resilient persistent monitoring on an occupancy grid.

Free cells carry a latency that grows by one per round (capped at
``l_max``) and resets to zero when a surviving robot sees the cell. Each
round is compiled into a weighted coverage scenario: targets are cells with
positive latency, weighted by that latency; each robot has four straight
candidate paths (N, E, S, W) and a path covers every target visible from
any of its cells.

Cells are ``(row, col)`` pairs; north is decreasing row.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from rcm.attacks import residual_coverage
from rcm.coverage import coverage_value
from rcm.model import Robot, Scenario, Target, Trajectory
from rcm.solvers import SolverSpec, parse_solver, solve

HEADINGS = ("N", "E", "S", "W")
STEPS = {"N": (-1, 0), "E": (0, 1), "S": (1, 0), "W": (0, -1)}
FAIL_MODELS = ("none", "a2", "optimal")
CSV_COLUMNS = ("round", "solver", "alpha", "fail_size", "planned", "realized", "mean_latency")


class PlacementError(RuntimeError):
    """Obstacles or robots could not be placed within the retry budget."""


@dataclass(frozen=True)
class RPMConfig:
    width: int = 200
    height: int = 200
    n_obstacles: int = 100
    obstacle_fraction: float = 0.15
    fraction_tolerance: float = 0.02
    n_robots: int = 64
    vis_range: int = 15
    l_max: int = 100
    path_len: int = 5
    seed: int = 0
    permanent_failures: bool = False
    max_retries: int = 1000

    @classmethod
    def from_dict(cls, d: dict) -> "RPMConfig":
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


@dataclass
class GridWorld:
    width: int
    height: int
    obstacles: np.ndarray  # (height, width) bool
    latency: np.ndarray  # (height, width) int, 0 on obstacles
    robots: list[tuple[int, int]]
    headings: list[str]
    vis_range: int
    l_max: int
    path_len: int = 5
    round: int = 0
    seed: int = 0
    alive: list[bool] = field(default_factory=list)
    permanent_failures: bool = False
    last_seen: np.ndarray | None = None
    _vis_cache: dict = field(default_factory=dict, repr=False)

    @property
    def free(self) -> np.ndarray:
        return ~self.obstacles

    @property
    def obstructed_fraction(self) -> float:
        return float(self.obstacles.mean())

    def mean_latency(self) -> float:
        free = self.free
        return float(self.latency[free].mean()) if free.any() else 0.0


@dataclass(frozen=True)
class RoundReport:
    round: int
    solver: str
    alpha: int
    fail_size: int
    planned: float
    realized: float
    surviving: int
    mean_latency: float

    def csv_row(self) -> list:
        return [self.round, self.solver, self.alpha, self.fail_size, self.planned, self.realized, self.mean_latency]


def _place_rectangles(rng: np.random.Generator, cfg: RPMConfig) -> np.ndarray:
    grid = np.zeros((cfg.height, cfg.width), dtype=bool)
    if cfg.n_obstacles == 0:
        return grid
    # overlap eats roughly a tenth of the area at the default density
    side = np.sqrt(cfg.obstacle_fraction * cfg.width * cfg.height / cfg.n_obstacles) * 1.08
    lo, hi = max(1, int(round(0.5 * side))), max(1, int(round(1.5 * side)))
    hs = rng.integers(lo, hi + 1, size=cfg.n_obstacles)
    ws = rng.integers(lo, hi + 1, size=cfg.n_obstacles)
    for h, w in zip(hs, ws):
        h, w = min(h, cfg.height), min(w, cfg.width)
        r = rng.integers(0, cfg.height - h + 1)
        c = rng.integers(0, cfg.width - w + 1)
        grid[r : r + h, c : c + w] = True
    return grid


def world_new(cfg: RPMConfig = RPMConfig()) -> GridWorld:
    if not 0 < cfg.obstacle_fraction < 1:
        raise ValueError(f"obstacle_fraction must be in (0, 1), got {cfg.obstacle_fraction}")
    rng = np.random.default_rng(cfg.seed)
    lo = cfg.obstacle_fraction - cfg.fraction_tolerance
    hi = cfg.obstacle_fraction + cfg.fraction_tolerance
    for _ in range(cfg.max_retries):
        obstacles = _place_rectangles(rng, cfg)
        frac = obstacles.mean()
        if cfg.n_obstacles == 0 or lo <= frac <= hi:
            break
    else:
        raise PlacementError(
            f"no obstacle layout within [{lo:.3f}, {hi:.3f}] after {cfg.max_retries} attempts"
        )
    free_cells = np.flatnonzero(~obstacles.ravel())
    if len(free_cells) < cfg.n_robots:
        raise PlacementError(f"only {len(free_cells)} free cells for {cfg.n_robots} robots")
    picks = rng.choice(free_cells, size=cfg.n_robots, replace=False)
    robots = [(int(f // cfg.width), int(f % cfg.width)) for f in picks]
    headings = [HEADINGS[i] for i in rng.integers(0, 4, size=cfg.n_robots)]
    return GridWorld(
        width=cfg.width,
        height=cfg.height,
        obstacles=obstacles,
        latency=np.zeros_like(obstacles, dtype=np.int64),
        robots=robots,
        headings=headings,
        vis_range=cfg.vis_range,
        l_max=cfg.l_max,
        path_len=cfg.path_len,
        seed=cfg.seed,
        alive=[True] * cfg.n_robots,
        permanent_failures=cfg.permanent_failures,
    )


def supercover(dr: int, dc: int) -> list[tuple[int, int]]:
    """Every cell touched by the segment between the centres of (0, 0) and (dr, dc).

    Where the segment passes exactly through a grid corner, both cells
    beside the corner are included.
    """
    nr, nc = abs(dr), abs(dc)
    sr = 1 if dr > 0 else -1
    sc = 1 if dc > 0 else -1
    r = c = 0
    ir = ic = 0
    cells = [(0, 0)]
    while ir < nr or ic < nc:
        # compare the parameters at which the next row / column boundary is crossed
        cmp = (1 + 2 * ic) * nr - (1 + 2 * ir) * nc
        if cmp == 0:
            cells.append((r, c + sc))
            cells.append((r + sr, c))
            r, c = r + sr, c + sc
            ir, ic = ir + 1, ic + 1
        elif cmp < 0:
            c += sc
            ic += 1
        else:
            r += sr
            ir += 1
        cells.append((r, c))
    return cells


@lru_cache(maxsize=8)
def _sight_table(vis_range: int) -> tuple[np.ndarray, np.ndarray]:
    """Disk offsets and, for each, the padded intermediate cells of its line.

    Padding entries are (0, 0), the viewer's own (free) cell.
    """
    offsets, between = [], []
    for dr in range(-vis_range, vis_range + 1):
        for dc in range(-vis_range, vis_range + 1):
            if dr * dr + dc * dc <= vis_range * vis_range:
                offsets.append((dr, dc))
                between.append([cell for cell in supercover(dr, dc) if cell not in ((0, 0), (dr, dc))])
    width = max(1, max(len(b) for b in between))
    inter = np.zeros((len(offsets), width, 2), dtype=np.intp)
    for i, b in enumerate(between):
        if b:
            inter[i, : len(b)] = b
    return np.asarray(offsets, dtype=np.intp), inter


def visible_flat(w: GridWorld, pos: tuple[int, int]) -> np.ndarray:
    """Sorted flat indices of free cells visible from ``pos``."""
    key = (pos, w.vis_range)
    hit = w._vis_cache.get(key)
    if hit is not None:
        return hit
    offsets, inter = _sight_table(w.vis_range)
    r0, c0 = pos
    rows, cols = offsets[:, 0] + r0, offsets[:, 1] + c0
    inside = (rows >= 0) & (rows < w.height) & (cols >= 0) & (cols < w.width)
    ir = np.clip(inter[:, :, 0] + r0, 0, w.height - 1)
    ic = np.clip(inter[:, :, 1] + c0, 0, w.width - 1)
    blocked = w.obstacles[ir, ic].any(axis=1)
    rows, cols = rows[inside & ~blocked], cols[inside & ~blocked]
    keep = ~w.obstacles[rows, cols]
    flat = np.sort(rows[keep] * w.width + cols[keep])
    flat.flags.writeable = False
    w._vis_cache[key] = flat
    return flat


def visible_cells(w: GridWorld, pos: tuple[int, int]) -> set[tuple[int, int]]:
    """Free cells within ``vis_range`` of ``pos`` with an unobstructed line of sight."""
    return {(int(f // w.width), int(f % w.width)) for f in visible_flat(w, pos)}


def straight_path(w: GridWorld, pos: tuple[int, int], heading: str) -> list[tuple[int, int]]:
    """Up to ``path_len`` steps from ``pos``, stopping before obstacles or the edge."""
    dr, dc = STEPS[heading]
    path = [pos]
    r, c = pos
    for _ in range(w.path_len):
        r, c = r + dr, c + dc
        if not (0 <= r < w.height and 0 <= c < w.width) or w.obstacles[r, c]:
            break
        path.append((r, c))
    return path


def path_visible_flat(w: GridWorld, path: list[tuple[int, int]]) -> np.ndarray:
    return np.unique(np.concatenate([visible_flat(w, cell) for cell in path]))


@dataclass(frozen=True)
class RoundPlan:
    scenario: Scenario
    robot_ids: tuple[int, ...]  # world robot index of each scenario robot
    paths: tuple[tuple[list[tuple[int, int]], ...], ...]  # [scenario robot][heading]
    seen: tuple[np.ndarray, ...]  # flat visible cells per trajectory id


def plan_round(w: GridWorld, alpha: int) -> RoundPlan:
    lat = w.latency.ravel()
    target_flat = np.flatnonzero((lat > 0) & ~w.obstacles.ravel())
    target_of = np.full(w.width * w.height, -1, dtype=np.intp)
    target_of[target_flat] = np.arange(len(target_flat))
    targets = tuple(Target(i, float(lat[f])) for i, f in enumerate(target_flat))

    robot_ids = tuple(i for i, ok in enumerate(w.alive) if ok)
    robots, trajs, paths, seen = [], [], [], []
    for r, world_id in enumerate(robot_ids):
        owned, robot_paths = [], []
        for heading in HEADINGS:
            path = straight_path(w, w.robots[world_id], heading)
            vis = path_visible_flat(w, path)
            ids = target_of[vis]
            pid = len(trajs)
            trajs.append(Trajectory(pid, r, tuple(int(t) for t in ids[ids >= 0])))
            owned.append(pid)
            robot_paths.append(path)
            seen.append(vis)
        robots.append(Robot(r, tuple(owned)))
        paths.append(tuple(robot_paths))
    scenario = Scenario(targets, tuple(robots), tuple(trajs), min(alpha, len(robot_ids)))
    return RoundPlan(scenario, robot_ids, tuple(paths), tuple(seen))


def build_round_scenario(w: GridWorld, alpha: int) -> Scenario:
    return plan_round(w, alpha).scenario


def step(
    w: GridWorld,
    solver: SolverSpec | str,
    alpha: int,
    fail_model: str = "none",
    fail_size: int = 0,
) -> RoundReport:
    """Plan, fail, execute and update latencies for one round."""
    if fail_model not in FAIL_MODELS:
        raise ValueError(f"fail_model must be one of {FAIL_MODELS}, got {fail_model!r}")
    if isinstance(solver, str):
        solver = parse_solver(solver)
    n_alive = sum(w.alive)
    if fail_size > n_alive:
        raise ValueError(f"fail_size={fail_size} exceeds the {n_alive} active robots")

    plan = plan_round(w, alpha)
    s = plan.scenario
    report = solve(s, solver)
    chosen = report.solution.trajectories
    planned = coverage_value(s, chosen)

    removed: tuple[int, ...] = ()
    if fail_model != "none" and fail_size > 0:
        removed = residual_coverage(s, chosen, fail_model, fail_size).removed
    failed = {s.owner(p) for p in removed}

    seen = np.zeros(w.width * w.height, dtype=bool)
    for r, world_id in enumerate(plan.robot_ids):
        if r in failed:
            if w.permanent_failures:
                w.alive[world_id] = False
            continue
        p = report.solution.chosen[r]
        seen[plan.seen[p]] = True
        j = s.robots[r].trajectories.index(p)
        path = plan.paths[r][j]
        w.robots[world_id] = path[-1]
        if len(path) > 1:
            w.headings[world_id] = HEADINGS[j]

    seen = seen.reshape(w.height, w.width)
    realized = float(w.latency[seen].sum())
    free = w.free
    w.latency[free] = np.minimum(w.latency[free] + 1, w.l_max)
    w.latency[seen] = 0
    w.last_seen = seen
    w.round += 1
    return RoundReport(
        round=w.round - 1,
        solver=solver.name,
        alpha=s.alpha,
        fail_size=fail_size if fail_model != "none" else 0,
        planned=planned,
        realized=realized,
        surviving=len(plan.robot_ids) - len(failed),
        mean_latency=w.mean_latency(),
    )


def latency_pgm(w: GridWorld) -> bytes:
    """Binary PGM of the latency field: obstacles 255, latency scaled to 0..254."""
    img = np.rint(w.latency * (254.0 / w.l_max)).astype(np.uint8)
    img[w.obstacles] = 255
    header = f"P5\n{w.width} {w.height}\n255\n".encode("ascii")
    return header + img.tobytes()


def write_pgm(w: GridWorld, path: str | Path) -> None:
    Path(path).write_bytes(latency_pgm(w))


def reports_csv(reports: list[RoundReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rep in reports:
        writer.writerow(rep.csv_row())
    return buf.getvalue()


def run_rpm(
    cfg: RPMConfig,
    solver: str,
    alpha: int,
    rounds: int,
    fail_model: str = "a2",
    fail_size: int | None = None,
    snapshot_rounds: tuple[int, ...] = (),
    snapshot_dir: str | Path | None = None,
) -> list[RoundReport]:
    """Simulate ``rounds`` rounds; ``fail_size`` defaults to ``alpha``."""
    w = world_new(cfg)
    spec = parse_solver(solver, seed=cfg.seed)
    k = alpha if fail_size is None else fail_size
    reports = []
    for _ in range(rounds):
        reports.append(step(w, spec, alpha, fail_model, min(k, sum(w.alive))))
        if snapshot_dir is not None and w.round in snapshot_rounds:
            write_pgm(w, Path(snapshot_dir) / f"latency_round{w.round:04d}.pgm")
    return reports
