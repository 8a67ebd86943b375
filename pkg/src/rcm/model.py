"""Problem instances for resilient coverage maximization.

A :class:`Scenario` holds targets (with weights), robots, and every robot's
candidate trajectories together with the set of targets each one covers.
Ids are dense integer indices; every tie in the package is broken by the
lowest id so that all solvers are deterministic for a given document.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np


class ScenarioParseError(ValueError):
    """The scenario document is not well-formed JSON of the expected shape."""


class ScenarioValidationError(ValueError):
    """The scenario document parsed but violates an invariant."""


@dataclass(frozen=True)
class Target:
    id: int
    weight: float = 1.0


@dataclass(frozen=True)
class Trajectory:
    id: int
    robot: int
    covers: tuple[int, ...]


@dataclass(frozen=True)
class Robot:
    id: int
    trajectories: tuple[int, ...]


@dataclass(frozen=True)
class Scenario:
    """Immutable problem instance.

    Construct through :func:`build_scenario` or :func:`load_scenario`; both
    validate. Derived numpy views (weights, padded cover matrix) are cached
    lazily and are not part of equality.
    """

    targets: tuple[Target, ...]
    robots: tuple[Robot, ...]
    trajectories: tuple[Trajectory, ...]
    alpha: int

    @property
    def n_targets(self) -> int:
        return len(self.targets)

    @property
    def n_robots(self) -> int:
        return len(self.robots)

    @property
    def n_trajectories(self) -> int:
        return len(self.trajectories)

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.fromiter((t.weight for t in self.targets), dtype=float, count=len(self.targets))
        w.flags.writeable = False
        return w

    @cached_property
    def weights_padded(self) -> np.ndarray:
        # Index T is a zero-weight sentinel used to pad ragged cover lists.
        w = np.append(self.weights, 0.0)
        w.flags.writeable = False
        return w

    @cached_property
    def cover_arrays(self) -> tuple[np.ndarray, ...]:
        out = []
        for p in self.trajectories:
            a = np.asarray(p.covers, dtype=np.intp)
            a.flags.writeable = False
            out.append(a)
        return tuple(out)

    @cached_property
    def cover_matrix(self) -> np.ndarray:
        """Covers padded to a (P, t*) matrix with the sentinel index T."""
        width = max((len(p.covers) for p in self.trajectories), default=0)
        m = np.full((len(self.trajectories), max(width, 1)), len(self.targets), dtype=np.intp)
        for p in self.trajectories:
            m[p.id, : len(p.covers)] = p.covers
        m.flags.writeable = False
        return m

    @cached_property
    def individual_values(self) -> np.ndarray:
        """F({p}) for every trajectory."""
        v = self.weights_padded[self.cover_matrix].sum(axis=1)
        v.flags.writeable = False
        return v

    def owner(self, traj_id: int) -> int:
        return self.trajectories[traj_id].robot

    def with_alpha(self, alpha: int) -> "Scenario":
        return build_scenario(
            [t.weight for t in self.targets],
            [[p.covers for p in self.robot_trajectories(r.id)] for r in self.robots],
            alpha,
            traj_ids=[list(r.trajectories) for r in self.robots],
        )

    def with_weights(self, weights: Iterable[float]) -> "Scenario":
        return build_scenario(
            list(weights),
            [[p.covers for p in self.robot_trajectories(r.id)] for r in self.robots],
            self.alpha,
            traj_ids=[list(r.trajectories) for r in self.robots],
        )

    def robot_trajectories(self, robot_id: int) -> list[Trajectory]:
        return [self.trajectories[i] for i in self.robots[robot_id].trajectories]

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "targets": [{"id": t.id, "weight": t.weight} for t in self.targets],
            "robots": [
                {
                    "id": r.id,
                    "trajectories": [
                        {"id": p, "covers": list(self.trajectories[p].covers)}
                        for p in r.trajectories
                    ],
                }
                for r in self.robots
            ],
        }

    def dumps(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)


@dataclass(frozen=True)
class FeasibleSolution:
    """Assignment robot id -> trajectory id.

    Not validated on construction; use :func:`validate_solution`.
    """

    chosen: Mapping[int, int]

    def __post_init__(self):
        items = sorted((int(r), int(p)) for r, p in dict(self.chosen).items())
        object.__setattr__(self, "chosen", MappingProxyType(dict(items)))

    def __eq__(self, other):
        if not isinstance(other, FeasibleSolution):
            return NotImplemented
        return dict(self.chosen) == dict(other.chosen)

    def __hash__(self):
        return hash(tuple(self.chosen.items()))

    @property
    def trajectories(self) -> tuple[int, ...]:
        return tuple(sorted(self.chosen.values()))

    @classmethod
    def from_trajectories(cls, s: Scenario, traj_ids: Iterable[int]) -> "FeasibleSolution":
        return cls({s.owner(p): p for p in traj_ids})

    def to_json(self) -> str:
        return json.dumps({str(r): p for r, p in self.chosen.items()})

    @classmethod
    def from_json(cls, text: str) -> "FeasibleSolution":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioParseError(f"solution is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ScenarioParseError("solution must be a JSON object mapping robot id to trajectory id")
        try:
            return cls({int(k): int(v) for k, v in data.items()})
        except (TypeError, ValueError) as exc:
            raise ScenarioParseError(f"solution entries must be integers: {exc}") from exc


def build_scenario(
    weights: Iterable[float],
    robot_covers: Iterable[Iterable[Iterable[int]]],
    alpha: int,
    traj_ids: Iterable[Iterable[int]] | None = None,
) -> Scenario:
    """Build and validate a scenario from plain lists.

    ``robot_covers[r][j]`` is the cover set of robot r's j-th candidate. When
    ``traj_ids`` is omitted trajectories are numbered in robot order.
    """
    robot_covers = [[list(c) for c in covers] for covers in robot_covers]
    if traj_ids is None:
        traj_ids, nxt = [], 0
        for covers in robot_covers:
            traj_ids.append(list(range(nxt, nxt + len(covers))))
            nxt += len(covers)
    doc = {
        "alpha": alpha,
        "targets": [{"id": i, "weight": w} for i, w in enumerate(weights)],
        "robots": [
            {
                "id": r,
                "trajectories": [{"id": p, "covers": c} for p, c in zip(ids, covers)],
            }
            for r, (ids, covers) in enumerate(zip(traj_ids, robot_covers))
        ],
    }
    return scenario_from_dict(doc)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ScenarioValidationError(msg)


def _as_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ScenarioValidationError(f"{what} must be an integer, got {value!r}")
    return int(value)


def scenario_from_dict(doc: Mapping) -> Scenario:
    if not isinstance(doc, Mapping):
        raise ScenarioParseError("scenario document must be a JSON object")
    for key in ("alpha", "targets", "robots"):
        if key not in doc:
            raise ScenarioParseError(f"scenario document is missing '{key}'")
    if not isinstance(doc["targets"], list) or not isinstance(doc["robots"], list):
        raise ScenarioParseError("'targets' and 'robots' must be arrays")

    alpha = _as_int(doc["alpha"], "alpha")
    _require(alpha >= 0, f"alpha must be non-negative, got {alpha}")

    targets: dict[int, Target] = {}
    for entry in doc["targets"]:
        if not isinstance(entry, Mapping) or "id" not in entry:
            raise ScenarioParseError(f"malformed target entry {entry!r}")
        tid = _as_int(entry["id"], "target id")
        weight = entry.get("weight", 1.0)
        if isinstance(weight, bool) or not isinstance(weight, (int, float)):
            raise ScenarioValidationError(f"target {tid}: weight must be a number, got {weight!r}")
        weight = float(weight)
        _require(weight >= 0 and np.isfinite(weight), f"target {tid}: weight must be finite and >= 0, got {weight}")
        _require(tid not in targets, f"duplicate target id {tid}")
        targets[tid] = Target(tid, weight)
    n_targets = len(targets)
    _require(
        set(targets) == set(range(n_targets)),
        f"target ids must be 0..{n_targets - 1} without gaps; got {sorted(targets)}",
    )

    robots: dict[int, Robot] = {}
    trajs: dict[int, Trajectory] = {}
    for entry in doc["robots"]:
        if not isinstance(entry, Mapping) or "id" not in entry or "trajectories" not in entry:
            raise ScenarioParseError(f"malformed robot entry {entry!r}")
        rid = _as_int(entry["id"], "robot id")
        _require(rid not in robots, f"duplicate robot id {rid}")
        if not isinstance(entry["trajectories"], list):
            raise ScenarioParseError(f"robot {rid}: 'trajectories' must be an array")
        _require(len(entry["trajectories"]) > 0, f"robot {rid} has an empty trajectory list")
        owned = []
        for p in entry["trajectories"]:
            if not isinstance(p, Mapping) or "id" not in p or "covers" not in p:
                raise ScenarioParseError(f"robot {rid}: malformed trajectory entry {p!r}")
            pid = _as_int(p["id"], "trajectory id")
            _require(pid not in trajs, f"trajectory {pid} is listed more than once")
            if not isinstance(p["covers"], list):
                raise ScenarioParseError(f"trajectory {pid}: 'covers' must be an array")
            covers = sorted({_as_int(t, f"trajectory {pid} cover entry") for t in p["covers"]})
            for t in covers:
                _require(0 <= t < n_targets, f"trajectory {pid} covers unknown target {t}")
            trajs[pid] = Trajectory(pid, rid, tuple(covers))
            owned.append(pid)
        robots[rid] = Robot(rid, tuple(owned))

    n_robots = len(robots)
    _require(
        set(robots) == set(range(n_robots)),
        f"robot ids must be 0..{n_robots - 1} without gaps; got {sorted(robots)}",
    )
    n_trajs = len(trajs)
    unknown = sorted(p for p in trajs if not 0 <= p < n_trajs)
    _require(not unknown, f"unknown trajectory id(s) {unknown}: ids must be 0..{n_trajs - 1}")
    _require(alpha <= n_robots, f"alpha={alpha} exceeds the number of robots ({n_robots})")

    return Scenario(
        targets=tuple(targets[i] for i in range(n_targets)),
        robots=tuple(robots[i] for i in range(n_robots)),
        trajectories=tuple(trajs[i] for i in range(n_trajs)),
        alpha=alpha,
    )


def load_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"scenario is not valid JSON: {exc}") from exc
    return scenario_from_dict(doc)


def serialize(s: Scenario, indent: int | None = None) -> str:
    return s.dumps(indent=indent)


def tiny() -> Scenario:
    """The 3-robot, 6-target fixture used throughout the tests."""
    text = resources.files("rcm").joinpath("data/tiny.json").read_text()
    return load_scenario(text)


def validate_solution(s: Scenario, sol: FeasibleSolution) -> bool:
    chosen = sol.chosen
    if set(chosen) != set(range(s.n_robots)):
        return False
    for r, p in chosen.items():
        if not 0 <= p < s.n_trajectories or s.trajectories[p].robot != r:
            return False
    return True
