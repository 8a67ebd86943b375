"""Synthetic geometric instances: robots and targets in a square region,
each robot with a fan of elliptical candidate arcs.

Each arc is half an ellipse that starts at the robot, with its major axis
along the robot heading plus an offset from an evenly spaced fan. The arc
bulges to the side of its offset (left for a zero offset) and is scaled so
its length is ``traj_len_lt``. A target is covered when it lies within
``sense_dist_ls`` of the in-region part of the sampled polyline.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import ellipe

from rcm.model import Scenario, build_scenario


@dataclass(frozen=True)
class GeoConfig:
    region_side: float = 100.0
    n_robots: int = 15
    n_targets: int = 150
    n_traj_per_robot: int = 7
    traj_len_lt: float = 40.0
    sense_dist_ls: float = 10.0
    alpha: int = 0
    seed: int = 0
    fan_half_angle_deg: float = 60.0
    minor_to_major: float = 0.5
    arc_samples: int = 64

    def __post_init__(self):
        for name in ("region_side", "traj_len_lt", "sense_dist_ls", "minor_to_major"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.n_robots < 1 or self.n_targets < 0:
            raise ValueError("need at least one robot and a non-negative target count")
        if self.n_traj_per_robot < 1:
            raise ValueError("n_traj_per_robot must be >= 1")
        if self.arc_samples < 2:
            raise ValueError("arc_samples must be >= 2")
        if not 0 <= self.alpha <= self.n_robots:
            raise ValueError(f"alpha must be in [0, n_robots], got {self.alpha}")

    @classmethod
    def from_dict(cls, d: dict) -> "GeoConfig":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass(frozen=True)
class Layout:
    robot_pos: np.ndarray  # (R, 2)
    headings: np.ndarray  # (R,)
    target_pos: np.ndarray  # (T, 2)
    arcs: np.ndarray  # (R, n_traj, samples, 2)


def fan_offsets(cfg: GeoConfig) -> np.ndarray:
    if cfg.n_traj_per_robot == 1:
        return np.zeros(1)
    half = np.deg2rad(cfg.fan_half_angle_deg)
    return np.linspace(-half, half, cfg.n_traj_per_robot)


def half_ellipse_length(a: float, b: float) -> float:
    """Arc length of half an ellipse with semi-axes a (along the chord) and b."""
    if a >= b:
        return 2.0 * a * float(ellipe(1.0 - (b / a) ** 2))
    return 2.0 * b * float(ellipe(1.0 - (a / b) ** 2))


def arc_points(origin, direction: float, side: float, cfg: GeoConfig, samples: int) -> np.ndarray:
    """``samples`` points of one candidate arc, uniform in ellipse parameter."""
    a = cfg.traj_len_lt / half_ellipse_length(1.0, cfg.minor_to_major)
    b = cfg.minor_to_major * a
    s = np.linspace(0.0, np.pi, samples)
    local = np.stack([a * (1.0 - np.cos(s)), side * b * np.sin(s)], axis=1)
    c, sn = np.cos(direction), np.sin(direction)
    rot = np.array([[c, -sn], [sn, c]])
    return np.asarray(origin, dtype=float) + local @ rot.T


def sample_layout(cfg: GeoConfig) -> Layout:
    rng = np.random.default_rng(cfg.seed)
    L = cfg.region_side
    robot_pos = rng.uniform(0.0, L, size=(cfg.n_robots, 2))
    headings = rng.uniform(0.0, 2 * np.pi, size=cfg.n_robots)
    target_pos = rng.uniform(0.0, L, size=(cfg.n_targets, 2))
    offsets = fan_offsets(cfg)
    arcs = np.empty((cfg.n_robots, len(offsets), cfg.arc_samples, 2))
    for r in range(cfg.n_robots):
        for j, off in enumerate(offsets):
            side = -1.0 if off < 0 else 1.0
            arcs[r, j] = arc_points(robot_pos[r], headings[r] + off, side, cfg, cfg.arc_samples)
    return Layout(robot_pos, headings, target_pos, arcs)


def clip_segments(a: np.ndarray, b: np.ndarray, side: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Clip segments a->b to the square [0, side]^2 (Liang-Barsky).

    Returns clipped endpoints and a mask of segments that survive.
    """
    d = b - a
    t0 = np.zeros(len(a))
    t1 = np.ones(len(a))
    keep = np.ones(len(a), dtype=bool)
    for axis in (0, 1):
        for p, q in ((-d[:, axis], a[:, axis]), (d[:, axis], side - a[:, axis])):
            parallel = p == 0
            keep &= ~(parallel & (q < 0))
            with np.errstate(divide="ignore", invalid="ignore"):
                r = np.where(parallel, 0.0, q / np.where(parallel, 1.0, p))
            entering = (p < 0) & ~parallel
            leaving = (p > 0) & ~parallel
            t0 = np.where(entering, np.maximum(t0, r), t0)
            t1 = np.where(leaving, np.minimum(t1, r), t1)
    keep &= t0 <= t1
    return a + t0[:, None] * d, a + t1[:, None] * d, keep


def point_segment_distance(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances (n_pts, n_segs) from points to segments."""
    if len(a) == 0:
        return np.full((len(pts), 0), np.inf)
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    rel = pts[:, None, :] - a[None, :, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(dd > 0, np.einsum("psk,sk->ps", rel, d) / np.where(dd > 0, dd, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    closest = a[None, :, :] + t[:, :, None] * d[None, :, :]
    return np.linalg.norm(pts[:, None, :] - closest, axis=2)


def arc_distances(arc: np.ndarray, pts: np.ndarray, side: float) -> np.ndarray:
    """Distance from each point to the in-region part of a sampled arc."""
    a, b, keep = clip_segments(arc[:-1], arc[1:], side)
    if not keep.any():
        return np.full(len(pts), np.inf)
    return point_segment_distance(pts, a[keep], b[keep]).min(axis=1)


def layout_covers(cfg: GeoConfig, layout: Layout) -> list[list[list[int]]]:
    covers = []
    for r in range(cfg.n_robots):
        per_robot = []
        for arc in layout.arcs[r]:
            dist = arc_distances(arc, layout.target_pos, cfg.region_side)
            per_robot.append(np.flatnonzero(dist <= cfg.sense_dist_ls).tolist())
        covers.append(per_robot)
    return covers


def generate(cfg: GeoConfig) -> Scenario:
    """Seeded instance with unit weights; identical configs give identical scenarios."""
    return generate_with_layout(cfg)[0]


def generate_with_layout(cfg: GeoConfig) -> tuple[Scenario, Layout]:
    layout = sample_layout(cfg)
    covers = layout_covers(cfg, layout)
    return build_scenario([1.0] * cfg.n_targets, covers, cfg.alpha), layout


def geometry_document(cfg: GeoConfig, layout: Layout) -> str:
    """Companion plotting file: robot poses, arc polylines, target points."""
    doc = {
        "config": asdict(cfg),
        "robots": [
            {
                "pos": layout.robot_pos[r].tolist(),
                "heading": float(layout.headings[r]),
                "arcs": [arc.tolist() for arc in layout.arcs[r]],
            }
            for r in range(cfg.n_robots)
        ],
        "targets": layout.target_pos.tolist(),
    }
    return json.dumps(doc)
