import functools
import json
from pathlib import Path

import numpy as np
import pytest

from rcm.model import load_scenario
from rcm.scenario_gen import (
    GeoConfig,
    clip_segments,
    generate,
    generate_with_layout,
    geometry_document,
    half_ellipse_length,
)

GOLDEN = Path(__file__).parent / "golden"
SMALL = dict(n_robots=6, n_targets=40, traj_len_lt=40, sense_dist_ls=10, alpha=2)


def test_deterministic():
    assert generate(GeoConfig(seed=42)).dumps() == generate(GeoConfig(seed=42)).dumps()
    assert generate(GeoConfig(seed=42)).dumps() != generate(GeoConfig(seed=43)).dumps()


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_golden_files(seed):
    expected = (GOLDEN / f"geo_seed{seed}.json").read_text()
    assert generate(GeoConfig(seed=seed, **SMALL)).dumps() == expected
    assert load_scenario(expected).n_trajectories == 42


def test_huge_sensing_radius_covers_everything():
    cfg = GeoConfig(n_robots=4, n_targets=30, sense_dist_ls=150.0, seed=5)
    s = generate(cfg)
    assert all(p.covers == tuple(range(30)) for p in s.trajectories)


def test_shape_and_unit_weights():
    s = generate(GeoConfig(n_robots=5, n_targets=20, n_traj_per_robot=3, alpha=1, seed=9))
    assert (s.n_robots, s.n_trajectories, s.n_targets, s.alpha) == (5, 15, 20, 1)
    assert all(t.weight == 1.0 for t in s.targets)


@pytest.mark.parametrize("bad", [dict(region_side=0), dict(n_traj_per_robot=0), dict(sense_dist_ls=-1), dict(alpha=99)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        GeoConfig(**bad)


def _polyline_length(pts):
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


@pytest.mark.parametrize("ratio", [0.2, 0.5, 1.0, 1.7])
def test_half_ellipse_length_against_polyline(ratio):
    s = np.linspace(0, np.pi, 200_001)
    pts = np.stack([1 - np.cos(s), ratio * np.sin(s)], axis=1)
    assert half_ellipse_length(1.0, ratio) == pytest.approx(_polyline_length(pts), rel=1e-8)


def test_arcs_have_requested_length_and_start_at_robot():
    cfg = GeoConfig(n_robots=3, n_targets=0, traj_len_lt=25.0, seed=1, arc_samples=4001)
    _, layout = generate_with_layout(cfg)
    for r in range(3):
        for arc in layout.arcs[r]:
            assert _polyline_length(arc) == pytest.approx(25.0, rel=1e-5)
            assert np.allclose(arc[0], layout.robot_pos[r])


def test_clip_segments():
    a = np.array([[-5.0, 5.0], [1.0, 1.0], [-1.0, -1.0], [5.0, 5.0]])
    b = np.array([[5.0, 5.0], [2.0, 2.0], [-2.0, 5.0], [15.0, 5.0]])
    ca, cb, keep = clip_segments(a, b, 10.0)
    assert keep.tolist() == [True, True, False, True]
    assert np.allclose(ca[0], [0, 5]) and np.allclose(cb[0], [5, 5])
    assert np.allclose(ca[1], [1, 1]) and np.allclose(cb[1], [2, 2])
    assert np.allclose(cb[3], [10, 5])


@functools.lru_cache
def _unit_half_length(ratio):
    # scale found numerically from a unit-major polyline
    s = np.linspace(0, np.pi, 100_001)
    return _polyline_length(np.stack([1 - np.cos(s), ratio * np.sin(s)], axis=1))


def _dense_distances(cfg, layout, r, j, factor=10):
    """Point-sampled distance to the in-region arc, built from scratch."""
    n = (cfg.arc_samples - 1) * factor + 1
    a = cfg.traj_len_lt / _unit_half_length(cfg.minor_to_major)
    b = cfg.minor_to_major * a
    offsets = np.linspace(-np.deg2rad(cfg.fan_half_angle_deg), np.deg2rad(cfg.fan_half_angle_deg), cfg.n_traj_per_robot)
    off = offsets[j]
    side = -1.0 if off < 0 else 1.0
    th = layout.headings[r] + off
    s = np.linspace(0, np.pi, n)
    x, y = a * (1 - np.cos(s)), side * b * np.sin(s)
    pts = layout.robot_pos[r] + np.stack([x * np.cos(th) - y * np.sin(th), x * np.sin(th) + y * np.cos(th)], axis=1)
    inside = np.all((pts >= 0) & (pts <= cfg.region_side), axis=1)
    if not inside.any():
        return np.full(len(layout.target_pos), np.inf)
    pts = pts[inside]
    return np.linalg.norm(layout.target_pos[:, None, :] - pts[None, :, :], axis=2).min(axis=1)


def test_coverage_consistent_with_dense_sampling():
    flips = 0
    for seed in range(20):
        cfg = GeoConfig(seed=seed)
        s, layout = generate_with_layout(cfg)
        tol = 0.01 * cfg.sense_dist_ls
        for r in range(cfg.n_robots):
            for j, pid in enumerate(s.robots[r].trajectories):
                d = _dense_distances(cfg, layout, r, j)
                covered = np.zeros(cfg.n_targets, dtype=bool)
                covered[list(s.trajectories[pid].covers)] = True
                disagree = covered != (d <= cfg.sense_dist_ls)
                assert not (disagree & (np.abs(d - cfg.sense_dist_ls) > tol)).any()
                flips += int(disagree.sum())
    assert flips < 50


def test_setting_statistics_over_seeds():
    overlapping = 0
    means = []
    for seed in range(100):
        s = generate(GeoConfig(seed=seed))
        sizes = [len(p.covers) for p in s.trajectories]
        means.append(np.mean(sizes))
        robots_per_target = [set() for _ in range(s.n_targets)]
        for p in s.trajectories:
            for t in p.covers:
                robots_per_target[t].add(p.robot)
        overlapping += any(len(rs) >= 2 for rs in robots_per_target)
        assert 0 < np.mean(sizes) < 150
    assert overlapping >= 95


def test_geometry_document_schema():
    cfg = GeoConfig(n_robots=2, n_targets=3, n_traj_per_robot=2, arc_samples=5, seed=0)
    _, layout = generate_with_layout(cfg)
    doc = json.loads(geometry_document(cfg, layout))
    assert len(doc["robots"]) == 2 and len(doc["targets"]) == 3
    assert len(doc["robots"][0]["arcs"]) == 2 and len(doc["robots"][0]["arcs"][0]) == 5
    assert set(doc["robots"][0]) == {"pos", "heading", "arcs"}
