"""Command-line front end: ``rcm <subcommand> ...``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from rcm import bench, exact, rpm
from rcm.attacks import ATTACK_MODELS, DEFAULT_ATTACK_BUDGET, residual_coverage
from rcm.coverage import coverage_value
from rcm.model import FeasibleSolution, load_scenario, validate_solution
from rcm.scenario_gen import GeoConfig, generate_with_layout, geometry_document
from rcm.solvers import SOLVER_NAMES, parse_solver, solve


class StageError(Exception):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        raise StageError(name, exc) from exc


def _read_scenario(path: str, alpha: int | None = None):
    text = _stage("read scenario", Path(path).read_text)
    s = _stage("load scenario", load_scenario, text)
    if alpha is not None:
        s = _stage("set alpha", s.with_alpha, alpha)
    return s


def _read_solution(s, arg: str) -> FeasibleSolution:
    text = arg
    if not arg.lstrip().startswith("{"):
        text = _stage("read solution", Path(arg).read_text)
    sol = _stage("parse solution", FeasibleSolution.from_json, text)
    if not validate_solution(s, sol):
        raise StageError("validate solution", ValueError("solution must assign one owned trajectory to every robot"))
    return sol


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        _stage("write output", Path(out).write_text, text)


def cmd_generate(args) -> None:
    cfg = _stage(
        "configure generator",
        GeoConfig,
        region_side=args.region,
        n_robots=args.robots,
        n_targets=args.targets,
        n_traj_per_robot=args.traj_per_robot,
        traj_len_lt=args.lt,
        sense_dist_ls=args.ls,
        alpha=args.alpha,
        seed=args.seed,
    )
    s, layout = _stage("generate", generate_with_layout, cfg)
    _emit(s.dumps(indent=None), args.out)
    if args.geometry:
        _stage("write geometry", Path(args.geometry).write_text, geometry_document(cfg, layout))


def cmd_solve(args) -> None:
    s = _read_scenario(args.scenario, args.alpha)
    spec = _stage("parse solver", parse_solver, args.solver, seed=args.seed)
    report = _stage("solve", solve, s, spec)
    traj = report.solution.trajectories
    doc = {
        "solver": spec.name,
        "solution": {str(r): p for r, p in report.solution.chosen.items()},
        "trajectories": list(traj),
        "coverage": coverage_value(s, traj),
        "f_evals": report.f_evals,
        "ls_iterations": report.ls_iterations,
        "wall_time_ms": report.wall_time * 1000.0,
    }
    _emit(json.dumps(doc), args.out)


def cmd_attack(args) -> None:
    s = _read_scenario(args.scenario)
    sol = _read_solution(s, args.solution)
    k = s.alpha if args.k is None else args.k
    res = _stage("attack", residual_coverage, s, sol, args.model, k, budget=args.budget)
    doc = {"model": args.model, "k": k, "removed": list(res.removed), "residual": res.residual, "evals": res.evals}
    _emit(json.dumps(doc), args.out)


def cmd_evaluate(args) -> None:
    s = _read_scenario(args.scenario)
    sol = _read_solution(s, args.solution)
    k = s.alpha if args.k is None else args.k
    res = _stage("evaluate", residual_coverage, s, sol, args.model, k, budget=args.budget)
    _emit(repr(res.residual), None)


def cmd_export_ilp(args) -> None:
    s = _read_scenario(args.scenario, args.alpha)
    text = _stage("export ilp", exact.export_ilp, s, budget=args.budget)
    _emit(text, args.out)


def cmd_bruteforce(args) -> None:
    s = _read_scenario(args.scenario, args.alpha)
    res = _stage("brute force", exact.solve_bruteforce, s, budget=args.budget)
    doc = {
        "solution": {str(r): p for r, p in res.solution.chosen.items()},
        "trajectories": list(res.solution.trajectories),
        "residual": res.residual,
        "enumerated": res.enumerated,
    }
    _emit(json.dumps(doc), args.out)


def cmd_bench(args) -> None:
    text = _stage("read config", Path(args.config).read_text)
    cfg = _stage("parse config", bench.ExperimentConfig.from_json, text)
    if args.workers is not None:
        cfg = dataclasses.replace(cfg, workers=args.workers)
    report = _stage("run experiment", bench.run_experiment, cfg)
    _emit(report.to_csv(), args.out)
    if args.aggregate:
        _stage("write aggregate", Path(args.aggregate).write_text, report.aggregate_csv())


def cmd_rpm(args) -> None:
    cfg = _stage(
        "configure world",
        rpm.RPMConfig,
        width=args.width,
        height=args.height,
        n_obstacles=args.obstacles,
        n_robots=args.robots,
        vis_range=args.vis_range,
        path_len=args.path_len,
        seed=args.seed,
        permanent_failures=args.permanent,
    )
    _stage("parse solver", parse_solver, args.solver)
    if args.snapshots:
        _stage("create snapshot dir", Path(args.snapshots).mkdir, parents=True, exist_ok=True)
    reports = _stage(
        "simulate",
        rpm.run_rpm,
        cfg,
        args.solver,
        args.alpha,
        args.rounds,
        args.fail_model,
        args.fail_size,
        tuple(args.snapshot_rounds),
        args.snapshots,
    )
    _emit(rpm.reports_csv(reports), args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rcm", description="Resilient coverage maximization toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic scenario")
    p.add_argument("--robots", type=int, default=15)
    p.add_argument("--targets", type=int, default=150)
    p.add_argument("--traj-per-robot", type=int, default=7)
    p.add_argument("--lt", type=float, default=40.0, help="trajectory length (m)")
    p.add_argument("--ls", type=float, default=10.0, help="sensing distance (m)")
    p.add_argument("--region", type=float, default=100.0, help="side of the square region (m)")
    p.add_argument("--alpha", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--geometry", help="also write robot/arc/target geometry JSON here")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="run a heuristic solver")
    p.add_argument("--scenario", required=True)
    p.add_argument("--solver", required=True, help=", ".join(SOLVER_NAMES))
    p.add_argument("--alpha", type=int, help="override the scenario's attack size")
    p.add_argument("--seed", type=int, default=0, help="seed for org-r")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    for name, func, hlp in (
        ("attack", cmd_attack, "attack a solution and report the removed set"),
        ("evaluate", cmd_evaluate, "print a solution's residual coverage"),
    ):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--scenario", required=True)
        p.add_argument("--solution", required=True, help="JSON object robot->trajectory, or a file holding one")
        p.add_argument("--model", choices=ATTACK_MODELS, default="optimal")
        p.add_argument("--k", type=int, help="attack size (default: the scenario's alpha)")
        p.add_argument("--budget", type=int, default=DEFAULT_ATTACK_BUDGET)
        if name == "attack":
            p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("export-ilp", help="write the ILP in CPLEX LP format")
    p.add_argument("--scenario", required=True)
    p.add_argument("--alpha", type=int)
    p.add_argument("--budget", type=int, default=exact.DEFAULT_EXPORT_BUDGET)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_ilp)

    p = sub.add_parser("bruteforce", help="exact optimum by enumeration")
    p.add_argument("--scenario", required=True)
    p.add_argument("--alpha", type=int)
    p.add_argument("--budget", type=int, default=exact.DEFAULT_BRUTEFORCE_BUDGET)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bruteforce)

    p = sub.add_parser("bench", help="run an experiment config and write CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--aggregate", help="write per-solver mean/std CSV here")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("rpm", help="persistent monitoring simulation")
    p.add_argument("--rounds", type=int, default=20)
    p.add_argument("--solver", default="org-u-i")
    p.add_argument("--alpha", type=int, default=4)
    p.add_argument("--fail-model", choices=rpm.FAIL_MODELS, default="a2")
    p.add_argument("--fail-size", type=int, help="robots failing each round (default: alpha)")
    p.add_argument("--width", type=int, default=200)
    p.add_argument("--height", type=int, default=200)
    p.add_argument("--obstacles", type=int, default=100)
    p.add_argument("--robots", type=int, default=64)
    p.add_argument("--vis-range", type=int, default=15)
    p.add_argument("--path-len", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--permanent", action="store_true", help="failed robots stay down")
    p.add_argument("--snapshots", help="directory for PGM latency snapshots")
    p.add_argument("--snapshot-rounds", type=int, nargs="*", default=[])
    p.add_argument("--out")
    p.set_defaults(func=cmd_rpm)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except StageError as exc:
        print(f"rcm {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
