"""Experiment harness: seeded repetitions, per-solver residuals, CSV reports.

Repetition ``i`` uses seed ``base_seed + i`` for the scenario (and for
``org-r``), so every solver in a repetition sees the same instance.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from rcm.attacks import residual_coverage
from rcm.exact import solve_bruteforce
from rcm.rpm import CSV_COLUMNS as RPM_COLUMNS
from rcm.rpm import RPMConfig, run_rpm
from rcm.scenario_gen import GeoConfig, generate
from rcm.solvers import SOLVER_NAMES, parse_solver, solve

KINDS = ("accuracy_vs_bf", "relative_vs_2pg", "large_a2", "runtime", "sensitivity", "rpm")

ROW_COLUMNS = (
    "seed",
    "solver",
    "alpha",
    "fail_size",
    "residual",
    "reference_residual",
    "relative_accuracy_percent",
    "f_evals",
    "wall_time_ms",
)

# Default settings per experiment; anything in the config file overrides them.
PRESETS = {
    "accuracy_vs_bf": dict(
        scenario=dict(n_robots=6, n_targets=60, traj_len_lt=50.0, sense_dist_ls=15.0),
        alphas=[2, 3, 4],
        eval_model="optimal",
    ),
    "relative_vs_2pg": dict(
        scenario=dict(n_robots=15, n_targets=150, traj_len_lt=40.0, sense_dist_ls=10.0),
        alphas=[3, 6, 9],
        eval_model="optimal",
    ),
    "large_a2": dict(
        scenario=dict(n_robots=64, n_targets=1000, traj_len_lt=25.0, sense_dist_ls=5.0),
        alphas=[2, 4, 8, 16, 32],
        eval_model="a2",
    ),
    "runtime": dict(
        scenario=dict(n_robots=100, n_targets=1000, traj_len_lt=25.0, sense_dist_ls=5.0),
        alphas=[10],
        eval_model="a2",
    ),
    "sensitivity": dict(
        scenario=dict(n_robots=15, n_targets=150, traj_len_lt=40.0, sense_dist_ls=10.0),
        alphas=[6],
        fail_sizes=[0, 2, 4, 6, 8, 10, 12],
        eval_model="optimal",
    ),
    "rpm": dict(scenario={}, alphas=[4], eval_model="a2"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    solvers: tuple[str, ...] = ("obg", "org-u-i", "ls-a2-i2", "2pg")
    scenario: dict = field(default_factory=dict)
    alphas: tuple[int, ...] = (2,)
    fail_sizes: tuple[int, ...] | None = None  # None: failures equal alpha
    eval_model: str = "optimal"
    repetitions: int = 100
    base_seed: int = 0
    timing: bool = True
    workers: int = 1
    rounds: int = 20  # rpm only

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        for name in self.solvers:
            parse_solver(name)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        kind = d.get("kind")
        if kind not in KINDS:
            raise ValueError(f"unknown experiment kind {kind!r}; expected one of {KINDS}")
        merged = {**PRESETS[kind], **d}
        merged["scenario"] = {**PRESETS[kind]["scenario"], **d.get("scenario", {})}
        for key in ("solvers", "alphas", "fail_sizes"):
            if merged.get(key) is not None:
                merged[key] = tuple(merged[key])
        unknown = set(merged) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown experiment config keys: {sorted(unknown)}")
        return cls(**merged)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))


@dataclass
class ExperimentReport:
    columns: tuple[str, ...]
    rows: list[dict]
    group_keys: tuple[str, ...]
    value_keys: tuple[str, ...]

    def aggregate(self) -> list[dict]:
        """Mean and population standard deviation per group.

        Rows whose value is ``"NA"`` are left out of that value's statistics.
        """
        groups: dict[tuple, list[dict]] = {}
        for row in self.rows:
            groups.setdefault(tuple(row[k] for k in self.group_keys), []).append(row)
        out = []
        for key, rows in groups.items():
            agg = dict(zip(self.group_keys, key))
            agg["n"] = len(rows)
            for v in self.value_keys:
                vals = [float(r[v]) for r in rows if r[v] != "NA"]
                agg[f"mean_{v}"] = statistics.fmean(vals) if vals else "NA"
                agg[f"std_{v}"] = statistics.pstdev(vals) if vals else "NA"
            out.append(agg)
        return out

    def to_csv(self) -> str:
        return _csv(self.columns, self.rows)

    def aggregate_csv(self) -> str:
        agg = self.aggregate()
        cols = list(self.group_keys) + ["n"]
        for v in self.value_keys:
            cols += [f"mean_{v}", f"std_{v}"]
        return _csv(cols, agg)


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def relative_accuracy(residual: float, reference: float) -> float | str:
    if reference > 0:
        return 100.0 * residual / reference
    return "NA"


def _repetition_rows(cfg: ExperimentConfig, rep: int) -> list[dict]:
    seed = cfg.base_seed + rep
    rows = []
    use_bf = cfg.kind == "accuracy_vs_bf"
    solvers = list(cfg.solvers)
    if not use_bf and "2pg" not in solvers:
        solvers.append("2pg")
    for alpha in cfg.alphas:
        geo = GeoConfig.from_dict({**cfg.scenario, "alpha": alpha, "seed": seed})
        s = generate(geo)
        fails = cfg.fail_sizes if cfg.fail_sizes is not None else (alpha,)

        reports = {name: solve(s, parse_solver(name, seed=seed)) for name in solvers}
        exact = solve_bruteforce(s) if use_bf else None
        for fail in fails:
            fail = min(fail, s.n_robots)
            residuals = {
                name: residual_coverage(s, rep_.solution, cfg.eval_model, fail).residual
                for name, rep_ in reports.items()
            }
            if use_bf:
                if fail == alpha and cfg.eval_model == "optimal":
                    ref = exact.residual
                else:
                    ref = residual_coverage(s, exact.solution, cfg.eval_model, fail).residual
                residuals["bf"] = ref
            else:
                ref = residuals["2pg"]
            for name in solvers + (["bf"] if use_bf else []):
                if name == "bf":
                    evals, wall = exact.enumerated, 0.0
                else:
                    evals, wall = reports[name].f_evals, reports[name].wall_time * 1000.0
                rows.append(
                    dict(
                        seed=seed,
                        solver=name,
                        alpha=alpha,
                        fail_size=fail,
                        residual=residuals[name],
                        reference_residual=ref,
                        relative_accuracy_percent=relative_accuracy(residuals[name], ref),
                        f_evals=evals,
                        wall_time_ms=wall if cfg.timing else 0.0,
                    )
                )
    return rows


def _rpm_rows(cfg: ExperimentConfig, rep: int) -> list[dict]:
    seed = cfg.base_seed + rep
    rpm_cfg = RPMConfig.from_dict({**cfg.scenario, "seed": seed})
    rows = []
    for alpha in cfg.alphas:
        fails = cfg.fail_sizes if cfg.fail_sizes is not None else (alpha,)
        for fail in fails:
            for name in cfg.solvers:
                for r in run_rpm(rpm_cfg, name, alpha, cfg.rounds, cfg.eval_model, fail):
                    rows.append(dict(zip(RPM_COLUMNS, r.csv_row())))
    return rows


def _run_one(args) -> list[dict]:
    cfg, rep = args
    return _rpm_rows(cfg, rep) if cfg.kind == "rpm" else _repetition_rows(cfg, rep)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    jobs = [(cfg, rep) for rep in range(cfg.repetitions)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            per_rep = list(pool.map(_run_one, jobs))
    else:
        per_rep = [_run_one(job) for job in jobs]
    rows = [row for chunk in per_rep for row in chunk]
    if cfg.kind == "rpm":
        return ExperimentReport(
            RPM_COLUMNS, rows, ("solver", "alpha", "fail_size"), ("planned", "realized", "mean_latency")
        )
    return ExperimentReport(
        ROW_COLUMNS,
        rows,
        ("solver", "alpha", "fail_size"),
        ("residual", "relative_accuracy_percent", "f_evals", "wall_time_ms"),
    )


def config_document(cfg: ExperimentConfig) -> str:
    return json.dumps(asdict(cfg), indent=2)

