import csv
import io
import statistics

import pytest

from rcm.bench import ExperimentConfig, relative_accuracy, run_experiment

SMALL_GEO = dict(n_robots=5, n_targets=30, n_traj_per_robot=3, traj_len_lt=40.0, sense_dist_ls=12.0)


def cfg(**kw):
    base = dict(kind="relative_vs_2pg", scenario=SMALL_GEO, alphas=[1, 2], repetitions=3, timing=False)
    base.update(kw)
    return ExperimentConfig.from_dict(base)


def parse(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_presets_and_overrides():
    c = ExperimentConfig.from_dict({"kind": "sensitivity"})
    assert c.alphas == (6,) and c.fail_sizes == (0, 2, 4, 6, 8, 10, 12)
    assert c.scenario["n_robots"] == 15 and c.repetitions == 100
    c = ExperimentConfig.from_dict({"kind": "accuracy_vs_bf", "scenario": {"n_targets": 10}})
    assert c.scenario == dict(n_robots=6, n_targets=10, traj_len_lt=50.0, sense_dist_ls=15.0)


@pytest.mark.parametrize(
    "doc",
    [{"kind": "nope"}, {"kind": "runtime", "repetitions": 0}, {"kind": "runtime", "solvers": ["zz"]}, {"kind": "runtime", "colour": 1}],
)
def test_config_errors(doc):
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict(doc)


def test_csv_is_deterministic():
    a = run_experiment(cfg(repetitions=1)).to_csv()
    b = run_experiment(cfg(repetitions=1)).to_csv()
    assert a == b
    assert a.splitlines()[0] == "seed,solver,alpha,fail_size,residual,reference_residual,relative_accuracy_percent,f_evals,wall_time_ms"
    assert "\r" not in a


def test_parallel_matches_sequential():
    assert run_experiment(cfg(workers=2)).to_csv() == run_experiment(cfg()).to_csv()


def test_reference_rows():
    rows = parse(run_experiment(cfg(solvers=["obg", "org-u-d"])).to_csv())
    assert {r["solver"] for r in rows} == {"obg", "org-u-d", "2pg"}
    assert len(rows) == 3 * 2 * 3
    for r in rows:
        if r["solver"] == "2pg" and r["relative_accuracy_percent"] != "NA":
            assert float(r["relative_accuracy_percent"]) == 100.0
        if r["relative_accuracy_percent"] != "NA":
            expected = 100.0 * float(r["residual"]) / float(r["reference_residual"])
            assert float(r["relative_accuracy_percent"]) == pytest.approx(expected, rel=1e-12)
        else:
            assert float(r["reference_residual"]) == 0.0


def test_accuracy_vs_bf_is_at_most_100():
    c = ExperimentConfig.from_dict(
        dict(kind="accuracy_vs_bf", scenario=dict(n_targets=25, n_traj_per_robot=3), repetitions=2, alphas=[2], timing=False)
    )
    rows = parse(run_experiment(c).to_csv())
    for r in rows:
        acc = r["relative_accuracy_percent"]
        if acc != "NA":
            assert float(acc) <= 100.0 + 1e-9
            if r["solver"] == "bf":
                assert float(acc) == 100.0


def test_sensitivity_fail_sizes():
    c = cfg(kind="sensitivity", alphas=[2], fail_sizes=[0, 2, 4], repetitions=1)
    rows = parse(run_experiment(c).to_csv())
    assert sorted({int(r["fail_size"]) for r in rows}) == [0, 2, 4]
    zero = [r for r in rows if r["fail_size"] == "0"]
    assert all(float(r["residual"]) >= float(x["residual"]) for r in zero for x in rows if x["solver"] == r["solver"])


def test_aggregates_recompute():
    report = run_experiment(cfg(repetitions=4))
    rows = parse(report.to_csv())
    agg = parse(report.aggregate_csv())
    assert len(agg) == 4 * 2
    for a in agg:
        group = [r for r in rows if (r["solver"], r["alpha"], r["fail_size"]) == (a["solver"], a["alpha"], a["fail_size"])]
        assert int(a["n"]) == len(group)
        for key in ("residual", "f_evals"):
            vals = [float(r[key]) for r in group]
            assert float(a[f"mean_{key}"]) == pytest.approx(statistics.fmean(vals), abs=1e-9)
            assert float(a[f"std_{key}"]) == pytest.approx(statistics.pstdev(vals), abs=1e-9)


def test_relative_accuracy():
    assert relative_accuracy(3.0, 4.0) == 75.0
    assert relative_accuracy(0.0, 0.0) == "NA"


def test_rpm_kind():
    c = ExperimentConfig.from_dict(
        dict(
            kind="rpm",
            scenario=dict(width=30, height=30, n_obstacles=6, n_robots=4, vis_range=5),
            solvers=["obg"],
            alphas=[1],
            repetitions=1,
            rounds=3,
        )
    )
    text = run_experiment(c).to_csv()
    assert text.splitlines()[0] == "round,solver,alpha,fail_size,planned,realized,mean_latency"
    assert len(text.splitlines()) == 4
