import json

import numpy as np
import pytest

from memekf.cli import main
from memekf.errors import ScenarioError
from memekf.harness import RunConfig, parse_tracker, read_csv, run_campaign, run_oracle
from memekf.metrics import ErrorSeries, rms_series
from memekf.scenarios import BUILTIN, dump_builtin, load_scenario, parse_scenario


def small_stationary(tmp_path, steps=20):
    doc = json.loads(dump_builtin("stationary_iv_a"))
    doc["steps"] = steps
    path = tmp_path / "stationary.json"
    path.write_text(json.dumps(doc))
    return str(path)


def test_builtins_parse():
    for name in BUILTIN:
        scenario, raw = load_scenario(name)
        assert raw == dump_builtin(name).encode()
        state, cfg = scenario.memekf.build(scenario.spec)
        assert state.kin.dim == cfg.dynamics.dim


def test_builtin_values():
    cv, _ = load_scenario("cv_turns_iv_b")
    assert cv.spec.axes == (170, 40)
    np.testing.assert_array_equal(cv.spec.sensor.meas_noise_cov, np.diag([10000, 400]))
    assert cv.random_matrix.v == 56 and cv.random_matrix.tau == 50
    turn, _ = load_scenario("variable_turn_iv_c")
    assert turn.spec.axes == (85, 20) and turn.spec.speed_mps == 150
    assert "2" in turn.memekf.variants


def test_unknown_scenario_fields_rejected():
    doc = json.loads(dump_builtin("stationary_iv_a"))
    doc["colour"] = "red"
    with pytest.raises(ScenarioError):
        parse_scenario(doc)


def test_missing_scenario():
    with pytest.raises(ScenarioError):
        load_scenario("no_such_scenario")


def test_parse_tracker():
    assert parse_tracker("mem-ekf-star") == ("mem-ekf-star", None)
    assert parse_tracker("mem-ekf-star:2") == ("mem-ekf-star", "2")
    with pytest.raises(ScenarioError):
        parse_tracker("kalman")


def test_single_run_files_identical(tmp_path):
    run_campaign(RunConfig(small_stationary(tmp_path), runs=1, out=str(tmp_path / "out")))
    d = tmp_path / "out" / "mem-ekf-star"
    assert sorted(p.name for p in d.iterdir()) == ["aggregate.csv", "run_000.csv"]
    assert (d / "run_000.csv").read_bytes() == (d / "aggregate.csv").read_bytes()
    header = (d / "run_000.csv").read_text().splitlines()[0]
    assert header == "k,cx,cy,alpha,l1,l2,gw"


def test_aggregate_is_rms_of_runs(tmp_path):
    out = tmp_path / "out"
    manifest = run_campaign(RunConfig(small_stationary(tmp_path), ("mem-ekf-star", "random-matrix"), runs=4, out=str(out)))
    for tracker in ("mem-ekf-star", "random-matrix"):
        runs = [read_csv(out / tracker / f"run_{i:03d}.csv") for i in range(4)]
        series = rms_series([ErrorSeries(tuple(r[:, 0].astype(int)), tuple(r[:, 6])) for r in runs])
        agg = read_csv(out / tracker / "aggregate.csv")
        np.testing.assert_allclose(agg[:, 6], series.gw, rtol=1e-15)
        np.testing.assert_allclose(agg[:, 1:6], np.mean(runs, axis=0)[:, 1:6], rtol=1e-14)
        assert manifest["trackers"][tracker]["final_rmgw"] == pytest.approx(series.gw[-1])
    assert manifest["run_seeds"] == [[20190101, 0, i] for i in range(4)]


def test_reruns_byte_identical(tmp_path):
    scen = small_stationary(tmp_path)
    for out in ("a", "b"):
        run_campaign(RunConfig(scen, ("mem-ekf-star", "random-matrix"), runs=2, out=str(tmp_path / out)))
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert files
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_seed_override_changes_output(tmp_path):
    scen = small_stationary(tmp_path)
    run_campaign(RunConfig(scen, runs=1, out=str(tmp_path / "a")))
    run_campaign(RunConfig(scen, runs=1, seed=7, out=str(tmp_path / "b")))
    a = (tmp_path / "a" / "mem-ekf-star" / "run_000.csv").read_bytes()
    b = (tmp_path / "b" / "mem-ekf-star" / "run_000.csv").read_bytes()
    assert a != b


def test_diagnostics_written(tmp_path):
    run_campaign(RunConfig(small_stationary(tmp_path, steps=3), runs=1, out=str(tmp_path / "o"), diagnostics=True))
    lines = (tmp_path / "o" / "mem-ekf-star" / "diagnostics_000.jsonl").read_text().splitlines()
    assert len(lines) == 3
    rec = json.loads(lines[0])
    assert {"k", "i", "C_I", "C_II", "M", "C_Y", "C_pY"} <= set(rec)


def test_failed_campaign_leaves_no_partial_output(tmp_path):
    out = tmp_path / "out"
    with pytest.raises(ScenarioError):
        run_campaign(RunConfig(small_stationary(tmp_path), ("mem-ekf-star", "mem-ekf-star:nope"), out=str(out)))
    assert list(out.iterdir()) == []


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig("stationary_iv_a", runs=0)
    with pytest.raises(ValueError):
        RunConfig("stationary_iv_a", trackers=())


def test_oracle_report(tmp_path):
    out = tmp_path / "oracle.json"
    reports = run_oracle(["pseudo_moments", "pseudo_jacobian"], 20_000, 0, out)
    assert [r.target for r in reports] == ["pseudo_mean", "pseudo_cov", "pseudo_jacobian"]
    data = json.loads(out.read_text())
    assert data[1]["analytic"] == [[8.0, 2.0, 4.0], [2.0, 18.0, 6.0], [4.0, 6.0, 7.0]]


def test_oracle_rejects_unknown_target():
    with pytest.raises(ScenarioError):
        run_oracle(["spread_cov", "nonsense"], 20_000, 0)


def test_cli_scenarios(capsys):
    assert main(["scenarios", "list"]) == 0
    assert set(BUILTIN) <= set(capsys.readouterr().out.split())
    assert main(["scenarios", "show", "cv_turns_iv_b"]) == 0
    assert json.loads(capsys.readouterr().out)["kind"] == "cv_waypoints"


def test_cli_run_and_errors(tmp_path, capsys):
    scen = small_stationary(tmp_path)
    assert main(["run", "--scenario", scen, "--tracker", "mem-ekf-star,random-matrix", "--runs", "2",
                 "--out", str(tmp_path / "cli")]) == 0
    assert "final RMGW" in capsys.readouterr().out
    assert (tmp_path / "cli" / "manifest.json").is_file()
    assert main(["run", "--scenario", "missing.json", "--out", str(tmp_path / "x")]) == 1
    assert main(["oracle", "--target", "bogus", "--samples", "20000", "--out", str(tmp_path / "o.json")]) == 1
    assert "error:" in capsys.readouterr().err


def test_cli_oracle(tmp_path, capsys):
    out = tmp_path / "o.json"
    assert main(["oracle", "--target", "spread_cov,cross_cov", "--samples", "20000", "--out", str(out)]) == 0
    assert [r["target"] for r in json.loads(out.read_text())] == ["spread_cov", "cross_cov"]
