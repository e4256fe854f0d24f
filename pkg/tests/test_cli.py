import json

import pandas as pd
import pytest
from click.testing import CliRunner

from src import config
from src.main import cli


@pytest.fixture(autouse=True)
def isolated_logs(tmp_path, monkeypatch):
    monkeypatch.setattr(config, "LOGS_DIR", str(tmp_path / "logs"))


@pytest.fixture
def run(tmp_path):
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(cli, [str(arg) for arg in args], catch_exceptions=False)

    return invoke


def test_outage_default_grid(run, tmp_path):
    result = run("outage", "--out", tmp_path)
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(tmp_path / "outage.csv")
    assert list(frame.columns) == ["scheme", "selection", "m", "n", "r", "M", "n_devices", "link_outage",
                                   "final_outage", "manifest", "run_id"]
    assert set(frame["scheme"]) == {"DT", "RT(4)", "CT(3)", "HT(1,1,3)"}
    assert len(frame) == 4 * 101
    dt = frame[frame["scheme"] == "DT"]
    assert (dt["final_outage"] == dt["link_outage"]).all()
    assert (tmp_path / "outage.manifest.json").is_file()


def test_outage_device_sweep_with_optimal(run, tmp_path):
    result = run("outage", "--out", tmp_path, "--devices", 100, "--devices", 1000, "--scheme", "RT(4)",
                 "--optimal", "HT")
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(tmp_path / "outage.csv")
    assert list(frame["selection"]) == ["given", "HT", "given", "HT"]
    assert (frame["link_outage"] > 0).all()
    assert frame["n_devices"].tolist() == [100, 100, 1000, 1000]


def test_outage_rejects_bad_scheme(run, tmp_path):
    result = run("outage", "--out", tmp_path, "--scheme", "HT(1,2)")
    assert result.exit_code != 0
    assert "HT takes 3 argument(s)" in result.output


def test_capacity_with_network_sum(run, tmp_path):
    result = run("capacity", "--out", tmp_path, "--sf", 7, "--sf", 8, "--kind", "DT", "--kind", "RT",
                 "--target", 0.99)
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(tmp_path / "capacity.csv", keep_default_na=False)
    per_sf = frame[frame["interpretation"] == "per_sf"]
    totals = frame[frame["interpretation"] == "sum_over_sf"]
    assert len(per_sf) == 4
    assert list(totals["kind"]) == ["DT", "RT"]
    rt = per_sf[per_sf["kind"] == "RT"]
    assert totals[totals["kind"] == "RT"]["n_devices"].astype(float).iloc[0] == \
        pytest.approx(rt["n_devices"].astype(float).sum(), rel=1e-9)
    assert rt[rt["sf"] == "7"]["M"].astype(float).iloc[0] == 7


def test_energy_table(run, tmp_path):
    result = run("energy", "--out", tmp_path, "--sf", 7, "--copies", 1, "--copies", 3,
                 "--energy-formula", "literal")
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(tmp_path / "energy.csv")
    assert set(frame["formula"]) == {"literal"}
    assert len(frame) == 4
    single = frame[(frame["M"] == 1) & (frame["mode"] == "default")].iloc[0]
    assert single["lifetime_days"] == pytest.approx(618.26, abs=0.01)
    assert frame["feasible"].all()


def test_energy_flags_infeasible_rows(run, tmp_path):
    scenario = json.loads(open(config.DEFAULT_SCENARIO_PATH, encoding="utf-8").read())
    scenario["period_s"] = 20.0
    path = tmp_path / "short_period.json"
    path.write_text(json.dumps(scenario), encoding="utf-8")
    result = run("energy", "--out", tmp_path / "out", "--scenario", path, "--sf", 7, "--copies", 10,
                 "--mode", "default")
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(tmp_path / "out" / "energy.csv")
    assert not frame["feasible"].any()
    assert frame["lifetime_h"].isna().all()


def test_simulate_writes_estimates(run, tmp_path):
    result = run("simulate", "--out", tmp_path, "--trials", 20000, "--quantity", "capture", "--devices", 500,
                 "--copies", 2, "--seed", 3)
    assert result.exit_code == 0, result.output
    records = json.loads((tmp_path / "simulate.json").read_text())["records"]
    assert len(records) == 1
    record = records[0]
    assert {"estimate", "stderr", "trials", "seed"} <= set(record)
    assert record["trials"] == 20000 and record["seed"] == 3
    assert abs(record["estimate"] - record["analytic"]) < 5 * record["stderr"] + 1e-12


def test_verify_analytic_level(run, tmp_path):
    result = run("verify", "--out", tmp_path, "--level", "analytic")
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["passed"] is True
    assert report["levels"] == ["analytic"]
    text = (tmp_path / "verify.txt").read_text()
    assert "checks passed; all checks passed" in text
    assert f"manifest: verify.manifest.json (run {report['run_id']})" in text


def test_replay_reproduces_outputs(run, tmp_path):
    first = tmp_path / "first"
    second = tmp_path / "second"
    result = run("capacity", "--out", first, "--sf", 12, "--kind", "HT*", "--threads", 2, "--theta-linear",
                 "--seed", 99)
    assert result.exit_code == 0, result.output
    result = run("replay", first / "capacity.manifest.json", "--out", second)
    assert result.exit_code == 0, result.output
    assert (second / "capacity.csv").read_bytes() == (first / "capacity.csv").read_bytes()
    assert (second / "capacity.manifest.json").read_bytes() == (first / "capacity.manifest.json").read_bytes()
    manifest = json.loads((first / "capacity.manifest.json").read_text())
    assert manifest["parameters"]["theta_linear"] is True
    assert manifest["seed"] == 99
    assert manifest["outputs"][0]["path"] == "capacity.csv"


def test_replay_of_simulation_is_byte_identical(run, tmp_path):
    result = run("simulate", "--out", tmp_path, "--trials", 10000, "--quantity", "connection", "--sf", 12)
    assert result.exit_code == 0, result.output
    result = run("replay", tmp_path / "simulate.manifest.json")
    assert result.exit_code == 0, result.output
    assert "Replay matches 2 recorded outputs" in result.output


def test_replay_detects_changed_outputs(run, tmp_path):
    assert run("energy", "--out", tmp_path, "--sf", 7, "--copies", 1).exit_code == 0
    manifest = json.loads((tmp_path / "energy.manifest.json").read_text())
    manifest["outputs"][0]["sha256"] = "0" * 64
    edited = tmp_path / "edited" / "energy.manifest.json"
    edited.parent.mkdir()
    edited.write_text(json.dumps(manifest))
    result = run("replay", edited)
    assert result.exit_code != 0
    assert "differs from the recorded run" in result.output


def test_outputs_reference_their_manifest(run, tmp_path):
    assert run("simulate", "--out", tmp_path, "--trials", 10000, "--quantity", "connection").exit_code == 0
    manifest = json.loads((tmp_path / "simulate.manifest.json").read_text())
    assert len(manifest["run_id"]) == 64
    document = json.loads((tmp_path / "simulate.json").read_text())
    assert document["manifest"] == "simulate.manifest.json"
    assert document["run_id"] == manifest["run_id"]
    frame = pd.read_csv(tmp_path / "simulate.csv", dtype={"run_id": str})
    assert set(frame["manifest"]) == {"simulate.manifest.json"}
    assert set(frame["run_id"]) == {manifest["run_id"]}


def test_run_id_follows_parameters(run, tmp_path):
    assert run("energy", "--out", tmp_path / "a", "--sf", 7, "--copies", 1).exit_code == 0
    assert run("energy", "--out", tmp_path / "b", "--sf", 7, "--copies", 2).exit_code == 0
    first = json.loads((tmp_path / "a" / "energy.manifest.json").read_text())["run_id"]
    second = json.loads((tmp_path / "b" / "energy.manifest.json").read_text())["run_id"]
    assert first != second
    assert pd.read_csv(tmp_path / "a" / "energy.csv", dtype={"run_id": str})["run_id"].iloc[0] == first


@pytest.mark.parametrize("key, value", [("copy_cap", "ten"), ("targets", 0.99), ("theta_linear", "false")])
def test_malformed_scenario_values_are_reported(run, tmp_path, key, value):
    scenario = json.loads(open(config.DEFAULT_SCENARIO_PATH, encoding="utf-8").read())
    scenario[key] = value
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(scenario), encoding="utf-8")
    result = run("capacity", "--out", tmp_path / "out", "--scenario", path, "--sf", 7, "--kind", "DT")
    assert result.exit_code == 1
    assert key in result.output
    assert not (tmp_path / "out" / "capacity.csv").exists()
