import hashlib
import json

import pytest

from src.reporting.hashing import sha256_file, sha256_text
from src.reporting.manifest import (
    ManifestError, OutputFile, RunManifest, load_manifest, manifest_filename, verify_outputs, write_manifest,
)
from src.reporting.tables import canonical_json, records_frame, write_csv, write_json


def test_sha256_file(tmp_path):
    path = tmp_path / "data.bin"
    path.write_bytes(b"lora")
    assert sha256_file(str(path)) == hashlib.sha256(b"lora").hexdigest()


def test_sha256_text_separates_parts():
    assert sha256_text(["ab", "c"]) != sha256_text(["a", "bc"])
    assert sha256_text(["x"]) == sha256_text(["x"])


def test_csv_format(tmp_path):
    frame = records_frame([{"a": 1, "b": 0.1 + 0.2, "c": "HT(2,1,3)"}, {"a": 2, "c": "DT"}], ["a", "b", "c"])
    path = tmp_path / "out" / "table.csv"
    write_csv(frame, str(path))
    assert path.read_bytes() == b'a,b,c\n1,0.3,"HT(2,1,3)"\n2,,DT\n'


def test_json_is_canonical(tmp_path):
    assert canonical_json({"b": 1, "a": [1.5]}) == '{\n  "a": [\n    1.5\n  ],\n  "b": 1\n}\n'
    path = tmp_path / "doc.json"
    write_json({"z": 0, "y": 1}, str(path))
    assert list(json.loads(path.read_text())) == ["y", "z"]


def _manifest(**changes):
    fields = {"command": "capacity", "scenario_path": "/data/scenario.json", "scenario_sha256": "ab" * 32,
              "parameters": {"threads": 2, "theta_linear": True, "energy_formula": None, "sf": [7, 12],
                             "target": [0.99, 0.999], "kind": ["HT*"], "m_cap": None},
              "seed": 42}
    fields.update(changes)
    return RunManifest(**fields)


def test_to_argv():
    argv = _manifest().to_argv()
    assert argv[:5] == ["capacity", "--scenario", "/data/scenario.json", "--seed", "42"]
    assert argv[5:] == ["--kind", "HT*", "--sf", "7", "--sf", "12", "--target", "0.99", "--target", "0.999",
                        "--theta-linear", "--threads", "2"]


def test_argv_without_scenario():
    assert "--scenario" not in _manifest(scenario_path=None).to_argv()


def test_write_and_load(tmp_path):
    (tmp_path / "capacity.csv").write_text("sf\n7\n")
    manifest = _manifest().with_outputs(str(tmp_path), ["capacity.csv"])
    path = write_manifest(manifest, str(tmp_path))
    assert path.endswith(manifest_filename("capacity"))
    loaded = load_manifest(path)
    assert loaded.as_dict() == manifest.as_dict()
    assert loaded.outputs == (OutputFile("capacity.csv", sha256_file(str(tmp_path / "capacity.csv"))),)
    assert verify_outputs(loaded, str(tmp_path)) == []
    (tmp_path / "capacity.csv").write_text("sf\n8\n")
    assert verify_outputs(loaded, str(tmp_path)) == ["capacity.csv"]


def test_run_id_ignores_outputs_and_tracks_inputs(tmp_path):
    (tmp_path / "capacity.csv").write_text("sf\n7\n")
    manifest = _manifest()
    assert manifest.with_outputs(str(tmp_path), ["capacity.csv"]).run_id == manifest.run_id
    assert manifest.as_dict()["run_id"] == manifest.run_id
    assert _manifest(seed=43).run_id != manifest.run_id
    assert _manifest(parameters={**manifest.parameters, "threads": 3}).run_id != manifest.run_id
    assert _manifest(scenario_sha256="cd" * 32).run_id != manifest.run_id


@pytest.mark.parametrize("content", ["not json", "[1, 2]", '{"command": "energy"}'])
def test_malformed_manifest(tmp_path, content):
    path = tmp_path / "energy.manifest.json"
    path.write_text(content)
    with pytest.raises(ManifestError):
        load_manifest(str(path))


def test_missing_manifest(tmp_path):
    with pytest.raises(ManifestError):
        load_manifest(str(tmp_path / "absent.json"))

