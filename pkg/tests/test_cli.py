import csv
import json
import os
import subprocess
import sys

import pytest

from tcspace.cli import main
from tcspace.io import basis_to_json, space_to_json
from tcspace.samples import five_point_basis, five_point_space


@pytest.fixture
def files(tmp_path):
    space = five_point_space()
    paths = {
        "space": tmp_path / "space.json",
        "basis": tmp_path / "basis.json",
        "mu": tmp_path / "mu.json",
        "bad": tmp_path / "bad.json",
        "grid": tmp_path / "grid.json",
    }
    paths["space"].write_text(json.dumps(space_to_json(space)))
    paths["basis"].write_text(json.dumps(basis_to_json(five_point_basis(space))))
    paths["mu"].write_text(json.dumps({"mass": {"3": "1", "0": "-1"}}))
    paths["bad"].write_text("{oops")
    paths["grid"].write_text(json.dumps({"coords": [[str(x) for x in p] for p in
                                                    [(a * 3 / 4, b * 3 / 4) for a in range(4) for b in range(4)]]}))
    return {k: str(v) for k, v in paths.items()}, tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_metric_validate(files, capsys):
    f, tmp = files
    code, out, _ = run(capsys, "metric", "validate", "--space", f["space"])
    assert code == 0 and json.loads(out)["ok"]
    broken = tmp / "broken.json"
    broken.write_text(json.dumps({"points": ["a", "b", "c"], "dist": [["0", "1", "5"], ["1", "0", "1"], ["5", "1", "0"]]}))
    code, out, _ = run(capsys, "metric", "validate", "--space", broken)
    assert code == 1
    assert json.loads(out)["violations"][0]["kind"] == "triangle"


def test_oc_molecule(files, capsys):
    f, _ = files
    code, out, _ = run(capsys, "oc", "--space", f["space"], "--mu", f["mu"])
    data = json.loads(out)
    assert code == 0
    assert data["cost"] == "2"
    assert data["plan"] == [["1", "3", "0"]]


def test_basis_distortion(files, capsys, tmp_path):
    f, _ = files
    code, out, _ = run(capsys, "basis", "distortion", "--space", f["space"], "--basis", f["basis"])
    assert code == 0 and json.loads(out)["distortion"] == "2"
    code, out, _ = run(capsys, "basis", "distortion", "--space", f["space"], "--basis", f["basis"], "--pair", "4,3")
    assert json.loads(out)["pair_distortion"] == "2"
    dump = tmp_path / "pairs.csv"
    code, out, _ = run(capsys, "basis", "distortion", "--space", f["space"], "--basis", f["basis"],
                       "--edges-only", "--dump", dump)
    rows = list(csv.reader(dump.open()))
    assert rows[0] == ["x", "y", "d", "weighted_sum", "ratio"]
    assert len(rows) - 1 == json.loads(out)["pairs_scanned"] == 8  # the unit-distance pairs


def test_basis_search(files, capsys):
    f, _ = files
    code, out, _ = run(capsys, "basis", "search", "--space", f["space"], "--budget", "20", "--seed", "3")
    data = json.loads(out)
    assert code == 0
    assert "upper bound" in data["note"]
    again = run(capsys, "basis", "search", "--space", f["space"], "--budget", "20", "--seed", "3")[1]
    assert again == out


def test_treeprob(files, capsys):
    f, _ = files
    code, out, _ = run(capsys, "treeprob", "--space", f["space"], "--basis", f["basis"], "--pair", "4,3")
    (row,) = json.loads(out)["rows"]
    assert code == 0
    assert (row["pair_distortion"], row["E_effective"], row["E_product"]) == ("2", "2", "3")
    code, out, _ = run(capsys, "treeprob", "--space", f["space"], "--basis", f["basis"], "--mode", "paths",
                       "--report", "csv")
    lines = out.splitlines()
    assert lines[0] == "pair,d,pair_distortion,E_effective,E_product,pi_independent"
    assert len(lines) == 1 + 10


def test_laakso(capsys, tmp_path):
    graph = tmp_path / "l2.json"
    code, out, _ = run(capsys, "laakso", "--k", "2", "--export-graph", graph)
    data = json.loads(out)
    assert code == 0
    assert data["distortion"] == "21/2" and data["bound"] == 16
    assert len(json.loads(graph.read_text())["points"]) == 30


def test_hyper(files, capsys):
    f, _ = files
    code, out, _ = run(capsys, "hyper", "--points", f["grid"], "--metric", "l1")
    data = json.loads(out)
    assert code == 0
    assert data["distortion"] == "19/7"
    assert data["homogeneity"]["C_used"] == "7"


def test_out_and_csv(files, capsys, tmp_path):
    f, _ = files
    target = tmp_path / "oc.csv"
    code, out, _ = run(capsys, "oc", "--space", f["space"], "--mu", f["mu"], "--format", "csv", "--out", target)
    assert code == 0 and out == ""
    assert target.read_text() == "amount,source,target\n1,3,0\n"


def test_input_errors(files, capsys):
    f, _ = files
    code, _, err = run(capsys, "oc", "--space", f["bad"], "--mu", f["mu"])
    assert code == 2
    assert json.loads(err)["error"] == "parse_error"
    code, _, err = run(capsys, "basis", "distortion", "--space", f["space"], "--basis", f["basis"], "--pair", "4")
    assert code == 2
    code, _, err = run(capsys, "laakso", "--k", "2", "--guard-k", "1")
    assert code == 2 and json.loads(err)["error"] == "too_large"
    assert "TCS_GUARD_K" not in os.environ
    code, _, err = run(capsys, "hyper", "--points", f["grid"], "--r", "1/5")
    assert code == 2 and json.loads(err)["error"] == "parameter_out_of_range"
    code, _, err = run(capsys, "reproduce")
    assert code == 2


def test_reproduce_quick_is_deterministic(tmp_path):
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        proc = subprocess.run([sys.executable, "-m", "tcspace.cli", "reproduce", "--quick", "--seed", "7",
                               "--workers", "1", "--out", str(out)], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert len(proc.stdout.splitlines()) == 11
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outputs[0] == outputs[1]
    assert len(outputs[0]) == 13
    summary = json.loads(outputs[0]["summary.json"])
    assert summary["passed"] and summary["seed"] == 7


def test_console_script():
    proc = subprocess.run(["tcs", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for sub in ("metric", "oc", "basis", "treeprob", "laakso", "hyper", "reproduce"):
        assert sub in proc.stdout
