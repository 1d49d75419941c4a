import json

import pytest

from ratlimits.main import main


def _map_json(num, den):
    return {
        "degree": len(num) - 1,
        "numerator": [{"re": c, "im": 0} for c in num],
        "denominator": [{"re": c, "im": 0} for c in den],
    }


@pytest.fixture
def write_json(tmp_path):
    def _write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return str(path)
    return _write


@pytest.fixture
def square(write_json):
    return write_json("square.json", _map_json([0, 0, 1], [1, 0, 0]))


def _stdout_json(capsys):
    return json.loads(capsys.readouterr().out)


def _stderr_error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_reduce_reports_the_hole(write_json, capsys):
    path = write_json("m.json", _map_json([0, 0, 1], [0, 1, 0]))     # [z² : zw]
    assert main(["reduce", "--map", path]) == 0
    out = _stdout_json(capsys)
    print(f"[INFO] reduce -> {out}")
    assert out["degree"] == 2
    assert out["reduction_degree"] == 1
    assert len(out["holes"]) == 1
    hole = out["holes"][0]
    assert hole["depth"] == 1
    assert abs(hole["point"]["re"]) < 1e-9 and abs(hole["point"]["im"]) < 1e-9
    assert out["resultant_vanishes"] is True
    assert out["stability"] == "unstable"


def test_compose(square, capsys):
    assert main(["compose", "--outer", square, "--inner", square]) == 0
    out = _stdout_json(capsys)
    assert out["map"]["degree"] == 4
    assert out["reduced"]["reduction_degree"] == 4
    assert out["reduced"]["holes"] == []


def test_iterate_needs_a_positive_count(square, capsys):
    assert main(["iterate", "--map", square, "--times", "3"]) == 0
    assert _stdout_json(capsys)["map"]["degree"] == 8
    assert main(["iterate", "--map", square, "--times", "0"]) == 2
    assert _stderr_error(capsys)["error"] == "SchemaError"


def test_mme_writes_csv_and_report(square, tmp_path):
    atoms, report = tmp_path / "atoms.csv", tmp_path / "report.json"
    code = main(["mme", "--map", square, "--samples", "50", "--depth", "20", "--seed", "3",
                 "--out", str(atoms), "--report", str(report)])
    assert code == 0
    lines = atoms.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "re,im,infinity,weight"
    summary = json.loads(report.read_text(encoding="utf-8"))
    print(f"[INFO] mme summary: {summary}")
    assert summary["samples"] == 50
    assert summary["seed"] == 3
    assert summary["atoms"] == len(lines) - 1


def test_barycenter_of_a_heavy_atom(write_json, capsys):
    path = write_json("mu.json", {"atoms": [{"re": 0, "im": 0, "weight": 0.6}, {"re": 1, "im": 0, "weight": 0.4}]})
    assert main(["barycenter", "--measure", path]) == 0
    out = _stdout_json(capsys)
    assert out["class"] == "infinity"
    assert out["heavy_weight"] == pytest.approx(0.6)
    assert "center" not in out


def test_barycenter_of_a_balanced_measure(tmp_path, capsys):
    path = tmp_path / "mu.csv"
    path.write_text("re,im,infinity,weight\n1,0,0,1\n-1,0,0,1\n0,1,0,1\n0,-1,0,1\n", encoding="utf-8")
    assert main(["barycenter", "--measure", str(path)]) == 0
    out = _stdout_json(capsys)
    assert max(abs(x) for x in out["center"]) < 1e-9


def test_tree_build_path(tmp_path, capsys):
    dot = tmp_path / "tree.dot"
    assert main(["tree-build", "--path", "4", "--dot", str(dot)]) == 0
    out = _stdout_json(capsys)
    assert out["spheres"] == [0, 1, 2, 3]
    assert sorted(sorted(e) for e in out["adjacency"]) == [[0, 1], [1, 2], [2, 3]]
    assert out["hausdorff_residual"] < 0.01
    assert dot.read_text(encoding="utf-8").startswith("graph spheres {")


def test_bad_schema_exits_with_two(write_json, capsys):
    path = write_json("bad.json", {"degree": 2, "numerator": [{"re": 1}], "denominator": [{"re": 1}]})
    assert main(["reduce", "--map", path]) == 2
    err = _stderr_error(capsys)
    assert err["error"] == "SchemaError"
    assert err["details"]["errors"]


def test_missing_file_exits_with_two(tmp_path, capsys):
    assert main(["reduce", "--map", str(tmp_path / "absent.json")]) == 2
    assert _stderr_error(capsys)["error"] == "SchemaError"


def test_degree_one_sampling_is_a_hypothesis_failure(write_json, capsys):
    path = write_json("moeb.json", _map_json([1, 2], [1, 0]))
    assert main(["mme", "--map", path, "--samples", "10", "--depth", "20"]) == 4
    assert _stderr_error(capsys)["error"] == "HypothesisUnmet"


def test_run_recorder_keeps_inputs_and_report(square, tmp_path, monkeypatch):
    runs = tmp_path / "runs"
    monkeypatch.setenv("RATLIMITS_RUN_LOG_ENABLED", "true")
    monkeypatch.setenv("RATLIMITS_RUN_LOG_DIR", str(runs))
    assert main(["reduce", "--map", square, "--out", str(tmp_path / "r.json")]) == 0
    (run_dir,) = list(runs.iterdir())
    names = sorted(p.name for p in run_dir.iterdir())
    print(f"[INFO] run folder: {names}")
    assert names == ["input__square.json", "report.json", "run_meta.json"]
    meta = json.loads((run_dir / "run_meta.json").read_text(encoding="utf-8"))
    assert meta["command"] == "reduce"
    report = json.loads((run_dir / "report.json").read_text(encoding="utf-8"))
    assert report["exit_code"] == 0


def test_run_recorder_keeps_the_traceback(write_json, tmp_path):
    cfg = write_json("cfg.json", {"run_log_enabled": True, "run_log_dir": str(tmp_path / "runs")})
    bad = write_json("bad.json", {"degree": 1})
    assert main(["reduce", "--map", bad, "--config", cfg]) == 2
    (run_dir,) = list((tmp_path / "runs").iterdir())
    assert (run_dir / "exception.txt").exists()
    assert json.loads((run_dir / "report.json").read_text(encoding="utf-8"))["exit_code"] == 2


def test_verify_suite_single_criterion(capsys):
    assert main(["verify-suite", "--tier", "quick", "--only", "12"]) == 0
    out = _stdout_json(capsys)
    assert out["passed"] is True
    assert [c["id"] for c in out["criteria"]] == [12]
    assert main(["verify-suite", "--only", "14"]) == 2
