import dataclasses
import json
import subprocess
import sys
from pathlib import Path

import pytest

from kstab import cli
from kstab.invariants import EquivariantModel

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_segment_anchor(capsys):
    code, out, _ = run(capsys, "analyze", "--input", str(FIXTURES / "toric" / "segment.json"))
    assert code == 0
    doc = json.loads(out)
    assert doc["directions"]["f0"]["df"]["exact"] == "1/4"
    assert doc["directions"]["f1"]["norm_squared"]["exact"] == "1/12"
    assert doc["constant_twist"]["norm_squared"]["exact"] == "0"


def test_analyze_model_round_trips(capsys):
    code, out, _ = run(capsys, "analyze", "--input", str(FIXTURES / "toric" / "trapezoid.json"))
    doc = json.loads(out)
    model = EquivariantModel.from_json(doc["model"])
    assert model.to_json() == doc["model"]


def test_analyze_synthetic_model(capsys, tmp_path):
    src = json.loads((FIXTURES / "verify" / "optimal.json").read_text())
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"model": src["model"], "points": [["1", "1"]]}))
    code, out, _ = run(capsys, "analyze", "--input", str(path))
    assert code == 0
    assert json.loads(out)["directions"]["p0"]["df"]["exact"] == "3"


def test_oracle_square_all_match(capsys):
    code, out, _ = run(capsys, "oracle", "--input", str(FIXTURES / "toric" / "square.json"))
    assert code == 0
    assert json.loads(out)["all_match"] is True


def test_oracle_mismatch_exit_code(capsys, monkeypatch):
    real = cli.discrete_weight_oracle

    def wrong(*args, **kwargs):
        return dataclasses.replace(real(*args, **kwargs), b1=real(*args, **kwargs).b1 + 1)

    monkeypatch.setattr(cli, "discrete_weight_oracle", wrong)
    code, out, _ = run(capsys, "oracle", "--input", str(FIXTURES / "toric" / "square.json"))
    assert code == 2
    assert json.loads(out)["all_match"] is False


def test_oracle_k_samples_flag(capsys):
    code, out, _ = run(capsys, "oracle", "--input", str(FIXTURES / "toric" / "segment.json"),
                       "--k-samples", "1,2,3,4,5,6,7,8,9,10")
    assert code == 0
    assert json.loads(out)["k_samples"] == list(range(1, 11))


@pytest.mark.parametrize("name,code,verdict", [
    ("zero_df", 0, "Pass"),
    ("optimal", 0, "Pass"),
    ("explicit_directions", 0, "Pass"),
    ("perturbed", 2, "Fail"),
    ("not_candidate", 3, "NotACandidate"),
])
def test_verify_exit_codes(capsys, name, code, verdict):
    got, out, _ = run(capsys, "verify", "--input", str(FIXTURES / "verify" / f"{name}.json"))
    assert got == code
    assert json.loads(out)["verdict"] == verdict


def test_search_segment(capsys):
    code, out, _ = run(capsys, "search", "--input", str(FIXTURES / "search" / "segment.json"))
    doc = json.loads(out)
    assert code == 0
    assert doc["result"]["status"] == "Stable"
    assert doc["result"]["value_squared_signed"] == "3/5"
    assert doc["calabi_lower_bound"]["bound_squared"] == "0"
    assert doc["brute_force"]["certificate"]["resolution"] == 8


def test_search_trapezoid_bound(capsys):
    code, out, _ = run(capsys, "search", "--input", str(FIXTURES / "search" / "trapezoid_affine.json"),
                       "--resolution", "4")
    doc = json.loads(out)
    assert doc["result"]["status"] == "Destabilizer"
    assert doc["calabi_lower_bound"]["bound_squared"] == "4/39"
    assert doc["brute_force"]["certificate"]["resolution"] == 4


def test_search_rejects_paper_convention(capsys):
    code, _, err = run(capsys, "search", "--input", str(FIXTURES / "search" / "segment.json"),
                       "--convention", "paper")
    assert code == 1
    assert "trace-free" in err


def test_parse_errors_report_location(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "vertices": [[0], [1]],\n  "functions": [\n}')
    code, _, err = run(capsys, "analyze", "--input", str(bad))
    assert code == 1 and "line 4" in err

    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({"vertices": [["0"], ["1"]]}))
    code, _, err = run(capsys, "analyze", "--input", str(missing))
    assert code == 1 and "functions" in err

    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"vertices": [["0"], [0.5]], "functions": []}))
    code, _, err = run(capsys, "analyze", "--input", str(wrong))
    assert code == 1 and "$.vertices[1]" in err


def test_bad_flags_exit_one(capsys):
    path = str(FIXTURES / "toric" / "segment.json")
    assert run(capsys, "analyze", "--input", path, "--convention", "other")[0] == 1
    assert run(capsys, "analyze", "--input", path, "--precision", "0")[0] == 1
    assert run(capsys, "explode", "--input", path)[0] == 1
    assert run(capsys, "analyze", "--input", "/nonexistent.json")[0] == 1


def test_output_file_matches_stdout(capsys, tmp_path):
    path = str(FIXTURES / "verify" / "perturbed.json")
    _, out, _ = run(capsys, "verify", "--input", path)
    target = tmp_path / "report.json"
    run(capsys, "verify", "--input", path, "--output", str(target))
    assert target.read_text() == out


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kstab.cli", "verify", "--input",
                           str(FIXTURES / "verify" / "not_candidate.json")], capture_output=True, text=True)
    assert proc.returncode == 3
    assert json.loads(proc.stdout)["branch"] == "NotACandidate"


@pytest.mark.parametrize("argv", [
    ["analyze", "--input", str(FIXTURES / "toric" / "trapezoid.json")],
    ["oracle", "--input", str(FIXTURES / "toric" / "square.json")],
    ["search", "--input", str(FIXTURES / "search" / "square_center.json")],
    ["verify", "--input", str(FIXTURES / "verify" / "perturbed.json")],
])
def test_separate_processes_are_byte_identical(argv):
    import os

    outs = []
    for hashseed in ("1", "2"):
        env = dict(os.environ, PYTHONHASHSEED=hashseed)
        proc = subprocess.run([sys.executable, "-m", "kstab.cli", *argv], capture_output=True, env=env)
        outs.append((proc.returncode, proc.stdout))
    assert outs[0] == outs[1]
