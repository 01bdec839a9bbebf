import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

import coverbetti
from coverbetti import cli

CORPUS = Path(coverbetti.__file__).parent / "corpus"


def run(capsys, *argv):
    code = cli.parse_and_dispatch([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_tower_writes_csv_and_report(capsys, tmp_path):
    code, _, _ = run(capsys, "tower", "--input", CORPUS / "torus.json", "--prime", 3,
                     "--levels", 2, "--output-dir", tmp_path, "--no-cache")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "tower.csv").read_text())))
    assert [r["b_Fp"] for r in rows if r["k"] == "1"] == ["2", "2"]
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["schema_version"] == 1 and report["verdict"] == "PASS"


def test_tower_to_stdout(capsys):
    code, out, _ = run(capsys, "tower", "--input", CORPUS / "circle.json", "--prime", 2,
                       "--levels", 2, "--fields", "fp")
    assert code == 0
    assert out.startswith("k,i,index,b_Q,b_Fp,coker_Q,coker_Fp\n0,1,2,,1,")


@pytest.mark.parametrize("argv", [
    ["tower", "--input", "x.json", "--levels", "3"],
    ["tower", "--input", "x.json", "--prime", "4", "--levels", "3"],
    ["tower", "--input", "x.json", "--prime", "2", "--levels", "0"],
    ["frobnicate"],
    [],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "usage" in err or "error" in err


def test_missing_and_malformed_input_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "tower", "--input", tmp_path / "nope.json", "--prime", 2, "--levels", 1)
    assert code == 2 and "input error" in err
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"generators": ["a"], "relators": [[5]]}))
    code, _, _ = run(capsys, "tower", "--input", bad, "--prime", 2, "--levels", 1)
    assert code == 2


def test_non_homomorphism_exit_2(capsys, tmp_path):
    doc = {"generators": ["a", "b"], "relators": [[1, 2, -1, -2]],
           "rep": {"n": 3, "images": [[[1, 1, 0], [0, 1, 0], [0, 0, 1]],
                                      [[1, 0, 0], [0, 1, 1], [0, 0, 1]]]}}
    path = tmp_path / "g.json"
    path.write_text(json.dumps(doc))
    code, _, _ = run(capsys, "tower", "--input", path, "--prime", 2, "--levels", 1, "--no-cache")
    assert code == 2


def test_element_cap_exit_3(capsys, tmp_path):
    code, _, err = run(capsys, "tower", "--input", CORPUS / "wedge.json", "--prime", 2,
                       "--levels", 3, "--element-cap", 10, "--no-cache", "--output-dir", tmp_path)
    assert code == 3
    assert json.loads((tmp_path / "report.json").read_text())["failed_level"] == 2


def test_harris_budget_exit_3(capsys):
    code, _, _ = run(capsys, "harris", "--input", CORPUS / "harris_x1_squared.json",
                     "--levels", 3, "--budget", 50)
    assert code == 3


def test_harris(capsys):
    code, out, _ = run(capsys, "harris", "--input", CORPUS / "harris_x.json", "--levels", 3)
    assert code == 0
    assert [r["residual"] for r in json.loads(out)["rows"]] == [1, 1, 1]


def test_alexander(capsys):
    code, out, _ = run(capsys, "alexander", "--input", CORPUS / "torus_link_2_4.json",
                       "--prime", 3, "--diagonal", "--tower", 2, "--no-cache")
    assert code == 0
    doc = json.loads(out)
    assert doc["diagonal"]["linking_number"] == 2 == doc["diagonal"]["linking_number_braid"]
    assert doc["prediction"]["verdict"] == "PASS"


def test_alexander_needs_meridians(capsys):
    code, _, _ = run(capsys, "alexander", "--input", CORPUS / "circle.json", "--prime", 2)
    assert code == 2


def test_rank_documents(capsys, tmp_path):
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"matrix": [[1, 2], [3, 6]]}))
    assert json.loads(run(capsys, "rank", "--input", m, "--rational")[1])["rank"] == 1
    assert json.loads(run(capsys, "rank", "--input", m, "--prime", 5)[1])["rank"] == 1
    t = tmp_path / "m.txt"
    t.write_text("2 2\n0 0 3\n1 1 3\n")
    assert json.loads(run(capsys, "rank", "--input", t, "--prime", 3)[1])["rank"] == 0
    assert json.loads(run(capsys, "rank", "--input", t, "--rational")[1])["rank"] == 2
    lm = tmp_path / "l.json"
    lm.write_text(json.dumps({"num_vars": 1, "laurent": [[[[1, [1]], [-1, [0]]], [[1, [0]]]]]}))
    code, out, _ = run(capsys, "rank", "--input", lm, "--prime", 2)
    assert code == 0 and json.loads(out)["rank"] == 1
    assert run(capsys, "rank", "--input", lm, "--rational")[0] == 2


def test_corpus_empty_manifest(capsys, tmp_path):
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"cases": []}))
    code, out, _ = run(capsys, "corpus", "--manifest", path, "--output-dir", tmp_path / "out")
    assert code == 0 and "0 passed, 0 failed" in out
    assert json.loads((tmp_path / "out" / "summary.json").read_text())["cases"] == []


def test_corpus_mismatch_exit_1(capsys, tmp_path):
    manifest = {"cases": [
        {"name": "ok", "command": "harris", "input": str(CORPUS / "harris_x.json"), "levels": 2,
         "expect": {"verdict": "PASS"}},
        {"name": "wrong", "command": "harris", "input": str(CORPUS / "harris_x.json"), "levels": 2,
         "expect": {"rows.0.residual": 7, "no.such.path": 1}},
        {"name": "broken", "command": "harris", "input": "missing.json", "levels": 1,
         "expect": {}},
    ]}
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest))
    code, out, _ = run(capsys, "corpus", "--manifest", path, "--no-cache")
    assert code == 1
    assert "rows.0.residual: expected 7, got 1" in out
    assert "<missing>" in out and "InputError" in out
    assert "1 passed, 2 failed" in out


def test_cache_subcommand(capsys, tmp_path):
    cache_dir = tmp_path / "cc"
    run(capsys, "tower", "--input", CORPUS / "circle.json", "--prime", 2, "--levels", 2,
        "--cache-dir", cache_dir)
    code, out, _ = run(capsys, "cache", "--list", "--cache-dir", cache_dir)
    assert code == 0 and len(out.splitlines()) == 2
    code, out, _ = run(capsys, "cache", "--clear", "--cache-dir", cache_dir)
    assert "removed 2" in out and not cache_dir.exists()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "coverbetti", "harris", "--input",
                           str(CORPUS / "harris_x.json"), "--levels", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["verdict"] == "PASS"
