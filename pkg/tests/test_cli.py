import json
import subprocess
import sys
from fractions import Fraction

import pytest

from seriesforge.cli import EXIT_ENGINE, EXIT_FAIL, EXIT_OK, EXIT_USAGE, run_cli

A_JSON = json.dumps({"kind": "residues", "mod": 4, "residues": [1, 2]})


def _run(capsys, *argv):
    code = run_cli(list(argv))
    out, err = capsys.readouterr()
    return code, out.strip(), err


@pytest.fixture
def run_file(tmp_path, capsys):
    path = tmp_path / "run.json"
    code, _, _ = _run(capsys, "riemann", "--series", "altharmonic", "--target", "const:1/2",
                      "--stages", "40", "--out", str(path))
    assert code == EXIT_OK
    return path


def test_riemann_then_verify(run_file, capsys):
    code, out, _ = _run(capsys, "verify", "--run", str(run_file))
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["overall"] == "pass" and len(report["stages"]) == 40


def test_tampered_file_exits_one(run_file, capsys):
    data = json.loads(run_file.read_text())
    data["checkpoint_sums"][6] = str(Fraction(data["checkpoint_sums"][6]) + 1)
    run_file.write_text(json.dumps(data))
    code, out, err = _run(capsys, "verify", "--run", str(run_file))
    assert code == EXIT_FAIL
    assert json.loads(out)["failed_stages"] == [7]
    assert "[7]" in err


def test_edited_targets_exit_one(run_file, capsys):
    data = json.loads(run_file.read_text())
    data["targets"][0] = "5"
    run_file.write_text(json.dumps(data))
    code, out, _ = _run(capsys, "verify", "--run", str(run_file))
    assert code == EXIT_FAIL and json.loads(out)["targets_match_declared"] is False


def test_verify_csv(run_file, capsys):
    code, out, _ = _run(capsys, "verify", "--run", str(run_file), "--format", "csv")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "n,k_n,S,b,err,bound,ok"


@pytest.mark.parametrize("argv", [
    ["no-such-command"],
    ["riemann", "--series", "altharmonic", "--stages", "3"],
    ["riemann", "--series", "nonsense", "--target", "zero", "--stages", "3"],
    ["riemann", "--series", "altharmonic", "--target", "const:abc", "--stages", "3"],
    ["quotient", "--series", "altsign", "--map", '{"kind":"monotone","fiber_ends":[3,2]}'],
    ["subnumber", "--series", "altsign", "--selector", "3,2"],
    ["center", "--points", ""],
    ["verify", "--run", "/nonexistent/run.json"],
])
def test_usage_errors_exit_two(capsys, argv):
    assert run_cli(argv) == EXIT_USAGE


def test_budget_exceeded_exits_three_and_writes_partial(tmp_path, capsys):
    path = tmp_path / "partial.json"
    code, _, err = _run(capsys, "riemann", "--series", "triples", "--target", "plusinf",
                        "--stages", "30", "--mode", "float", "--budget", "2000", "--out", str(path))
    assert code == EXIT_ENGINE and "engine error" in err
    data = json.loads(path.read_text())
    assert data["meta"]["partial"] is True
    assert run_cli(["verify", "--run", str(path)]) == EXIT_OK


def test_missing_oracle_exits_three(capsys):
    code, _, _ = _run(capsys, "constrain", "--series", "harmonic", "--set", A_JSON,
                      "--target", "seq:zero", "--stages", "3")
    assert code == EXIT_ENGINE


def test_constrain_and_verify(tmp_path, capsys):
    path = tmp_path / "c.json"
    code, _, _ = _run(capsys, "constrain", "--series", "altpow4ceil", "--set", A_JSON,
                      "--target", "seq:alternating", "--stages", "15", "--out", str(path))
    assert code == EXIT_OK
    code, out, _ = _run(capsys, "verify", "--run", str(path))
    assert code == EXIT_OK
    assert json.loads(out)["sigma_checks"]["surjectivity_progress"] is True


def test_pcc_rearrange_and_verify(tmp_path, capsys):
    path = tmp_path / "p.json"
    code, _, _ = _run(capsys, "pcc-rearrange", "--series", "triples", "--target", "seq:alternating",
                      "--stages", "5", "--mode", "float", "--out", str(path))
    assert code == EXIT_OK
    assert run_cli(["verify", "--run", str(path)]) == EXIT_OK


def test_small_outputs(capsys):
    assert _run(capsys, "center", "--points", "0,1,2")[:2] == (EXIT_OK, "0,1")
    assert _run(capsys, "density", "--set", A_JSON, "--N", "10")[:2] == (EXIT_OK, "3/5")
    assert _run(capsys, "quotient", "--series", "altsign", "--map", "j1", "--terms", "5")[1] == "1,0,0,0,0"
    assert _run(capsys, "quotient", "--series", "altsign", "--map", "j0", "--terms", "3")[1] == "0,0,0"
    assert _run(capsys, "subnumber", "--series", "altsign", "--selector", "2*n", "--terms", "4")[1] == "0,0,0,0"
    assert _run(capsys, "subnumber", "--series", "altsign", "--selector", "2*n-1", "--terms", "3")[1] == "1,1,1"


def test_classify_and_topsum(capsys):
    code, out, _ = _run(capsys, "classify", "--series", "altharmonic")
    assert code == EXIT_OK and json.loads(out)["verdict"] == "holds"
    code, out, _ = _run(capsys, "classify", "--series", "altsign", "--empirical", "--horizon", "1000")
    assert json.loads(out)["cond_c"] == "fails"
    code, out, _ = _run(capsys, "topsum", "--series", "altharmonic", "--tol", "1/1000")
    body = json.loads(out)
    assert body["status"] == "CERTIFIED" and abs(float(Fraction(body["value"])) - 0.693147) < 1e-3


def test_sparse_support_formats(capsys):
    code, out, _ = _run(capsys, "sparse-support", "--series", "altharmonic", "--blocks", "4")
    assert code == EXIT_OK and json.loads(out)["blocks"][0]["interval"] == [1, 8]
    code, out, _ = _run(capsys, "sparse-support", "--series", "altharmonic", "--blocks", "3", "--format", "csv")
    lines = out.splitlines()
    assert lines[0] == "j,start,end,pos_sum,neg_sum,density" and lines[1].startswith("1,1,8,1/1,25/24")
    assert run_cli(["sparse-support", "--series", "altsign", "--blocks", "2"]) == EXIT_ENGINE


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "seriesforge", "center", "--points", "0,1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "0,1"
    proc = subprocess.run([sys.executable, "-m", "seriesforge", "bogus"], capture_output=True, text=True)
    assert proc.returncode == 2
