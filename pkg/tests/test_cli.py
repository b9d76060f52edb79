import csv
import json
import subprocess
import sys

import pytest

from lacusum.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_no_arguments(capsys):
    code, _, err = run(capsys)
    assert code == 2
    assert "usage" in err


def test_unknown_flag(capsys):
    code, _, err = run(capsys, "lacunary", "info", "--theta", "geo2", "--colour", "red")
    assert code == 2


def test_modulus_phi(capsys):
    code, out, _ = run(capsys, "modulus", "phi", "--name", "identity", "--eps", "0.25",
                       "--horizon", "1e5")
    d = json.loads(out)
    assert code == 0
    assert list(d)[:4] == ["name", "epsilon", "value", "plateau"]
    assert d["value"] == 0.25 and d["plateau"] is True


def test_modulus_check_and_classify(capsys):
    code, out, _ = run(capsys, "modulus", "check", "--name", "lambertw", "--grid-max", "1e6")
    assert code == 0 and json.loads(out)["all_ok"]
    code, out, _ = run(capsys, "modulus", "classify", "--name", "powersum")
    assert json.loads(out)["verdict"] == "Compatible"


def test_lacunary_info(capsys):
    code, out, _ = run(capsys, "lacunary", "info", "--theta", "geo2", "--blocks", "100")
    d = json.loads(out)
    assert d["liminf_est"] == 2 and d["limsup_est"] == 2
    assert set(d) == {"blocks", "h_tail", "liminf_est", "limsup_est", "unbounded_flag"}


def test_density(capsys):
    code, out, _ = run(capsys, "density", "--set", "evens", "--horizon", "100000")
    assert json.loads(out)["value"] == pytest.approx(0.5, abs=1e-4)


def test_converge_json_and_exit(capsys):
    code, out, _ = run(capsys, "converge", "--seq", "evens", "--method", "cesaro",
                       "--theta", "geo2", "--horizon", "1e6")
    d = json.loads(out)
    assert code == 1 and d["status"] == "Fails"
    assert d["estimates"]["sum"]["trajectory"]
    code, out, _ = run(capsys, "converge", "--seq", "const_one", "--method", "stat",
                       "--horizon", "1e5")
    assert code == 0 and json.loads(out)["status"] == "Holds"


def test_converge_limit_override(capsys):
    code, out, _ = run(capsys, "converge", "--seq", "const_one", "--method", "cesaro",
                       "--horizon", "1e5", "--limit", "0")
    assert code == 1


def test_converge_csv(capsys):
    code, out, _ = run(capsys, "converge", "--seq", "zero", "--method", "cesaro",
                       "--horizon", "1e4", "--format", "csv")
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["estimate", "checkpoint", "value"]
    assert rows[-1][1] == "10000"


def test_threshold_override_checked(capsys):
    code, _, err = run(capsys, "converge", "--seq", "zero", "--method", "stat",
                       "--holds", "0.5", "--fails", "0.1")
    assert code == 2 and "BadParams" in err


def test_integrable(capsys):
    code, out, _ = run(capsys, "integrable", "--seq", "evens", "--theta", "geo2",
                       "--mgrid", "2,4,8", "--blocks", "15")
    assert code == 0 and json.loads(out)["verdict"] == "Holds"


def test_counterexample(capsys, tmp_path):
    out_csv = tmp_path / "seq.csv"
    code, out, _ = run(capsys, "counterexample", "--kind", "reciproco", "--modulus", "log1p",
                       "--theta", "geo2", "--out", str(out_csv))
    d = json.loads(out)
    assert code == 0 and len(d["witness_blocks"]) == 5
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["n", "x_n"]
    ones = [int(n) for n, x in rows[1:] if float(x) == 1.0]
    a, b, _ = d["segments"][0]
    assert a in ones and b in ones and a - 1 not in ones


def test_counterexample_rejects_compatible(capsys, tmp_path):
    code, _, err = run(capsys, "counterexample", "--kind", "th3", "--modulus", "identity",
                       "--theta", "geo2", "--out", str(tmp_path / "x.csv"))
    assert code == 2 and "CompatibleModulus" in err


def test_harness_run(capsys, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("law=N_theta_f_subset_S_theta_f\nmodulus=identity\ntheta=geo2\n"
                   "sequence=spikes\nswap=true\n")
    code, out, _ = run(capsys, "harness", "run", "--config", str(cfg),
                       "--out", str(tmp_path / "o"))
    assert code == 1 and json.loads(out)["counts"]["Violated"] == 1
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["results"][0]["status"] == "Violated"


def test_determinism():
    argv = [sys.executable, "-m", "lacusum.cli", "converge", "--seq", "squares", "--method",
            "stat", "--modulus", "log1p", "--theta", "poly2", "--horizon", "100000"]
    a = subprocess.run(argv, capture_output=True, check=False).stdout
    b = subprocess.run(argv, capture_output=True, check=False).stdout
    assert a == b and a
