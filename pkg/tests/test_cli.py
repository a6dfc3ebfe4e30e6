import json
import subprocess
import sys

import pytest

from cyclic_cm.cli import ConfigError, main, parse_coupling, resolve_seed


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_coupling():
    assert parse_coupling("1,0;2,-1") == [1, 2 - 1j]
    assert parse_coupling("3") == [3]
    with pytest.raises(ConfigError):
        parse_coupling("1,2,3")
    with pytest.raises(ConfigError):
        parse_coupling("a,b")


def test_seed_fallback(monkeypatch):
    monkeypatch.setenv("CYCLIC_CM_SEED", "41")
    assert resolve_seed(None) == 41 and resolve_seed(3) == 3
    monkeypatch.setenv("CYCLIC_CM_SEED", "x")
    with pytest.raises(ConfigError):
        resolve_seed(None)


def test_gen_deterministic(capsys, monkeypatch):
    _, a, _ = run(capsys, "gen", "--m", "2", "--n", "3", "--d", "2", "--seed", "11")
    monkeypatch.setenv("CYCLIC_CM_SEED", "11")
    _, b, _ = run(capsys, "gen", "--m", "2", "--n", "3", "--d", "2")
    assert a == b
    doc = json.loads(a)
    case = doc["cases"][0]
    assert case["spin_constraint_residual"] <= 1e-10
    assert case["quadruple"]["framing_sign"] == 1


def test_gen_bad_coupling(capsys):
    code, _, err = run(capsys, "gen", "--g", "1,0;-1,0")
    assert code == 2 and "not regular" in err


def test_gen_bad_sizes(capsys):
    assert run(capsys, "gen", "--n", "0")[0] == 2
    assert run(capsys, "gen", "--m", "3", "--g", "1;2")[0] == 2


def test_verify_single_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "charpoly", "--cases", "10", "--seed", "1")
    rep = json.loads(out)
    assert code == 0 and rep["pass"]
    assert [s["suite"] for s in rep["suites"]] == ["charpoly"]
    assert rep["suites"][0]["criterion"] == 1
    assert rep["meta"]["tolerances"]["charpoly"] == 1e-9


def test_verify_tolerance_override(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "charpoly", "--cases", "5", "--tol-charpoly", "1e-30")
    assert code == 1 and not json.loads(out)["pass"]


def test_verify_negative_control(capsys):
    _, out, _ = run(capsys, "verify", "--suite", "constraint", "--cases", "5")
    normal = json.loads(out)["suites"][0]["checks"]
    assert normal["qmodel_residual"]["pass"] and normal["sign_flip_margin"]["pass"]
    _, out, _ = run(capsys, "verify", "--suite", "constraint", "--cases", "5", "--negative-control")
    flipped = json.loads(out)["suites"][0]["checks"]
    assert not flipped["qmodel_residual"]["pass"]


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "r_phi", "--cases", "4", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "criterion,suite,check,value,tolerance,pass" and len(lines) == 3


def test_evolve_series(capsys):
    code, out, _ = run(capsys, "evolve", "--m", "2", "--n", "2", "--K", "1", "--t", "0.5", "--steps", "4")
    doc = json.loads(out)
    assert code == 0 and len(doc["series"]) == 5
    assert doc["series"][0]["t"] == [0.0, 0.0]
    assert doc["conservation_residual"] <= 1e-8


def test_evolve_t0_matches_input(capsys, tmp_path):
    path = tmp_path / "gen.json"
    run(capsys, "gen", "--m", "3", "--n", "2", "--seed", "4", "--out", str(path))
    code, out, _ = run(capsys, "evolve", "--input", str(path), "--t", "1", "--steps", "1")
    first = json.loads(out)["series"][0]
    assert first["phi"] == json.loads(path.read_text())["cases"][0]["point"]["phi"]


def test_evolve_crosscheck(capsys):
    code, out, _ = run(capsys, "evolve", "--m", "1", "--n", "3", "--g", "0,0.7", "--K", "2", "--crosscheck-m1")
    doc = json.loads(out)
    assert code == 0 and doc["crosscheck_m1"]["max_residual"] <= 1e-6


def test_evolve_crosscheck_needs_m1(capsys):
    assert run(capsys, "evolve", "--m", "2", "--crosscheck-m1")[0] == 2


def test_curve_n1(capsys):
    code, out, _ = run(capsys, "curve", "--m", "3", "--n", "1")
    doc = json.loads(out)
    assert code == 0 and len(doc["curve"]["p"]) == 1 and len(doc["curve"]["q"]) == 1
    assert doc["report"]["incidence"] <= 1e-8


def test_curve_csv(capsys):
    code, out, _ = run(capsys, "curve", "--m", "2", "--n", "3", "--d", "1", "--delta", "2", "--samples", "8", "--format", "csv")
    assert code == 0 and len(out.strip().splitlines()) == 1 + 3 + 8


def test_missing_input(capsys):
    assert run(capsys, "curve", "--input", "/nonexistent/x.json")[0] == 2


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "cyclic_cm.cli", "gen", "--n", "1"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["cases"][0]["point"]["n"] == 1
