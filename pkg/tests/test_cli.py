import json
import math
import subprocess
import sys

import pytest

from conewave import cli
from conewave.euler_lagrange import el_report
from conewave.cone_core import make_exponents


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("p, outcome, k", [("2", "CriticalPoint", None), ("3/2", "FailsBySign", 2)])
def test_verdict_examples_d_low(capsys, p, outcome, k):
    d = 3 if p == "2" else 2
    code, out, _ = run(capsys, "verdict", "--d", str(d), "--p", p)
    doc = json.loads(out)
    assert code == 0 and doc["outcome"] == outcome and doc["witness_k"] == k
    assert doc["schema_version"] == cli.SCHEMA_VERSION and "tolerances" in doc


def test_verdict_supercritical(capsys):
    code, out, _ = run(capsys, "verdict", "--d", "3", "--p", "2.5")
    assert code == 0 and json.loads(out)["outcome"] == "FailsByDecay"


@pytest.mark.parametrize("argv", [["verdict", "--d", "3", "--p", "3.5"], ["verdict", "--d", "3", "--p", "x"],
                                  ["verdict", "--d", "3"], ["watson", "--mu", "1", "--nu2", "1", "--lam", "5"],
                                  ["el-table", "--d", "3", "--p", "2", "--k-min", "5", "--k-max", "2"],
                                  ["nonsense"]])
def test_usage_errors_exit_64(capsys, argv):
    with pytest.raises(SystemExit) as info:
        raise SystemExit(cli.main(argv))
    assert info.value.code == 64


def test_out_of_strip_message_quotes_condition(capsys):
    code, _, err = run(capsys, "watson", "--mu", "1", "--nu2", "1", "--lam", "5")
    assert code == 64 and "Re(mu+nu+1) > Re(lambda) > 0" in err


def test_inconclusive_exit_2(capsys, tmp_path):
    cfgfile = tmp_path / "c.cfg"
    cfgfile.write_text("vanish_rel = 1e-30\n")
    code, out, _ = run(capsys, "verdict", "--d", "3", "--p", "2", "--config", str(cfgfile))
    assert code == 2 and json.loads(out)["outcome"] == "Inconclusive"


def test_el_table_p2_vanishes(capsys):
    code, out, _ = run(capsys, "el-table", "--d", "3", "--p", "2", "--k-min", "1", "--k-max", "5",
                       "--format", "csv")
    assert code == 0
    rows = cli.read_csv(out)
    assert [int(r["k"]) for r in rows] == [1, 2, 3, 4, 5]
    for r in rows:
        assert abs(float(r["lhs_quad"])) < 1e-8 and abs(float(r["rhs_quad"])) < 1e-8
    assert list(rows[0]) == cli.EL_COLUMNS
    assert any(ln.startswith("# ") and "gamma_p" in ln for ln in out.splitlines())


def test_el_table_round_trip(capsys):
    code, out, _ = run(capsys, "el-table", "--d", "2", "--p", "1.5", "--k-min", "2", "--k-max", "6",
                       "--format", "csv")
    rows = cli.read_csv(out)
    assert all(float(r["rhs_quad"]) > 0 for r in rows)
    exp = make_exponents(2, "1.5")
    for r in rows:
        mem = el_report(exp, int(r["k"]))
        for col in ("lhs_quad", "lhs_closed", "rhs_quad", "rhs_rodrigues"):
            want = getattr(mem, col)
            assert abs(float(r[col]) - want) <= 1e-12 * max(1.0, abs(want))


def test_output_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert cli.main(["verdict", "--d", "2", "--p", "3/2", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    for path in (a, b):
        cli.main(["el-table", "--d", "3", "--p", "2.2", "--k-max", "4", "--format", "csv", "--out", str(path)])
    assert a.read_bytes() == b.read_bytes()


def test_float_format():
    assert cli.fmt_float(0.1) == "1.0000000000000001e-01"
    assert float(cli.fmt_float(math.pi)) == math.pi


def test_config_file_and_env(capsys, tmp_path, monkeypatch):
    cfgfile = tmp_path / "conf.txt"
    cfgfile.write_text("# comment\nrel_tol = 1e-11\nsign_rel = 1e-13\n")
    monkeypatch.setenv("CONEWAVE_CONFIG", str(cfgfile))
    code, out, _ = run(capsys, "verdict", "--d", "2", "--p", "3/2")
    tol = json.loads(out)["tolerances"]
    assert code == 0 and tol["quadrature_rel"] == 1e-11 and tol["sign_rel"] == 1e-13
    # flags override the file
    code, out, _ = run(capsys, "verdict", "--d", "2", "--p", "3/2", "--tol-rel", "1e-9")
    assert json.loads(out)["tolerances"]["quadrature_rel"] == 1e-9


@pytest.mark.parametrize("text", ["bogus_key = 1\n", "rel_tol = abc\n", "no equals sign\n", "sign_rel = -1\n"])
def test_bad_config_is_usage_error(capsys, tmp_path, text):
    cfgfile = tmp_path / "bad.cfg"
    cfgfile.write_text(text)
    code, _, err = run(capsys, "verdict", "--d", "2", "--p", "3/2", "--config", str(cfgfile))
    assert code == 64 and "usage error" in err


def test_watson_examples(capsys):
    code, out, _ = run(capsys, "watson", "--mu", "1", "--nu2", "1", "--lam", "1", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["closed_form"] == pytest.approx(0.5) and doc["quadrature"] == pytest.approx(0.5, rel=1e-4)
    assert doc["rel_discrepancy"] < 1e-4


def test_penrose_check(capsys):
    code, out, _ = run(capsys, "penrose-check", "--d", "3", "--format", "csv")
    rows = cli.read_csv(out)
    assert code == 0 and rows and all(r["status"] == "pass" for r in rows)
    assert all(math.isfinite(float(r["residual"])) and float(r["residual"]) >= 0 for r in rows)


def test_penrose_check_d4_skips_transform_items(capsys):
    code, out, _ = run(capsys, "penrose-check", "--d", "4", "--format", "csv")
    rows = cli.read_csv(out)
    assert code == 0
    assert any(r["status"] == "skipped" for r in rows)
    assert all(r["status"] == "pass" for r in rows if r["item"].startswith("funk-hecke"))
    assert all(r["status"] == "skipped" for r in rows
               if r["item"].startswith(("pushforward", "intertwining")))


def test_funk_hecke_and_symmetry(capsys):
    code, out, _ = run(capsys, "funk-hecke", "--d", "5")
    assert code == 0 and out.count("PASS") == 9
    code, out, _ = run(capsys, "symmetry-check", "--d", "2", "--n", "20", "--format", "json")
    checks = json.loads(out)["checks"]
    assert code == 0 and all(c["status"] == "pass" for c in checks)
    assert any(c["item"].startswith("cone-measure") for c in checks)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "conewave", "watson", "--mu", "2", "--nu2", "2", "--lam", "1"],
                         capture_output=True, text=True, timeout=300)
    assert res.returncode == 0 and "2.5" in res.stdout
