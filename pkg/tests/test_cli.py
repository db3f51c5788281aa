import csv
import io
import json

import pytest

from heunlab import cli
from heunlab import elliptic as ell
from heunlab.report import Check, build_report, complex_str, report_csv, report_json


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


@pytest.mark.parametrize("text,value", [
    ("1.2i", 1.2j), ("i", 1j), ("-i", -1j), ("0.1+1.1i", 0.1 + 1.1j), ("1.3j", 1.3j),
    ("2", 2 + 0j), ("1e-1+2e0i", 0.1 + 2j), (" 0.5 - 0.25i ", 0.5 - 0.25j),
])
def test_parse_complex(text, value):
    assert cli.parse_complex(text) == value


def test_complex_str_round_trips():
    for z in (1.2j, -0.3 + 4e-17j, 1 / 3 - 2j):
        assert cli.parse_complex(complex_str(z)) == z


def test_parse_grid():
    g = cli.parse_grid("1i:1.5i:6")
    assert len(g) == 6 and g[0] == 1j and g[-1] == 1.5j
    assert cli.parse_grid("1i,1.2i") == (1j, 1.2j)
    assert cli.parse_grid("1.1i:2i:1") == (1.1j,)


@pytest.mark.parametrize("argv", [
    ["verify", "lame", "--tau-grid", ""],
    ["verify", "lame", "--tau", ","],
    ["verify", "lame", "--tau", "-1i"],
    ["verify", "lame", "--tau", "abc"],
    ["verify", "p6", "--family", "degenerate_mui"],
    ["verify", "lame", "--tol", "-1"],
    ["verify", "nothing"],
    ["trajectory", "--tau-grid", "1i:2i:0"],
])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == 2


def test_verify_modular(capsys):
    code, out = run(capsys, "verify", "modular", "--tau", "1.2i")
    rep = json.loads(out)
    assert code == 0 and rep["summary"]["overall"] == "pass"
    names = [c["name"] for c in rep["checks"]]
    for g in ("d_t", "d_e_i", "d_eta1", "d_pow_e2_minus_e1"):
        assert f"modular/tau00/{g}" in names
    for c in rep["checks"]:
        assert set(c) >= {"name", "anchor", "inputs", "residual", "tol", "passed"}
    assert rep["config"]["taus"] == [{"re": 0.0, "im": 1.2}]


def test_failing_check_gives_exit_1(capsys):
    code, out = run(capsys, "verify", "modular", "--tau", "1.2i", "--tol", "1e-30")
    assert code == 1 and json.loads(out)["summary"]["overall"] == "fail"


def test_verify_csv(capsys):
    code, out = run(capsys, "verify", "reduction", "--samples", "1", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 6
    assert all(r["passed"] == "True" for r in rows)


def test_trajectory_hitchin(capsys):
    code, out = run(capsys, "trajectory", "--family", "hitchin_l0000", "--tau-grid", "1i:1.5i:50")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 50
    assert all(r["status"] == "ok" for r in rows)
    assert max(float(r["residual_elliptic"]) for r in rows) < 1e-6


def test_trajectory_mu0_b1_column(capsys):
    code, out = run(capsys, "trajectory", "--family", "degenerate_mu0", "--d1", "0", "--d3", "1",
                    "--tau-grid", "1i:1.4i:5")
    assert code == 0
    for r in csv.DictReader(io.StringIO(out)):
        L = ell.lattice_from_tau(cli.parse_complex(r["tau"]))
        assert abs(cli.parse_complex(r["b1"]) + 2 * L.eta1) < 1e-12


def test_trajectory_keeps_singular_rows(capsys):
    code, out = run(capsys, "trajectory", "--family", "degenerate_mu0", "--d1", "0", "--d3", "0",
                    "--tau-grid", "1i,1.2i", "--format", "json")
    rep = json.loads(out)
    assert code == 1 and len(rep["rows"]) == 2
    assert {r["status"] for r in rep["rows"]} == {"parameter_singularity"}


def test_trajectory_flags_branch_jumps(capsys):
    code, out = run(capsys, "trajectory", "--family", "degenerate_mu0", "--tau-grid", "0.5+0.3i,1i")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 1 and [r["status"] for r in rows] == ["ok", "branch_jump"]


@pytest.mark.parametrize("argv", [
    ["verify", "lame", "--samples", "1", "--seed", "7"],
    ["verify", "p6", "--family", "degenerate_mui", "--index", "3", "--tau-grid", "1i:1.2i:5"],
    ["verify", "monodromy", "--tau", "1.15i"],
    ["trajectory", "--tau-grid", "1i:1.2i:4", "--format", "json"],
])
def test_reruns_are_byte_identical(tmp_path, argv):
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(argv + ["--out", str(a)])
    cli.main(argv + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_report_serialisation():
    checks = [Check("b", "x", 1e-3, 1e-2, {"z": 1j}), Check("a", "y", float("inf"), 1.0, {}, error="boom")]
    rep = build_report(checks, {"tau": 1.2j})
    assert [c["name"] for c in rep["checks"]] == ["a", "b"]
    assert rep["summary"] == {"total": 2, "passed": 1, "failed": 1, "overall": "fail"}
    text = report_json(rep)
    assert json.loads(text)["checks"][0]["residual"] == "inf"
    assert json.loads(text)["checks"][1]["inputs"]["z"] == {"re": 0.0, "im": 1.0}
    assert report_csv(rep).splitlines()[0] == "name,anchor,residual,tol,passed,error"
