import json

import pytest
from click.testing import CliRunner

from tdxf.cli import main
from tdxf.decomposition import parse_ntd
from tdxf.formulation import parse_jsonl, parse_lp
from tdxf.graphs import cycle_graph, path_graph, serialize_graph


@pytest.fixture
def files(tmp_path):
    (tmp_path / "p3.gr").write_text(serialize_graph(path_graph(3)))
    (tmp_path / "c5.gr").write_text(serialize_graph(cycle_graph(5)))
    (tmp_path / "p3.td").write_text("s td 2 2 3\nb 1 1 2\nb 2 2 3\n1 2\n")
    return tmp_path


def run(*args, **kw):
    return CliRunner().invoke(main, [str(a) for a in args], catch_exceptions=False, **kw)


def test_decompose_writes_ntd(files):
    r = run("decompose", files / "p3.gr", "--td", files / "p3.td")
    assert r.exit_code == 0
    assert parse_ntd(r.stdout).width == 1
    r = run("decompose", files / "p3.gr", "--out", files / "out")
    assert r.exit_code == 0 and (files / "out" / "p3.ntd").exists()


def test_tables_json(files):
    r = run("tables", files / "p3.gr", "--problem", "is", "--l", 1, "--td", files / "p3.td")
    assert r.exit_code == 0
    data = json.loads(r.stdout)
    assert data["accepted"] is True


def test_automaton_summary(files):
    r = run("automaton", files / "p3.gr", "--problem", "is", "--l", 1, "--td", files / "p3.td")
    assert r.exit_code == 0 and "31" in r.stdout


def test_emit_lp_both_formats(files):
    r = run("emit-lp", files / "p3.gr", "--problem", "is", "--l", 1)
    assert r.exit_code == 0
    sys, obj, sense = parse_lp(r.stdout)
    assert sense == "max" and len(obj) == 3
    r = run("emit-lp", files / "p3.gr", "--problem", "is", "--l", 1, "--format", "jsonl")
    assert r.exit_code == 0 and parse_jsonl(r.stdout) == sys


def test_solve_with_weights(files):
    r = run("solve", files / "p3.gr", "--problem", "is", "--l", 1)
    assert r.exit_code == 0
    assert r.stdout.splitlines() == ["optimum 2", "component 0: 1 3"]
    (files / "w.txt").write_text("# favour the middle\n2 5\n1 1\n")
    r = run("solve", files / "p3.gr", "--problem", "is", "--l", 1, "--weights", files / "w.txt")
    assert r.stdout.splitlines() == ["optimum 5", "component 0: 2"]


def test_solve_infeasible(files):
    r = run("solve", files / "p3.gr", "--problem", "is", "--l", 3)
    assert r.exit_code == 0 and r.stdout.strip() == "infeasible: no solution"


def test_verify_report_records_seed(files):
    args = ("verify", files / "c5.gr", "--problem", "hc", "--seed", 7, "--samples", 10, "--objectives", 4)
    first = run(*args)
    assert first.exit_code == 0
    report = json.loads(first.stdout)
    assert report["seed"] == 7 and report["status"] == "PASS"
    assert {c["check"] for c in report["checks"]} >= {"lp", "sizes"}
    assert run(*args).stdout == first.stdout


def test_cross_validate_to_file(files):
    out = files / "reports"
    r = run("cross-validate", files / "p3.gr", "--problem", "ds", "--l", 1, "--samples", 10,
            "--objectives", 4, "--out", out)
    assert r.exit_code == 0
    assert json.loads((out / "p3.report.json").read_text())["status"] == "PASS"


def test_usage_errors_exit_two(files):
    assert run("solve", files / "p3.gr").exit_code == 2
    assert run("solve", files / "p3.gr", "--problem", "tsp").exit_code == 2
    assert run("solve", files / "p3.gr", "--problem", "is", "--l", -1).exit_code == 2


def test_input_errors_exit_three(files):
    assert run("solve", files / "missing.gr", "--problem", "is").exit_code == 3
    (files / "bad.gr").write_text("p 2 1\ne 1 1\n")
    assert run("solve", files / "bad.gr", "--problem", "is").exit_code == 3
    (files / "bad.td").write_text("s td 1 2 3\nb 1 1 2\n")
    assert run("tables", files / "p3.gr", "--problem", "is", "--td", files / "bad.td").exit_code == 3
    (files / "w.txt").write_text("9 1\n")
    assert run("solve", files / "p3.gr", "--problem", "is", "--weights", files / "w.txt").exit_code == 3


def test_check_failure_exit_four(files):
    r = run("verify", files / "c5.gr", "--problem", "hc", "--paper-literal", "--check", "preservation")
    assert r.exit_code == 4
    assert json.loads(r.stdout)["status"] == "FAIL"


def test_budget_exit_five(files, monkeypatch):
    monkeypatch.setenv("TDXF_ORACLE_BUDGET", "4")
    r = run("verify", files / "c5.gr", "--problem", "is", "--check", "preservation")
    assert r.exit_code == 5
