import csv
import io
import json
import os
import subprocess
import sys

import pytest

from finmono.cli import EXIT_BUDGET, EXIT_FAIL, EXIT_OK, EXIT_USAGE, config_from_args, build_parser, run


@pytest.fixture(autouse=True)
def _cache_in_tmp(tmp_path, monkeypatch):
    monkeypatch.setenv("FINMONO_FIELD_CACHE", str(tmp_path / "cache"))


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    cfg = config_from_args(build_parser().parse_args(list(argv)))
    code = run(cfg, out, err)
    return code, out.getvalue(), err.getvalue()


def records(text):
    return [json.loads(line) for line in text.splitlines()]


CO3 = ["--p", "3", "--D", "23", "--d", "1,5", "--twist", "quadratic"]


def test_check_pass():
    code, out, _ = invoke("check", *CO3, "--f-max", "6")
    assert code == EXIT_OK
    recs = records(out)
    assert recs[0]["record"] == "meta" and "version" in recs[0]
    assert recs[-1]["record"] == "verdict" and recs[-1]["verdict"] == "PASS"


def test_check_fail_emits_witnesses():
    code, out, _ = invoke("check", "--p", "3", "--D", "10", "--twist", "quadratic", "--f-max", "3")
    assert code == EXIT_FAIL
    kinds = {r["record"] for r in records(out)}
    assert {"meta", "witness", "verdict"} <= kinds


@pytest.mark.parametrize("criterion", ["V", "gauss", "A"])
def test_other_criteria(criterion):
    code, out, _ = invoke("check", *CO3, "--f-max", "2", "--criterion", criterion, "--A", "2")
    assert code == EXIT_OK


def test_invalid_spec_is_usage_error():
    code, _, err = invoke("check", "--p", "3", "--D", "9", "--f-max", "2")
    assert code == EXIT_USAGE and "error" in err


def test_unparseable_flags_exit_2():
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(["check", "--p", "x"])
    assert exc.value.code == EXIT_USAGE


def test_budget_refusal_and_force():
    code, _, err = invoke("check", *CO3, "--f-max", "5", "--budget", "100")
    assert code == EXIT_BUDGET and "refused" in err
    code, _, _ = invoke("check", *CO3, "--f-max", "3", "--budget", "100", "--force")
    assert code == EXIT_OK


def test_traces_csv_support():
    code, out, _ = invoke("traces", "--p", "3", "--D", "23", "--d", "1", "--twist", "quadratic", "--field", "3^4")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0].startswith("# ")
    rows = list(csv.DictReader(lines[1:]))
    assert len(rows) == 81
    assert {int(r["value"]) for r in rows} == {-2, -1, 0, 1, 2, 3}


def test_traces_json_rows():
    code, out, _ = invoke("traces", "--variant", "v", "--field", "3^2", "--format", "json")
    assert code == EXIT_OK
    rows = [r for r in records(out) if r["record"] == "trace_row"]
    assert len(rows) == 9


def test_search_flags_23():
    code, out, _ = invoke("search", "--p", "3", "--D-min", "2", "--D-max", "100", "--twist", "quadratic", "--f-max", "5")
    assert code == EXIT_OK
    surv = {r["D"]: r for r in records(out) if r["record"] == "survivor"}
    assert surv[23]["note"] == "not a known case"
    assert surv[5]["known_case"] is not None


def test_prove():
    code, out, _ = invoke("prove", "--f-max", "4", "--induction", "5")
    assert code == EXIT_OK
    assert all(r["verdict"] == "PASS" for r in records(out) if r["record"] == "verdict")


def test_mellin():
    code, _, _ = invoke("mellin", "--p", "3", "--D", "5", "--twist", "quadratic", "--field", "3^2")
    assert code == EXIT_OK


def test_deterministic_output():
    args = ("check", "--p", "5", "--D", "13", "--d", "1,3", "--twist", "quadratic", "--f-max", "2", "--seed", "7")
    assert invoke(*args)[1] == invoke(*args)[1]


@pytest.mark.parametrize(
    "args",
    [
        ("check", "--p", "3", "--D", "10", "--d", "1,2", "--twist", "quadratic", "--f-max", "4"),
        ("search", "--p", "5", "--D-min", "2", "--D-max", "80", "--f-max", "3"),
    ],
)
def test_parallel_serial_equivalence(args):
    a = records(invoke(*args, "--jobs", "1")[1])[1:]
    b = records(invoke(*args, "--jobs", "3")[1])[1:]
    assert a == b


def test_csv_format_check():
    code, out, _ = invoke("check", *CO3, "--f-max", "2", "--format", "csv")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0].startswith("# {")
    assert "verdict" in lines[1]


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "finmono", "check", *CO3, "--f-max", "2"],
        capture_output=True, text=True, check=False, env={**os.environ},
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout.splitlines()[-1])["verdict"] == "PASS"
