from __future__ import annotations

import json
import subprocess
import sys
from io import StringIO

import pytest

from _support import FIXTURES, load
from commonground.cli import EXIT_BUG, EXIT_INPUT, EXIT_NOTHING_FOUND, EXIT_OK, EXIT_REFUSED, run
from commonground.parser import parse


def _run(*argv: str) -> tuple[int, str, str]:
    out, err = StringIO(), StringIO()
    code = run(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def _fx(name: str) -> str:
    return str(FIXTURES / f"{name}.rules")


def test_check_clean_but_incoherent():
    code, out, _ = _run("check", _fx("seven_agents"))
    report = json.loads(out)
    assert code == EXIT_OK
    assert report["coherent"] is False
    assert (report["cyclic"], report["redundant"], report["in_conflict"]) == (False, False, False)
    assert report["witnesses"]["incoherent"]


@pytest.mark.parametrize(
    "name, flag",
    [("cyclic", "cyclic"), ("conflict", "in_conflict"), ("redundant", "redundant")],
)
def test_check_flags_precondition_failures(name, flag):
    code, out, _ = _run("check", _fx(name))
    assert code == EXIT_REFUSED
    assert json.loads(out)[flag] is True


def test_merge_to_stdout_and_trace(tmp_path):
    trace = tmp_path / "trace.json"
    code, out, _ = _run("merge", _fx("seven_agents"), "--trace", str(trace))
    assert code == EXIT_OK
    assert parse(out).union() == load("seven_agents_ground").union()
    data = json.loads(trace.read_text())
    assert data["input_clauses"] == 7
    assert len(data["iterations"]) == 2


def test_merge_to_file(tmp_path):
    dest = tmp_path / "ground.rules"
    code, out, _ = _run("merge", _fx("police"), "--out", str(dest))
    assert code == EXIT_OK and out == ""
    assert "adult & illegalActivity -> policeCall" in dest.read_text()


def test_merge_refusal():
    code, out, _ = _run("merge", _fx("cyclic"))
    assert code == EXIT_REFUSED
    assert json.loads(out) == {"status": "refused", "reasons": ["cyclic"]}


def test_verify(tmp_path):
    code, out, _ = _run("verify", _fx("seven_agents"), _fx("seven_agents_ground"))
    assert code == EXIT_OK
    assert all(v["pass"] for v in json.loads(out).values())
    code, out, _ = _run("verify", _fx("seven_agents"), _fx("seven_agents"))
    assert code == EXIT_REFUSED
    assert json.loads(out)["P1"]["pass"] is False


def test_verify_candidate_inherits_disjointness(tmp_path):
    cand = tmp_path / "cand.rules"
    cand.write_text("agent 1 {\n  adult & illegalActivity -> policeCall\n  illegalActivity & teen -> policeCall\n"
                    "  child & illegalActivity -> parentsAlert\n  lowBattery -> charge\n}\n")
    code, out, err = _run("verify", _fx("police"), str(cand))
    assert code == EXIT_OK, err


def test_graph(tmp_path):
    dest = tmp_path / "g.dot"
    code, _, _ = _run("graph", _fx("seven_agents"), "--out", str(dest))
    assert code == EXIT_OK
    rf = load("seven_agents")
    from commonground.analysis import dependency_graph

    assert dest.read_text() == dependency_graph(rf.union(), rf.background).to_dot(rf.complements)
    assert "n1 -> n0;" in dest.read_text()


def test_oracle_found_and_not_found():
    code, out, _ = _run("oracle", _fx("non_unique"))
    report = json.loads(out)
    assert code == EXIT_OK and report["found_count"] >= 2 and report["exhausted"]
    code, out, _ = _run("oracle", _fx("empty"))
    assert code == EXIT_OK and json.loads(out)["found_count"] == 1


def test_oracle_refused_input_reports_reasons():
    code, out, _ = _run("oracle", _fx("conflict"))
    report = json.loads(out)
    assert code == EXIT_OK
    assert report["found_count"] == 0 and report["refused"] == ["in_conflict"]


def test_oracle_nothing_found(tmp_path):
    # Accepted by the gate, yet the tiny bound leaves no ground in reach.
    code, out, err = _run("oracle", _fx("police"), "--max-atoms", "0")
    assert code == EXIT_NOTHING_FOUND
    assert json.loads(out)["found_count"] == 0


def test_oracle_gives_up():
    code, _, err = _run("oracle", _fx("seven_agents"), "--cap", "3")
    assert code == EXIT_NOTHING_FOUND and "gave up" in err


def test_input_errors(tmp_path):
    bad = tmp_path / "bad.rules"
    bad.write_text("disjoint p q\nagent 1 { p -> r }\n")
    code, _, err = _run("check", str(bad))
    assert code == EXIT_INPUT
    assert f"{bad}:2:16: error E_NO_EXCLUDENT" in err
    code, _, err = _run("merge", str(tmp_path / "missing.rules"))
    assert code == EXIT_INPUT and "missing.rules" in err
    assert _run("frobnicate")[0] == EXIT_INPUT
    assert _run("oracle", _fx("seven_agents"), "--max-weakenings", "0")[0] == EXIT_INPUT


def test_strict_flag(tmp_path):
    f = tmp_path / "t.rules"
    f.write_text("disjoint p q\nagent 1 { p & q -> q }\n")
    code, _, err = _run("check", str(f))
    assert code != EXIT_INPUT and "warning E_TRIVIAL_RULE" in err
    code, _, err = _run("check", "--strict", str(f))
    assert code == EXIT_INPUT and "error E_TRIVIAL_RULE" in err


def test_invariant_violation_exit_code(monkeypatch):
    import commonground.cli as cli
    from commonground.merge import InternalInvariantViolation

    def boom(*a, **k):
        raise InternalInvariantViolation("synthetic")

    monkeypatch.setattr(cli, "merge", boom)
    code, _, err = _run("merge", _fx("seven_agents"))
    assert code == EXIT_BUG and "synthetic" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "commonground", "check", _fx("police")],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_OK
    assert json.loads(proc.stdout)["coherent"] is False
