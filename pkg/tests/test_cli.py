import json
import subprocess
import sys

import pytest

from mutlin.cli import main
from mutlin.formula import parse_formula
from mutlin.trees import sat_on_tree, tree_from_dict


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_sat_and_unsat(capsys):
    assert run(capsys, "sat", "-f", "#(p) > 2")[0] == 0
    code, out, _ = run(capsys, "sat", "-f", "p & ~p")
    assert code == 1 and out.strip() == "UNSAT"


def test_model_json_is_a_checked_witness(capsys):
    text = "#(#(p1) > 1 & p2) > 4"
    code, out, _ = run(capsys, "model", "--json", "-f", text)
    assert code == 0
    d = json.loads(out)
    assert d["verdict"] == "SAT" and d["nodes"] == 7
    assert sat_on_tree(parse_formula(text), tree_from_dict(d["witness"]))


def test_formula_from_file(capsys, tmp_path):
    path = tmp_path / "f.mu"
    path.write_text("#(q) > 1 & #(q) <= 1\n")
    assert run(capsys, "sat", "-f", str(path))[0] == 1


def test_cpath_commands(capsys):
    assert run(capsys, "empty", "--cpath", "p \\ p")[0] == 0
    assert run(capsys, "contains", "--cpath", "dn::a[dn*::b > 1]", "dn::a[dn*::b > 0]")[0] == 0
    code, out, _ = run(capsys, "contains", "--cpath", "dn::a[dn*::b > 0]", "dn::a[dn*::b > 1]")
    assert code == 1 and "counterexample" in out
    assert run(capsys, "equiv", "--cpath", "dn/dn*", "dn*/dn")[0] == 0


def test_ctype_commands(capsys):
    code, out, _ = run(capsys, "contains", "--json", "--ctype", "p1[p2*]", "p1[p2 <= 5]")
    assert code == 1
    d = json.loads(out)
    assert d["verdict"] == "NOT CONTAINED" and d["counterexample"]["nodes"]
    code, out, _ = run(capsys, "empty", "--ctype", "a*")
    assert code == 1 and "empty forest" in out


def test_gctl_model(capsys):
    code, out, _ = run(capsys, "model", "--gctl", "EX{>1} p")
    assert code == 0 and "witness with 3 nodes" in out


def test_translate(capsys):
    code, out, _ = run(capsys, "translate", "--json", "--cpath", "dn::a")
    assert code == 0
    d = json.loads(out)
    assert parse_formula(d["formula"]) and d["size"] > 0
    assert run(capsys, "translate", "--negated", "--ctype", "a . b")[0] == 0


def test_oracle_check(capsys):
    code, out, _ = run(capsys, "oracle-check", "--compare", "--bound", "4", "-f", "#(p) > 2")
    assert code == 0 and "agrees" in out
    assert run(capsys, "oracle-check", "--bound", "2", "-f", "#(p) > 2")[0] == 1


def test_syntax_error_points_at_position(capsys):
    code, _, err = run(capsys, "sat", "-f", "p & (q |")
    assert code == 2
    assert "syntax error" in err and "^" in err


@pytest.mark.parametrize("argv", [
    ["contains", "--cpath", "dn"],
    ["sat", "--cpath", "dn"],
    ["oracle-check", "--gctl", "EX{>0} p"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_unsupported_input(capsys):
    code, _, err = run(capsys, "sat", "-f", "mu $x . $x | p")
    assert code == 2 and "unsupported" in err


def test_budget_exit_code(capsys):
    assert run(capsys, "sat", "--max-nodes", "2", "-f", "#(p) > 5")[0] == 3


def test_console_module_runs():
    r = subprocess.run([sys.executable, "-m", "mutlin.cli", "sat", "-f", "p"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == "SAT"
