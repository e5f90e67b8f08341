import time

import pytest

from mutlin.corpus import count_atoms, formula_corpus
from mutlin.formula import IllFormedFormula, parse_formula
from mutlin.solver import (
    BudgetExceeded,
    Solver,
    UnsupportedFormula,
    satisfiable,
)
from mutlin.trees import binary_to_nary, brute_force_sat, sat_on_tree


def solve(text, **kw):
    f = parse_formula(text)
    r = satisfiable(f, **kw)
    if r.sat:
        assert sat_on_tree(f, r.kripke), f"witness fails {text}"
    return r


def test_golden_model():
    """Nested counting: more than four p2 nodes each seeing more than one p1."""
    t0 = time.perf_counter()
    r = solve("#(#(p1) > 1 & p2) > 4")
    assert r.sat
    assert r.kripke.size == 7
    assert r.steps == 3
    assert time.perf_counter() - t0 < 5


@pytest.mark.parametrize("text,sat", [
    ("p", True),
    ("p & ~p", False),
    ("#(p) > 2", True),
    ("#(p) > 0 & #(p) <= 0", False),
    ("#(p) > 1 | #(p) <= 1", True),
    ("#(p) <= 0 & p", False),
    ("<up>p & <dn>q", True),
    ("<dn>T & ~<dn>T", False),
    ("(mu $x . <dn>$x | p) & ~p & #(p) <= 1", True),
    ("mu $x . (<dn>$x | p) & ~p", False),
    ("#(p) > 3 & #(p & q) <= 0 & #(q) > 1 & #(T) <= 6", True),
    ("#(p) > 3 & #(p & q) <= 0 & #(q) > 1 & #(T) <= 5", False),
    ("<rt>T & ~<up>T & ~<lf>T", True),
])
def test_small_verdicts(text, sat):
    assert solve(text).sat is sat


def test_witness_sizes_are_minimal_for_pure_counting():
    assert solve("#(p) > 2").kripke.size == 3
    assert solve("#(p) > 0 & #(q) > 0 & #(p & q) <= 0").kripke.size == 2


def test_rooted_tree_option():
    r = solve("#(p) > 2 & ~<up>T & ~<lf>T", rooted_tree=True)
    assert r.sat
    binary_to_nary(r.kripke)  # decodes to one n-ary tree
    assert not solve("<rt>T & ~<up>T & ~<lf>T", rooted_tree=True).sat


def test_saturation_modes_agree():
    for f in formula_corpus(5, 40):
        a = satisfiable(f, saturation="atom").sat
        b = satisfiable(f, saturation="maxk").sat
        assert a == b, str(f)


def test_navigation_mode_agrees():
    for f in formula_corpus(6, 30):
        assert satisfiable(f, navigation=True).sat == satisfiable(f).sat, str(f)


def test_budget_errors():
    with pytest.raises(BudgetExceeded):
        satisfiable(parse_formula("#(p) > 5"), max_nodes=3)
    with pytest.raises(BudgetExceeded):
        satisfiable(parse_formula("#(p) > 5"), max_iters=2)


def test_rejects_ill_formed_input():
    with pytest.raises(IllFormedFormula):
        satisfiable(parse_formula("mu $x . $x | p"))


def test_rejects_recursion_through_counting():
    with pytest.raises(UnsupportedFormula):
        Solver(parse_formula("mu $x . p | <dn>(#($x) > 0)"))


def test_deterministic_output():
    f = parse_formula("#(p & <dn>q) > 1 & #(q) <= 3")
    a, b = satisfiable(f), satisfiable(f)
    assert a.kripke == b.kripke and a.steps == b.steps


def test_result_dict():
    d = satisfiable(parse_formula("#(p) > 1")).to_dict()
    assert d["verdict"] == "SAT" and "witness" in d and d["stats"]["guesses"] >= 1
    assert satisfiable(parse_formula("p & ~p")).to_dict()["verdict"] == "UNSAT"


def test_agrees_with_oracle_on_corpus():
    """Sound witnesses, and complete wherever a small model exists."""
    fs = formula_corpus(12, 120)
    assert all(count_atoms(f) <= 3 for f in fs)
    for f in fs:
        r = satisfiable(f)
        if r.sat:
            assert sat_on_tree(f, r.kripke), str(f)
        elif brute_force_sat(f, 4) is not None:
            pytest.fail(f"solver missed a model of {f}")


def test_k_doubling_does_not_explode():
    times = {}
    for k in (4, 8):
        f = parse_formula(f"#(p & <dn>q) > {k} & #(q) <= {k + 2}")
        t0 = time.perf_counter()
        assert satisfiable(f).sat
        times[k] = time.perf_counter() - t0
    assert times[8] < 8 * max(times[4], 0.05)
