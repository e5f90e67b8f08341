"""Acceptance suite: one PASS/FAIL line per criterion, plus a k-doubling benchmark.

Run directly (``python3 tests/test_acceptance.py``) or through pytest; the
collected lines are repeated in the pytest terminal summary.
"""
import random
import time

import pytest

from mutlin import cpath, ctypes, gctl
from mutlin.corpus import ast_nodes, count_atoms, cpath_corpus, ctype_corpus, formula_corpus, gctl_corpus
from mutlin.elimination import eliminate_counting
from mutlin.formula import COUNTING, parse_formula, propositions, size, subformulas
from mutlin.lean import lean
from mutlin.solver import satisfiable
from mutlin.trees import (
    KripkeTree,
    all_labelings,
    batches,
    binary_to_nary,
    brute_force_sat,
    enumerate_trees,
    eval_formula,
    iter_shapes,
    nary_formula_to_binary,
    nary_to_binary,
    nominal_rows,
    oracle_alphabet,
    sat_on_tree,
)

RESULTS = {}

# frozen after the first measurement over the seeds below
C_CPATH, C_CTYPES, C_GCTL = 10, 12, 12
OPTS = [frozenset(x) for x in (["a"], ["b"], ["a", "b"])]


def report(key, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {key}: {detail}"
    RESULTS[key] = line
    print(line)
    return ok


@pytest.fixture(scope="module")
def corpus():
    return formula_corpus(1, 500)


def test_criterion_1_golden_model():
    t0 = time.perf_counter()
    f = parse_formula("#(#(p1) > 1 & p2) > 4")
    r = satisfiable(f)
    dt = time.perf_counter() - t0
    ok = r.sat and sat_on_tree(f, r.kripke) and r.kripke.size == 7 and r.steps == 3 and dt < 5
    nodes = r.kripke.size if r.sat else None
    assert report("criterion 1 golden model", ok, f"sat={r.sat} nodes={nodes} steps={r.steps} time={dt:.2f}s")


def test_criterion_2_differential(corpus):
    t0 = time.perf_counter()
    shape_ok = all(ast_nodes(f) <= 12 and count_atoms(f) <= 3 and len(propositions(f)) <= 2
                   and all(g.k <= 3 for g in subformulas(f) if isinstance(g, COUNTING))
                   for f in corpus)
    bad_witness = missed = n_sat = 0
    for f in corpus:
        r = satisfiable(f)
        if r.sat:
            n_sat += 1
            bad_witness += not sat_on_tree(f, r.kripke)
        elif brute_force_sat(f, 5) is not None:
            missed += 1
    dt = time.perf_counter() - t0
    ok = shape_ok and bad_witness == 0 and missed == 0 and dt < 600
    assert report("criterion 2 differential vs oracle", ok,
                  f"{len(corpus)} formulas, {n_sat} sat, bad witnesses={bad_witness}, "
                  f"missed={missed}, corpus shape ok={shape_ok}, time={dt:.1f}s")


def test_criterion_3_lean_linear(corpus):
    worst = max(len(lean(f)) - 6 * size(f) for f in corpus)
    assert report("criterion 3 lean size <= 6|f|+10", worst <= 10, f"max |lean|-6|f| = {worst}")


def test_criterion_4_translation_linear():
    parts, ok = [], True
    for name, items, trs, measure, c in [
        ("cpath", cpath_corpus(40, 200), (cpath.translate_query,), cpath.query_size, C_CPATH),
        ("ctypes", ctype_corpus(41, 200), (ctypes.translate_type, ctypes.translate_type_negated),
         ctypes.type_size, C_CTYPES),
        ("gctl", gctl_corpus(42, 200), (gctl.translate_gctl,), gctl.gctl_size, C_GCTL),
    ]:
        ratio = max(size(tr(x)) / measure(x) for x in items for tr in trs)
        ok &= ratio <= c
        parts.append(f"{name} max {ratio:.2f} (c={c})")
    assert report("criterion 4 translation size <= c|input|", ok, ", ".join(parts))


def test_criterion_5_elimination():
    t0 = time.perf_counter()
    fs = formula_corpus(11, 50, max_k=2)
    tree_bad = solver_bad = 0
    for f in fs:
        g = eliminate_counting(f)
        props, fresh = oracle_alphabet(f)
        for ev in batches(props, 4, allow_empty=True, empty_as=fresh):
            tree_bad += int((ev.eval(f).any(axis=1) != ev.eval(g).any(axis=1)).sum())
        solver_bad += satisfiable(f).sat != satisfiable(g).sat
    dt = time.perf_counter() - t0
    ok = tree_bad == 0 and solver_bad == 0 and dt < 300
    assert report("criterion 5 counting elimination", ok,
                  f"50 formulas, tree disagreements={tree_bad}, solver disagreements={solver_bad}, "
                  f"time={dt:.1f}s")


def _cpath_disagreements(qs, max_nodes=4):
    bad = 0
    for q in qs:
        f = cpath.translate_query(q)
        noms = [p for p in propositions(f) if p not in ("a", "b")]
        for fc, ns in iter_shapes(max_nodes, nary=True):
            # the arrays of an n-ary tree are also its binary encoding
            hit = nominal_rows(f, fc, ns, OPTS, noms)
            for row, lab in enumerate(all_labelings(3, len(fc))):
                t = KripkeTree("nary", tuple(OPTS[k] for k in lab), fc, ns)
                bad += bool(cpath.eval_cpath(q, t)) != bool(hit[row])
    return bad


def _ctypes_disagreements(es, max_nodes=4):
    bad = 0
    for e in es:
        for neg in (False, True):
            f = ctypes.translate_type_negated(e) if neg else ctypes.translate_type(e)
            noms = [p for p in propositions(f) if p not in ("a", "b")]
            for fc, ns in iter_shapes(max_nodes):
                hit = nominal_rows(f, fc, ns, OPTS, noms, at_root=True)
                for row, lab in enumerate(all_labelings(3, len(fc))):
                    t = KripkeTree("binary", tuple(OPTS[k] for k in lab), fc, ns)
                    bad += (ctypes.member(t, e) != neg) != bool(hit[row])
    return bad


def test_criterion_6_adequacy():
    t0 = time.perf_counter()
    cp = _cpath_disagreements(cpath_corpus(1, 100))
    ct = _ctypes_disagreements(ctype_corpus(3, 100))
    dt = time.perf_counter() - t0
    assert report("criterion 6 frontend adequacy", cp == 0 and ct == 0,
                  f"cpath disagreements={cp}, ctypes disagreements={ct} (trees <= 4 nodes), time={dt:.1f}s")


def _same_cpath(a, b, max_nodes=4):
    for t in enumerate_trees(["a", "b"], max_nodes, form="nary"):
        if cpath.eval_cpath(a, t) != cpath.eval_cpath(b, t):
            return False
    return True


def _same_ctype(a, b, max_nodes=4):
    if ctypes.member(None, a) != ctypes.member(None, b):
        return False
    for t in enumerate_trees(["a", "b"], max_nodes, form="binary"):
        if ctypes.member(t, a) != ctypes.member(t, b):
            return False
    return True


def _containment_round(items, extra_pairs, contained, valid_cex, same, n_pairs, seed):
    rng = random.Random(seed)
    pairs = [(rng.choice(items), rng.choice(items)) for _ in range(n_pairs)] + extra_pairs
    not_reflexive = sum(not contained(x, x).holds for x in items)
    invalid = mutual = asym = 0
    for a, b in pairs:
        ab, ba = contained(a, b), contained(b, a)
        for v, x, y in ((ab, a, b), (ba, b, a)):
            if not v.holds and not valid_cex(v, x, y):
                invalid += 1
        if ab.holds and ba.holds:
            mutual += 1
            asym += not same(a, b)
    return not_reflexive, invalid, mutual, asym


def _cpath_contained(a, b):
    try:
        return cpath.query_contained(a, b)
    except AssertionError:
        # witness rejected by the direct semantics
        return cpath.QueryVerdict(False, None)


def _cpath_cex(v, a, b):
    t = v.counterexample
    return t is not None and bool(cpath.eval_cpath(a, t) - cpath.eval_cpath(b, t))


def _ctype_contained(a, b):
    try:
        return ctypes.type_contained(a, b)
    except AssertionError:
        # witness rejected by membership
        return ctypes.TypeVerdict(False, None)


def _ctype_cex(v, a, b):
    if v.empty_forest:
        return ctypes.member(None, a) and not ctypes.member(None, b)
    t = v.counterexample
    return t is not None and ctypes.member(t, a) and not ctypes.member(t, b)


def test_criterion_7_containment():
    t0 = time.perf_counter()
    P = cpath.parse_cpath
    qs = cpath_corpus(13, 16, negatable=True, depth=2)
    cp = _containment_round(qs, [(P("dn/dn*"), P("dn*/dn")), (P("a | b"), P("b | a")),
                                 (P("dn::a[b > 0]"), P("dn::a[b]"))],
                            _cpath_contained, _cpath_cex, _same_cpath, 24, 1)
    T = ctypes.parse_ctype
    es = ctype_corpus(6, 12)
    ct = _containment_round(es, [(T("(a + b)*"), T("(a* . b*)*")), (T("a . a*"), T("a+")),
                                 (T("a[b > 0]"), T("a[(a + b)* . b . (a + b)*]"))],
                            _ctype_contained, _ctype_cex, _same_ctype, 16, 2)
    dt = time.perf_counter() - t0
    ok = cp[0] == cp[1] == cp[3] == 0 and ct[0] == ct[1] == ct[3] == 0
    fmt = "not reflexive={}, invalid counterexamples={}, mutual pairs={}, mutual but different={}"
    assert report("criterion 7 containment sanity", ok,
                  f"cpath: {fmt.format(*cp)}; ctypes: {fmt.format(*ct)}; time={dt:.1f}s")


def test_criterion_8_bijection():
    trips = 0
    round_ok = True
    for fc, ns in iter_shapes(5, nary=True):
        t = KripkeTree("nary", tuple(frozenset([str(i)]) for i in range(len(fc))), fc, ns)
        round_ok &= binary_to_nary(nary_to_binary(t)) == t
        trips += 1
    fs = formula_corpus(9, 50, props=("p", "q"), counting=False)
    trees = list(enumerate_trees(["p", "q"], 4, form="nary"))
    eval_bad = 0
    for f in fs:
        g = nary_formula_to_binary(f)
        eval_bad += sum(eval_formula(f, t) != eval_formula(g, nary_to_binary(t)) for t in trees)
    ok = round_ok and eval_bad == 0
    assert report("criterion 8 bijection", ok,
                  f"{trips} shapes round-trip={round_ok}, 50 formulas x {len(trees)} trees, "
                  f"evaluation mismatches={eval_bad}")


def test_benchmark_k_doubling():
    times = {}
    for k in (4, 8):
        f = parse_formula(f"#(p & <dn>q) > {k} & #(q) <= {k + 2}")
        t0 = time.perf_counter()
        r = satisfiable(f)
        times[k] = time.perf_counter() - t0
        assert r.sat
    ratio = times[8] / max(times[4], 1e-3)
    assert report("benchmark k 4 -> 8", ratio < 8,
                  f"{times[4]:.3f}s -> {times[8]:.3f}s, ratio {ratio:.2f} (limit 8)")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
