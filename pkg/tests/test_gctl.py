import pytest

from mutlin.corpus import gctl_corpus
from mutlin.formula import is_wellformed, propositions, size
from mutlin.gctl import (
    AU,
    AX,
    EF,
    EG,
    EU,
    EX,
    GAnd,
    GctlSyntaxError,
    GNot,
    GProp,
    GTrue,
    eval_gctl,
    gctl_props,
    gctl_satisfiable,
    gctl_size,
    parse_gctl,
    to_text,
    translate_gctl,
)
from mutlin.trees import KripkeTree, all_labelings, iter_shapes, nary_to_binary, nary_tree, nominal_rows

OPTS = [frozenset(x) for x in (["a"], ["b"], ["a", "b"])]


@pytest.fixture
def t():
    # preorder ids: 0:p has children 1:q, 2:p, 5:p; node 2 has children 3:q, 4:q
    return nary_tree(("p", ["q", ("p", ["q", "q"]), "p"]))


class TestParse:
    def test_graded_forms(self):
        assert parse_gctl("EX{>1} p") == EX(1, GProp("p"))
        assert parse_gctl("EU{>2}(p, q)") == EU(2, GProp("p"), GProp("q"))
        assert parse_gctl("EG{>0} T") == EG(0, GTrue())

    def test_universal_sugar(self):
        assert parse_gctl("AX{<=1} p") == AX(1, GProp("p")) == GNot(EX(1, GNot(GProp("p"))))
        assert parse_gctl("EF{>0} p") == EF(0, GProp("p"))

    def test_booleans_bind_looser_than_modalities(self):
        assert parse_gctl("EX{>0} p & q") == GAnd(EX(0, GProp("p")), GProp("q"))

    def test_round_trip(self):
        for f in gctl_corpus(2, 60):
            assert parse_gctl(to_text(f)) == f

    @pytest.mark.parametrize("text", ["EX{<=1} p", "AX{>1} p", "EU{>1}(p q)", "EX p", "p &", "P"])
    def test_errors(self, text):
        with pytest.raises(GctlSyntaxError):
            parse_gctl(text)

    def test_size_counts_grade_bits(self):
        assert gctl_size(parse_gctl("EX{>5} p")) == 1 + 3 + 1
        assert gctl_props(parse_gctl("EU{>0}(a, b & c)")) == {"a", "b", "c"}


class TestEval:
    def test_next(self, t):
        assert eval_gctl(parse_gctl("EX{>1} p"), t) == {0}
        assert eval_gctl(parse_gctl("EX{>0} q"), t) == {0, 2}
        assert eval_gctl(parse_gctl("AX{<=0} q"), t) == {1, 2, 3, 4, 5}

    def test_globally_counts_paths(self, t):
        # every node is on p or q; paths from 0 end in 1, 3, 4 and 5
        assert eval_gctl(parse_gctl("EG{>3} T"), t) == {0}
        assert eval_gctl(parse_gctl("EG{>0} p"), t) == {0, 5}
        assert eval_gctl(parse_gctl("EG{>1} (p | q)"), t) == {0, 2}

    def test_until_counts_paths(self, t):
        assert eval_gctl(parse_gctl("EU{>2}(p, q)"), t) == {0}
        assert eval_gctl(parse_gctl("EU{>1}(p, q)"), t) == {0, 2}
        assert eval_gctl(parse_gctl("EU{>0}(p, q)"), t) == {0, 1, 2, 3, 4}

    def test_until_counts_every_prefix_ending_in_goal(self):
        t = nary_tree(("q", ["q", "q"]))
        assert eval_gctl(parse_gctl("EU{>0}(p, q)"), t) == {0, 1, 2}
        assert eval_gctl(parse_gctl("EU{>1}(T, q)"), t) == {0}

    def test_universal_until(self, t):
        # all paths reach q while staying in p: fails at 0 through leaf 5
        assert 0 not in eval_gctl(AU(0, GProp("p"), GProp("q")), t)
        assert 2 in eval_gctl(AU(0, GProp("p"), GProp("q")), t)
        assert 0 in eval_gctl(AU(1, GProp("p"), GProp("q")), t)

    def test_requires_nary(self, t):
        with pytest.raises(ValueError):
            eval_gctl(GTrue(), nary_to_binary(t))


class TestTranslate:
    def test_well_formed_and_linear_for_fixed_grades(self):
        for f in gctl_corpus(5, 80):
            g = translate_gctl(f)
            assert is_wellformed(g)
            assert size(g) <= 12 * gctl_size(f) + 20, to_text(f)

    def test_origins_are_fresh(self):
        g = translate_gctl("EX{>1} o1 & EX{>1} o2")
        assert {"o1", "o2"} < set(propositions(g))
        assert len(set(propositions(g))) == 4


def test_translation_adequacy():
    """Per tree: some node satisfies the formula exactly when the translation does."""
    for f in gctl_corpus(3, 30, max_origins=2, props=("a", "b")):
        g = translate_gctl(f)
        noms = [p for p in propositions(g) if p not in ("a", "b")]
        for fc, ns in iter_shapes(5, nary=True):
            hit = nominal_rows(g, fc, ns, OPTS, noms)
            for row, lab in enumerate(all_labelings(3, len(fc))):
                t = KripkeTree("nary", tuple(OPTS[k] for k in lab), fc, ns)
                assert bool(eval_gctl(f, t)) == bool(hit[row]), (to_text(f), str(t))


class TestSatisfiability:
    @pytest.mark.parametrize("text,sat", [
        ("EX{>1} p", True),
        ("EX{>2} p & AX{<=0} ~p", False),
        ("EX{>2} p & AX{<=1} ~p", False),
        ("EX{>1} p & AX{<=2} ~p", True),
        ("EG{>1} T", True),
        ("EU{>2}(p, q)", True),
        ("EU{>0}(p, q) & AG{<=0} ~q", False),
        ("EG{>0} p & AX{<=0} ~p & EX{>0} T", False),
    ])
    def test_verdicts(self, text, sat):
        v = gctl_satisfiable(text)
        assert v.sat is sat
        if sat:
            assert eval_gctl(parse_gctl(text), v.witness)

    def test_witness_size(self):
        v = gctl_satisfiable("EX{>1} p")
        assert v.witness.size == 3
