import pytest

from mutlin.corpus import ctype_corpus
from mutlin.ctypes import (
    Alt,
    Concat,
    CTypeSyntaxError,
    Eps,
    Labeled,
    LetRec,
    TVar,
    UnsupportedType,
    containment_formula,
    member,
    nullable,
    parse_ctype,
    star,
    to_text,
    translate_type,
    translate_type_negated,
    type_contained,
    type_empty,
    type_equiv,
    type_labels,
    type_size,
)
from mutlin.formula import is_wellformed, propositions, size
from mutlin.trees import KripkeTree, all_labelings, iter_shapes, nary_tree, nominal_rows

OPTS = [frozenset(x) for x in (["a"], ["b"], ["a", "b"])]


def forest(*trees):
    """Binary encoding of a forest given as nested (label, [children]) specs."""
    from mutlin.trees import nary_to_binary
    t = nary_to_binary(nary_tree(("top", list(trees))))
    # drop the artificial root: its first child heads the forest
    keep = [i for i in t.nodes if i != 0]
    index = {old: new for new, old in enumerate(keep)}
    fc = tuple(index.get(t.first_child[i], -1) for i in keep)
    ns = tuple(index.get(t.next_sibling[i], -1) for i in keep)
    return KripkeTree("binary", tuple(t.labels[i] for i in keep), fc, ns)


class TestParse:
    def test_structure(self):
        assert parse_ctype("a") == Labeled("a", Eps())
        assert parse_ctype("a . b + c") == Alt(Concat(Labeled("a", Eps()), Labeled("b", Eps())), Labeled("c", Eps()))
        assert parse_ctype("p[q > 2]") == Labeled("p", Labeled("q", Eps()), ">", 2)
        assert parse_ctype("p[q*]").cmp is None

    def test_star_desugars_to_recursion(self):
        e = parse_ctype("a*")
        assert isinstance(e, LetRec)
        assert e == star(Labeled("a", Eps()), e.vars[0])

    def test_let(self):
        e = parse_ctype("let $x = a . $y, $y = b + eps in $x")
        assert e.vars == ("x", "y") and e.main == TVar("x")

    @pytest.mark.parametrize("text", [
        "a", "a . b", "a + b", "a*", "a+ . b?", "p1[p2*]", "p1[p2 > 1]", "p1[p2 <= 2] . q",
        "let $x = a[$x] + b in $x", "p[(a + b[c > 0])*]", "(a . b)*", "eps",
    ])
    def test_round_trip(self, text):
        e = parse_ctype(text)
        assert parse_ctype(to_text(e)) == e

    def test_corpus_round_trip(self):
        for e in ctype_corpus(4, 40):
            assert to_text(parse_ctype(to_text(e))) == to_text(e)

    @pytest.mark.parametrize("text", ["a[", "a . ", "$x", "let $x = a in", "a[b > ]", "a # b"])
    def test_syntax_errors(self, text):
        with pytest.raises(CTypeSyntaxError):
            parse_ctype(text)

    def test_non_monotone_count_rejected(self):
        with pytest.raises(UnsupportedType):
            parse_ctype("let $x = a[$x <= 1] in $x")

    def test_size_and_labels(self):
        e = parse_ctype("p[q > 2] . r")
        assert type_labels(e) == {"p", "q", "r"}
        assert type_size(e) > type_size(parse_ctype("p[q > 2]"))


class TestMembership:
    def test_sequences(self):
        e = parse_ctype("a . b*")
        assert member(forest("a"), e)
        assert member(forest("a", "b", "b"), e)
        assert not member(forest("b"), e)
        assert not member(None, e)
        assert member(None, parse_ctype("a*"))

    def test_content_model(self):
        e = parse_ctype("p[q*]")
        assert member(nary_tree("p"), e)
        assert member(nary_tree(("p", ["q", "q"])), e)
        assert not member(nary_tree(("p", ["q", "r"])), e)

    def test_children_counts(self):
        more = parse_ctype("p[q > 1]")
        assert member(nary_tree(("p", ["q", "r", "q"])), more)
        assert not member(nary_tree(("p", ["q", "r"])), more)
        few = parse_ctype("p[q <= 1]")
        assert member(nary_tree(("p", ["r", "q", "r"])), few)
        assert not member(nary_tree(("p", ["q", "q"])), few)

    def test_counts_see_whole_child_subtrees(self):
        e = parse_ctype("p[q[r > 0] > 0]")
        assert member(nary_tree(("p", ["s", ("q", ["r"])])), e)
        assert not member(nary_tree(("p", ["q"])), e)

    def test_recursion(self):
        e = parse_ctype("let $x = a[$x] + b in $x")
        assert member(nary_tree(("a", [("a", ["b"])])), e)
        assert not member(nary_tree(("a", [("a", [])])), e)

    def test_extra_labels_allowed(self):
        t = nary_tree("p").relabel(lambda lab: lab | {"z"})
        assert member(t, parse_ctype("p"))

    def test_nullable(self):
        assert nullable(parse_ctype("a* . b?"))
        assert not nullable(parse_ctype("a + b . c*"))
        assert nullable(parse_ctype("let $x = a . $x + eps in $x"))


class TestTranslate:
    def test_well_formed_and_linear(self):
        for e in ctype_corpus(5, 60):
            for f in (translate_type(e), translate_type_negated(e)):
                assert is_wellformed(f)
                assert size(f) <= 8 * type_size(e) + 20, to_text(e)

    def test_left_recursion_unsupported(self):
        with pytest.raises(UnsupportedType):
            translate_type(parse_ctype("let $x = $x . a + b in $x"))


def test_translation_adequacy():
    """Per forest: membership matches the translation, for F and its negation."""
    for e in ctype_corpus(3, 20):
        for neg in (False, True):
            f = translate_type_negated(e) if neg else translate_type(e)
            noms = [p for p in propositions(f) if p not in ("a", "b")]
            for fc, ns in iter_shapes(3):
                hit = nominal_rows(f, fc, ns, OPTS, noms, at_root=True)
                for row, lab in enumerate(all_labelings(3, len(fc))):
                    t = KripkeTree("binary", tuple(OPTS[k] for k in lab), fc, ns)
                    assert (member(t, e) != neg) == bool(hit[row]), (to_text(e), neg, str(t))


class TestReasoning:
    def test_empty(self):
        assert type_empty("a[b > 1] . a[b <= 0] . c[d <= 0]").holds is False
        assert type_empty("let $x = a[$x] in $x")
        assert type_empty("p[q > 1 ] . p[q > 2]").holds is False
        # a child is one tree, never a two-tree forest
        assert type_empty("p[(q . q) > 0]")

    def test_unsatisfiable_counts(self):
        # a leaf has no children to count
        assert type_empty("p[q > 0] . p[eps]").holds is False
        assert type_empty("p[(q[r > 0]) > 0]").holds is False

    def test_empty_forest_witness(self):
        v = type_empty("a*")
        assert not v.holds and v.empty_forest

    def test_witness_is_member(self):
        e = parse_ctype("p[q > 2] . r")
        v = type_empty(e)
        assert not v.holds and member(v.counterexample, e)

    def test_counting_containment(self):
        assert type_contained("p1[p2 > 3]", "p1[p2 > 1]")
        assert type_contained("p1[p2*]", "p1[p2 <= 5]").holds is False
        v = type_contained("p1[p2 > 1]", "p1[p2 > 3]")
        assert not v.holds
        t = v.counterexample
        assert member(t, parse_ctype("p1[p2 > 1]")) and not member(t, parse_ctype("p1[p2 > 3]"))

    def test_sequence_containment(self):
        assert type_contained("a . a", "a*")
        assert not type_contained("a*", "a . a*")
        assert type_contained("(a . b)*", "(a + b)*")
        assert type_equiv("(a + b)*", "(a* . b*)*")

    def test_reflexive(self):
        for e in ctype_corpus(6, 8):
            assert type_contained(e, e), to_text(e)

    def test_containment_formula_well_formed(self):
        assert is_wellformed(containment_formula(parse_ctype("a[b > 1]"), parse_ctype("a[b*]")))
