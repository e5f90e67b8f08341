import pickle

import pytest

from mutlin.formula import (
    BOTTOM,
    CONVERSE,
    NEGATIVE,
    TOP,
    UNBOUND,
    UNGUARDED,
    UNGUARDED_CYCLE,
    And,
    CountGt,
    CountLe,
    IllFormedFormula,
    Modal,
    Modality,
    Mu,
    MuVec,
    Not,
    Or,
    ParseError,
    Prop,
    Var,
    check_wellformed,
    count_gt,
    exactly_one,
    is_nnf,
    is_wellformed,
    max_k,
    nnf,
    parse_formula,
    propositions,
    rename_apart,
    require_wellformed,
    size,
    substitute,
    to_text,
    unfold,
)

DN, RT, UP, LF = Modality.DOWN, Modality.RIGHT, Modality.UP, Modality.LEFT


def kinds(text):
    return {v.kind for v in check_wellformed(parse_formula(text))}


def test_hash_consing_gives_identity():
    a = And(Prop("p"), Modal(DN, Prop("q")))
    b = And(Prop("p"), Modal(DN, Prop("q")))
    assert a is b
    assert hash(a) == hash(b)
    assert And(Prop("p"), Prop("q")) is not And(Prop("q"), Prop("p"))


def test_formulas_are_immutable():
    p = Prop("p")
    with pytest.raises(AttributeError):
        p.name = "q"


def test_pickle_keeps_interning():
    f = parse_formula("mu $x . (p | <dn>$x) & #(q) > 2")
    assert pickle.loads(pickle.dumps(f)) is f


def test_modality_inverse():
    assert DN.inverse is UP and UP.inverse is DN
    assert RT.inverse is LF and LF.inverse is RT
    assert DN.forward and not LF.forward


@pytest.mark.parametrize("text", [
    "p",
    "~p & q | r",
    "<dn>(p | <rt>T)",
    "mu $x . (p | <dn>$x)",
    "#(p & ~q) > 3",
    "#(<up>p) <= 0",
    "let $x = <dn>$y | p, $y = <rt>$x in $x",
    "~(p | q) & ~<lf>T",
])
def test_print_parse_round_trip(text):
    f = parse_formula(text)
    assert parse_formula(to_text(f)) is f


def test_precedence():
    f = parse_formula("p | q & r")
    assert f is Or(Prop("p"), And(Prop("q"), Prop("r")))
    assert parse_formula("~p & q") is And(Not(Prop("p")), Prop("q"))


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as err:
        parse_formula("p & (q")
    assert err.value.pos == 6
    with pytest.raises(ParseError):
        parse_formula("#(p) >= 2")
    with pytest.raises(ParseError):
        parse_formula("p @ q")


def test_parser_renames_bound_variables_apart():
    f = parse_formula("(mu $x . <dn>$x) | (mu $x . <rt>$x)")
    assert f.left.var != f.right.var


def test_counting_bound_checks():
    with pytest.raises(ValueError):
        count_gt(Prop("p"), -1)
    with pytest.raises(OverflowError):
        count_gt(Prop("p"), 2**63)
    with pytest.raises(ParseError):
        parse_formula(f"#(p) > {2**64}")
    with pytest.raises(OverflowError):
        max_k(CountGt(Prop("p"), 2**63 - 1))


def test_size_counts_bits_of_k():
    assert size(Prop("p")) == 1
    assert size(And(Prop("p"), Prop("q"))) == 3
    assert size(CountGt(Prop("p"), 0)) == 1
    assert size(CountGt(Prop("p"), 8)) == 5
    assert size(CountGt(Prop("p"), 4)) == size(CountGt(Prop("p"), 7))


def test_max_k_sums_atoms():
    assert max_k(parse_formula("#(p) > 2 & #(#(q) <= 1) > 0")) == 3 + 2 + 1


def test_propositions_in_order():
    assert propositions(parse_formula("q & <dn>(p | q)")) == ["q", "p"]


def test_exactly_one():
    assert exactly_one(Prop("o")) is And(CountLe(Prop("o"), 1), CountGt(Prop("o"), 0))


class TestWellformed:
    def test_good_formulas(self):
        for text in ["p", "mu $x . p | <dn>$x", "mu $x . <up>(p | $x)",
                     "let $x = <dn>$y, $y = p | <rt>$x in $x"]:
            assert is_wellformed(parse_formula(text)), text

    def test_unbound(self):
        assert kinds("<dn>$x") == {UNBOUND}

    def test_unguarded(self):
        assert UNGUARDED in kinds("mu $x . p | $x")

    def test_converse(self):
        assert CONVERSE in kinds("mu $x . <dn>$x | <up>$x")

    def test_negative(self):
        assert NEGATIVE in kinds("mu $x . ~<dn>$x")

    def test_unguarded_vector_cycle(self):
        assert UNGUARDED_CYCLE in kinds("let $x = $y | p, $y = $x in $x")

    def test_converse_through_unfolding(self):
        # unfolding the inner binder puts <up> around the outer variable too
        f = parse_formula("mu $x . <dn>(mu $y . p | <up>$y | $x)")
        assert CONVERSE in {v.kind for v in check_wellformed(f)}

    def test_require_raises(self):
        with pytest.raises(IllFormedFormula):
            require_wellformed(parse_formula("mu $x . $x"))


class TestNnf:
    def test_pushes_negation(self):
        f = nnf(parse_formula("~(p & <dn>q)"))
        assert f is Or(Not(Prop("p")), Or(Modal(DN, Not(Prop("q"))), Not(Modal(DN, TOP))))
        assert is_nnf(f)

    def test_dualizes_counting(self):
        assert nnf(Not(CountGt(Prop("p"), 2))) is CountLe(Prop("p"), 2)
        assert nnf(Not(CountLe(Prop("p"), 2))) is CountGt(Prop("p"), 2)

    def test_negated_fixpoint(self):
        f = nnf(Not(parse_formula("mu $x . p | <dn>$x")))
        assert isinstance(f, Mu) and is_nnf(f)

    def test_keeps_bottom(self):
        assert nnf(BOTTOM) is BOTTOM


def test_substitute_avoids_capture():
    f = Mu("y", Or(Var("x"), Modal(DN, Var("y"))))
    g = substitute(f, {"x": Var("y")})
    assert g.var != "y"
    assert "y" in g.free_vars


def test_unfold_mu_and_vector():
    f = parse_formula("mu $x . p | <dn>$x")
    assert unfold(f) is Or(Prop("p"), Modal(DN, f))
    v = parse_formula("let $x = p | <dn>$y, $y = <rt>$x in $x")
    u = unfold(v)
    assert isinstance(u, Or) and u.left is Prop("p")


def test_rename_apart_is_idempotent_on_distinct_names():
    f = parse_formula("mu $a . p | <dn>$a")
    assert rename_apart(f) is f
