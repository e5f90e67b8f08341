"""CPath: regular path queries with counting qualifiers.

Queries denote binary relations over the nodes of an unranked tree.  This
module parses the concrete syntax, evaluates queries directly (the reference
semantics) and reduces emptiness, containment and equivalence to
satisfiability of tree-logic formulas.

Concrete syntax::

    axis   := dn | rt | up | lf | dn* | up*
    path   := T | axis | name | axis::name | path/path | path[qual] | (path)
    qual   := path | path > k | path <= k | !qual | qual | qual | qual & qual | (qual)
    query  := path | /query | query | query | query & query | query \\ query

``rt`` and ``lf`` are the immediate next and previous sibling, ``dn*`` and
``up*`` strict descendants and ancestors.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .formula import (
    TOP,
    And,
    CountGt,
    Formula,
    Modal,
    Modality,
    Mu,
    Not,
    Or,
    Prop,
    Var,
    exactly_one,
    fresh_name,
    propositions,
)
from .solver import satisfiable
from .trees import KripkeTree, binary_to_nary, nary_formula_to_binary

DN, RT, UP, LF = Modality.DOWN, Modality.RIGHT, Modality.UP, Modality.LEFT

AXES = ("dn", "rt", "up", "lf", "dn*", "up*")


class CPathSyntaxError(ValueError):
    def __init__(self, msg, pos, text):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos
        self.text = text


class UnsupportedQuery(ValueError):
    """The query needs a counting anchor in a position where one node cannot stand for all."""


# ---------------------------------------------------------------------------
# syntax


@dataclass(frozen=True)
class Top:
    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Axis:
    axis: str

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class PropTest:
    name: str

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class AxisProp:
    axis: str
    name: str

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Compose:
    left: object
    right: object

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Qualified:
    path: object
    qual: object

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class QCount:
    path: object
    k: int

    def __str__(self):
        return _qual_text(self)


@dataclass(frozen=True)
class QOr:
    left: object
    right: object

    def __str__(self):
        return _qual_text(self)


@dataclass(frozen=True)
class QNot:
    body: object

    def __str__(self):
        return _qual_text(self)


@dataclass(frozen=True)
class Rooted:
    query: object

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Union:
    left: object
    right: object

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Intersection:
    left: object
    right: object

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Difference:
    left: object
    right: object

    def __str__(self):
        return to_text(self)


PATHS = (Top, Axis, PropTest, AxisProp, Compose, Qualified)
QUALS = (QCount, QOr, QNot)
TOPS = (Rooted, Union, Intersection, Difference)


def q_and(a, b):
    return QNot(QOr(QNot(a), QNot(b)))


def _is_and(q):
    return isinstance(q, QNot) and isinstance(q.body, QOr) \
        and isinstance(q.body.left, QNot) and isinstance(q.body.right, QNot)


def query_size(q) -> int:
    """Number of constructors, counting k by its binary length."""
    if isinstance(q, (Top, Axis, PropTest)):
        return 1
    if isinstance(q, AxisProp):
        return 2
    if isinstance(q, QCount):
        return 1 + query_size(q.path) + max(1, q.k.bit_length())
    if isinstance(q, (QNot, Rooted)):
        return 1 + query_size(q.body if isinstance(q, QNot) else q.query)
    if isinstance(q, Qualified):
        return 1 + query_size(q.path) + query_size(q.qual)
    return 1 + query_size(q.left) + query_size(q.right)


def query_props(q) -> set:
    if isinstance(q, (PropTest, AxisProp)):
        return {q.name}
    out = set()
    for v in vars(q).values():
        if isinstance(v, PATHS + QUALS + TOPS):
            out |= query_props(v)
    return out


# printing ------------------------------------------------------------------


def _path_text(p, prec=0) -> str:
    # prec 0: composition allowed; 1: needs an atom
    if isinstance(p, Top):
        return "T"
    if isinstance(p, Axis):
        return p.axis
    if isinstance(p, PropTest):
        return p.name
    if isinstance(p, AxisProp):
        return f"{p.axis}::{p.name}"
    if isinstance(p, Compose):
        s = f"{_path_text(p.left, 0)}/{_path_text(p.right, 1 if isinstance(p.right, Compose) else 0)}"
        return f"({s})" if prec else s
    if isinstance(p, Qualified):
        inner = _path_text(p.path, 1)
        if isinstance(p.path, Qualified):
            # x[q1][q2] would parse back as one conjoined qualifier
            inner = f"({inner})"
        return f"{inner}[{_qual_text(p.qual)}]"
    raise TypeError(f"not a path: {p!r}")


def _qual_text(q, prec=0) -> str:
    # prec 0: or, 1: and, 2: unary
    if _is_and(q):
        s = f"{_qual_text(q.body.left.body, 1)} & {_qual_text(q.body.right.body, 2)}"
        return f"({s})" if prec > 1 else s
    if isinstance(q, QOr):
        s = f"{_qual_text(q.left, 0)} | {_qual_text(q.right, 1)}"
        return f"({s})" if prec else s
    if isinstance(q, QNot) and isinstance(q.body, QCount):
        s = f"{_path_text(q.body.path)} <= {q.body.k}"
        return f"({s})" if prec > 1 else s
    if isinstance(q, QNot):
        return "!" + _qual_text(q.body, 2)
    if isinstance(q, QCount):
        if q.k == 0:
            return _path_text(q.path)
        s = f"{_path_text(q.path)} > {q.k}"
        return f"({s})" if prec > 1 else s
    raise TypeError(f"not a qualifier: {q!r}")


def to_text(q, prec=0) -> str:
    # prec 0: union, 1: difference, 2: intersection, 3: atom
    if isinstance(q, PATHS):
        s = _path_text(q)
        return f"({s})" if prec > 2 and isinstance(q, Compose) else s
    if isinstance(q, Rooted):
        inner = q.query
        if isinstance(inner, PATHS) or isinstance(inner, Rooted):
            return "/" + to_text(inner, 2)
        return f"/({to_text(inner)})"
    ops = {Union: ("|", 0), Difference: ("\\", 1), Intersection: ("&", 2)}
    for cls, (sym, level) in ops.items():
        if isinstance(q, cls):
            s = f"{to_text(q.left, level)} {sym} {to_text(q.right, level + 1)}"
            return f"({s})" if prec > level else s
    raise TypeError(f"not a query: {q!r}")


# parsing -------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<axis>(?:dn|up)\*)|(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
                    r"|(?P<op>::|<=|[/\[\]()>!|&\\]))")


def _tokenize(text):
    toks, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise CPathSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        val = m.group(kind)
        toks.append((kind if kind != "axis" else "name", val, m.start(kind)))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def at(self, val):
        return self.toks[self.i][1] == val and self.toks[self.i][0] != "end"

    def take(self, val=None):
        t = self.toks[self.i]
        if val is not None and t[1] != val:
            self.fail(f"expected {val!r}")
        self.i += 1
        return t

    def fail(self, msg):
        t = self.toks[self.i]
        got = "end of input" if t[0] == "end" else repr(t[1])
        raise CPathSyntaxError(f"{msg}, got {got}", t[2], self.text)

    # queries
    def query(self):
        q = self.diff()
        while self.at("|"):
            self.take()
            q = Union(q, self.diff())
        return q

    def diff(self):
        q = self.inter()
        while self.at("\\"):
            self.take()
            q = Difference(q, self.inter())
        return q

    def inter(self):
        q = self.unary()
        while self.at("&"):
            self.take()
            q = Intersection(q, self.unary())
        return q

    def unary(self):
        if self.at("/"):
            self.take()
            return Rooted(self.unary())
        return self.path()

    # paths
    def path(self):
        p = self.step()
        while self.at("/"):
            self.take()
            p = Compose(p, self.step())
        return p

    def step(self):
        p = self.atom()
        quals = []
        while self.at("["):
            self.take()
            quals.append(self.qual())
            self.take("]")
        if quals:
            q = quals[0]
            for extra in quals[1:]:
                q = q_and(q, extra)
            p = Qualified(p, q)
        return p

    def atom(self):
        kind, val, pos = self.peek()
        if val == "(" and kind == "op":
            self.take()
            q = self.query()
            self.take(")")
            if not isinstance(q, PATHS) and (self.at("/") or self.at("[")):
                # a bracketed set expression may only stand on its own
                raise CPathSyntaxError("set operators are not allowed inside a path", pos, self.text)
            return q
        if kind != "name":
            self.fail("expected a path")
        self.take()
        if val == "T":
            return Top()
        if val in AXES:
            if self.at("::"):
                self.take()
                k2, name, p2 = self.peek()
                if k2 != "name" or name in AXES or name == "T":
                    self.fail("expected a proposition name")
                self.take()
                return AxisProp(val, name)
            return Axis(val)
        return PropTest(val)

    # qualifiers
    def qual(self):
        q = self.qand()
        while self.at("|"):
            self.take()
            q = QOr(q, self.qand())
        return q

    def qand(self):
        q = self.qnot()
        while self.at("&"):
            self.take()
            q = q_and(q, self.qnot())
        return q

    def qnot(self):
        if self.at("!"):
            self.take()
            return QNot(self.qnot())
        if self.at("("):
            save = self.i
            self.take()
            q = self.qual()
            if self.at(")"):
                self.take()
                if not (self.at(">") or self.at("<=") or self.at("/") or self.at("[")):
                    return q
            # it was a parenthesised path
            self.i = save
        p = self.path()
        if self.at(">") or self.at("<="):
            op = self.take()[1]
            kind, val, _ = self.peek()
            if kind != "num":
                self.fail("expected a number")
            self.take()
            c = QCount(p, int(val))
            return c if op == ">" else QNot(c)
        return QCount(p, 0)


def parse_cpath(text: str):
    p = _Parser(text)
    q = p.query()
    if p.peek()[0] != "end":
        p.fail("unexpected input")
    return q


# ---------------------------------------------------------------------------
# direct semantics


def _axis_matrix(t: KripkeTree, axis: str) -> np.ndarray:
    n = t.size
    child = np.zeros((n, n), dtype=bool)
    nxt = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for c in t.children(i):
            child[i, c] = True
        if t.next_sibling[i] >= 0:
            nxt[i, t.next_sibling[i]] = True
    if axis == "dn":
        return child
    if axis == "up":
        return child.T.copy()
    if axis == "rt":
        return nxt
    if axis == "lf":
        return nxt.T.copy()
    closure = child.copy()
    while True:
        step = closure | ((closure.astype(np.uint8) @ child.astype(np.uint8)) > 0)
        if np.array_equal(step, closure):
            break
        closure = step
    return closure if axis == "dn*" else closure.T.copy()


class _Evaluator:
    def __init__(self, t: KripkeTree):
        if t.form != "nary":
            raise ValueError("queries are evaluated on n-ary trees")
        self.t = t
        self.n = t.size
        self._axes = {}

    def axis(self, a):
        m = self._axes.get(a)
        if m is None:
            m = self._axes[a] = _axis_matrix(self.t, a)
        return m

    def has(self, name):
        return np.array([name in lab for lab in self.t.labels], dtype=bool)

    def path(self, p) -> np.ndarray:
        n = self.n
        if isinstance(p, Top):
            return np.ones((n, n), dtype=bool)
        if isinstance(p, Axis):
            return self.axis(p.axis)
        if isinstance(p, PropTest):
            return np.diag(self.has(p.name))
        if isinstance(p, AxisProp):
            return self.axis(p.axis) & self.has(p.name)[None, :]
        if isinstance(p, Compose):
            a, b = self.path(p.left), self.path(p.right)
            return (a.astype(np.uint8) @ b.astype(np.uint8)) > 0
        if isinstance(p, Qualified):
            return self.path(p.path) & self.qual(p.qual)[None, :]
        raise TypeError(f"not a path: {p!r}")

    def qual(self, q) -> np.ndarray:
        if isinstance(q, QCount):
            return self.path(q.path).sum(axis=1) > q.k
        if isinstance(q, QOr):
            return self.qual(q.left) | self.qual(q.right)
        if isinstance(q, QNot):
            return ~self.qual(q.body)
        raise TypeError(f"not a qualifier: {q!r}")

    def query(self, q) -> np.ndarray:
        if isinstance(q, PATHS):
            return self.path(q)
        if isinstance(q, Rooted):
            r = self.query(q.query).copy()
            keep = np.zeros(self.n, dtype=bool)
            keep[self.t.root] = True
            r[~keep, :] = False
            return r
        a, b = self.query(q.left), self.query(q.right)
        if isinstance(q, Union):
            return a | b
        if isinstance(q, Intersection):
            return a & b
        if isinstance(q, Difference):
            return a & ~b
        raise TypeError(f"not a query: {q!r}")


def eval_cpath(q, t: KripkeTree) -> frozenset:
    """The pairs (start, selected) denoted by ``q`` on the n-ary tree ``t``."""
    if isinstance(q, str):
        q = parse_cpath(q)
    m = _Evaluator(t).query(q)
    return frozenset((int(i), int(j)) for i, j in zip(*np.nonzero(m)))


# ---------------------------------------------------------------------------
# translation
#
# F(q, C) holds at the nodes selected by q from some start node satisfying C.
# Formulas are first written over n-ary trees and then encoded.  A qualifier
# counting k >= 1 nodes pins its node with a fresh origin proposition o that
# holds exactly once; that is only sound where the qualified node is a single
# existential witness, so such qualifiers are rejected under negation and
# inside counted subformulas.

ROOT_NARY = And(Not(Modal(UP, TOP)), Not(Modal(LF, TOP)))


class _Translator:
    def __init__(self, taken=()):
        self.taken = set(taken)
        self.origins: list = []
        self._vars = 0

    def var(self):
        self._vars += 1
        return f"x{self._vars}"

    def origin(self, stem="o"):
        o = fresh_name(f"{stem}{len(self.origins) + 1}", self.taken)
        self.taken.add(o)
        self.origins.append(o)
        return o

    def anchor(self, stem):
        o = self.origin(stem)
        return And(Prop(o), exactly_one(Prop(o)))

    # forward image of C
    def axis(self, a, c):
        if a == "dn":
            return Modal(UP, c)
        if a == "rt":
            return Modal(LF, c)
        if a == "up":
            return Modal(DN, c)
        if a == "lf":
            return Modal(RT, c)
        x = self.var()
        m = UP if a == "dn*" else DN
        return Mu(x, Modal(m, Or(c, Var(x))))

    def path(self, p, c, single):
        if isinstance(p, Top):
            return CountGt(c, 0)
        if isinstance(p, Axis):
            return self.axis(p.axis, c)
        if isinstance(p, PropTest):
            return And(c, Prop(p.name))
        if isinstance(p, AxisProp):
            return And(Prop(p.name), self.axis(p.axis, c))
        if isinstance(p, Compose):
            return self.path(p.right, self.path(p.left, c, single), single)
        if isinstance(p, Qualified):
            return And(self.path(p.path, c, single), self.qualifier(p.qual, single, single))
        raise TypeError(f"not a path: {p!r}")

    # preimage of phi: nodes from which p reaches a phi node
    def back_axis(self, a, phi):
        if a in ("dn", "rt", "up", "lf"):
            return Modal({"dn": DN, "rt": RT, "up": UP, "lf": LF}[a], phi)
        x = self.var()
        m = DN if a == "dn*" else UP
        return Mu(x, Modal(m, Or(phi, Var(x))))

    def back(self, p, phi, single):
        if isinstance(p, Top):
            return CountGt(phi, 0)
        if isinstance(p, Axis):
            return self.back_axis(p.axis, phi)
        if isinstance(p, PropTest):
            return And(Prop(p.name), phi)
        if isinstance(p, AxisProp):
            return self.back_axis(p.axis, And(Prop(p.name), phi))
        if isinstance(p, Compose):
            return self.back(p.left, self.back(p.right, phi, single), single)
        if isinstance(p, Qualified):
            return self.back(p.path, And(phi, self.qualifier(p.qual, single, single)), single)
        raise TypeError(f"not a path: {p!r}")

    def qualifier(self, q, node_single, nested, negate=False):
        """Formula for the nodes satisfying ``q`` (or failing it, with ``negate``).

        ``node_single``: the qualified node is one existential witness, so an
        origin may pin it.  ``nested``: the same holds for nodes reached by
        the qualifier's own paths.
        """
        box = []

        def pin():
            if not box:
                if not node_single:
                    raise UnsupportedQuery("counting qualifier (k >= 1) under negation or inside a count")
                box.append(self.origin())
            return box[0]

        def go(b, nested):
            if isinstance(b, QCount):
                if b.k == 0:
                    return self.back(b.path, TOP, nested)
                o = pin()
                ctx = And(exactly_one(Prop(o)), Prop(o))
                return CountGt(self.path(b.path, ctx, False), b.k)
            if isinstance(b, QOr):
                return Or(go(b.left, nested), go(b.right, nested))
            if isinstance(b, QNot):
                return Not(go(b.body, False))
            raise TypeError(f"not a qualifier: {b!r}")

        body = Not(go(q, False)) if negate else go(q, nested)
        if not box:
            return body
        # uniqueness is stated outside the count too: under negation an
        # origin holding twice would otherwise empty the count
        o = Prop(box[0])
        return And(And(o, exactly_one(o)), body)

    # top-level queries
    def query(self, q, c, single_ctx):
        if isinstance(q, PATHS):
            return self.path(q, c, True)
        if isinstance(q, Rooted):
            return self.query(q.query, And(c, ROOT_NARY), single_ctx)
        if isinstance(q, Union):
            return Or(self.query(q.left, c, single_ctx), self.query(q.right, c, single_ctx))
        # both sides must be read from the same start node
        if not single_ctx:
            c = And(c, self.anchor("c"))
        if isinstance(q, Intersection):
            return And(self.query(q.left, c, True), self.query(q.right, c, True))
        if isinstance(q, Difference):
            return And(self.query(q.left, c, True), self.negated(q.right, c, True))
        raise TypeError(f"not a query: {q!r}")

    def negated(self, q, c, single_ctx):
        if isinstance(q, PATHS):
            core, quals = _split_last(q)
            out = Not(self.path(core, c, False))
            for b in quals:
                out = Or(out, self.qualifier(b, True, False, negate=True))
            return out
        if isinstance(q, Rooted):
            return self.negated(q.query, And(c, ROOT_NARY), single_ctx)
        if isinstance(q, Union):
            return And(self.negated(q.left, c, single_ctx), self.negated(q.right, c, single_ctx))
        if not single_ctx:
            raise UnsupportedQuery("negated intersection or difference needs a fixed start node")
        if isinstance(q, Intersection):
            return Or(self.negated(q.left, c, True), self.negated(q.right, c, True))
        if isinstance(q, Difference):
            return Or(self.negated(q.left, c, True), self.query(q.right, c, True))
        raise TypeError(f"not a query: {q!r}")


def _split_last(p):
    """Peel the qualifiers that constrain the selected node itself."""
    quals = []
    while True:
        if isinstance(p, Qualified):
            quals.append(p.qual)
            p = p.path
        elif isinstance(p, Compose) and isinstance(p.right, Qualified):
            quals.append(p.right.qual)
            p = Compose(p.left, p.right.path)
        else:
            return p, quals


def _coerce(q):
    return parse_cpath(q) if isinstance(q, str) else q


def translate_query(q, context: Formula = TOP, binary: bool = True, taken=()) -> Formula:
    """F(q, context): holds at the nodes q selects from some context node."""
    q = _coerce(q)
    tr = _Translator(set(taken) | query_props(q) | set(propositions(context)))
    f = tr.query(q, context, False)
    return nary_formula_to_binary(f) if binary else f


def translate_query_negated(q, context: Formula = TOP, binary: bool = True, taken=()) -> Formula:
    """F'(q, context): holds where q selects nothing from a context node.

    ``context`` must hold at one node only when q uses intersection or
    difference; counting qualifiers are only allowed on the selected node.
    """
    q = _coerce(q)
    tr = _Translator(set(taken) | query_props(q) | set(propositions(context)))
    f = tr.negated(q, context, True)
    return nary_formula_to_binary(f) if binary else f


# ---------------------------------------------------------------------------
# reasoning


@dataclass
class QueryVerdict:
    holds: bool
    counterexample: KripkeTree | None = None
    formula: Formula | None = None
    stats: dict | None = None

    def __bool__(self):
        return self.holds


def _strip(t: KripkeTree, keep: set) -> KripkeTree:
    tree = binary_to_nary(t)
    return tree.relabel(lambda lab: frozenset(x for x in lab if x in keep) or frozenset(["pfresh"]))


def _solve(f: Formula, keep: set, check, options):
    res = satisfiable(f, rooted_tree=True, **options)
    if not res.sat:
        return QueryVerdict(True, None, f, res.stats.as_dict())
    t = _strip(res.kripke, keep)
    if not check(t):
        raise AssertionError(f"solver witness rejected by the direct semantics:\n{t}")
    return QueryVerdict(False, t, f, res.stats.as_dict())


def query_empty(q, **options) -> QueryVerdict:
    """Is q empty on every tree?  A counterexample tree is returned otherwise."""
    q = _coerce(q)
    props = query_props(q)
    f = translate_query(q)
    return _solve(f, props, lambda t: bool(eval_cpath(q, t)), options)


def containment_formula(q1, q2, binary: bool = True) -> Formula:
    """Satisfiable iff some tree has a pair selected by q1 but not by q2."""
    q1, q2 = _coerce(q1), _coerce(q2)
    tr = _Translator(query_props(q1) | query_props(q2))
    start = tr.anchor("c")
    f = And(start.right, And(tr.query(q1, start, True), tr.negated(q2, start, True)))
    return nary_formula_to_binary(f) if binary else f


def query_contained(q1, q2, **options) -> QueryVerdict:
    """Is every pair selected by q1 also selected by q2, on every tree?

    Both queries are read from one start node pinned by a fresh origin, so
    the check is about pairs and not only about the selected nodes.
    """
    q1, q2 = _coerce(q1), _coerce(q2)
    props = query_props(q1) | query_props(q2)
    f = containment_formula(q1, q2)
    return _solve(f, props, lambda t: bool(eval_cpath(q1, t) - eval_cpath(q2, t)), options)


def query_equiv(q1, q2, **options) -> QueryVerdict:
    v = query_contained(q1, q2, **options)
    if not v:
        return v
    return query_contained(q2, q1, **options)
