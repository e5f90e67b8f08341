"""Graded CTL over finite trees, and its embedding into the tree logic.

``EX{>k} f`` holds at nodes with more than k children satisfying f,
``EG{>k} f`` at nodes with more than k downward paths to a leaf that stay
inside f, and ``EU{>k}(f, g)`` at nodes with more than k downward paths
that end in g and pass only through f before that.  The universal forms
``AX{<=k}``, ``AG{<=k}``, ``AU{<=k}`` and ``EF{>k}`` are sugar.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .formula import (
    BOTTOM,
    TOP,
    And,
    CountGt,
    Formula,
    Modal,
    Modality,
    Mu,
    MuVec,
    Not,
    Or,
    Prop,
    Var,
    exactly_one,
    fresh_name,
)
from .solver import satisfiable
from .trees import KripkeTree, binary_to_nary

DN, RT, UP, LF = Modality.DOWN, Modality.RIGHT, Modality.UP, Modality.LEFT


class GctlSyntaxError(ValueError):
    def __init__(self, msg, pos, text):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos
        self.text = text


@dataclass(frozen=True)
class GProp:
    name: str


@dataclass(frozen=True)
class GTrue:
    pass


@dataclass(frozen=True)
class GNot:
    body: object


@dataclass(frozen=True)
class GOr:
    left: object
    right: object


@dataclass(frozen=True)
class GAnd:
    left: object
    right: object


@dataclass(frozen=True)
class EX:
    k: int
    body: object


@dataclass(frozen=True)
class EG:
    k: int
    body: object


@dataclass(frozen=True)
class EU:
    k: int
    left: object
    right: object


GRADED = (EX, EG, EU)


def AX(k, f):
    return GNot(EX(k, GNot(f)))


def EF(k, f):
    return EU(k, GTrue(), f)


def AG(k, f):
    return GNot(EF(k, GNot(f)))


def AU(k, f, g):
    out = None
    for k1 in range(k + 1):
        nf, ng = GNot(f), GNot(g)
        part = GNot(GOr(EU(k1, ng, GAnd(nf, ng)), EG(k - k1, ng)))
        out = part if out is None else GOr(out, part)
    return out


def gctl_size(f) -> int:
    if isinstance(f, (GProp, GTrue)):
        return 1
    if isinstance(f, GNot):
        return 1 + gctl_size(f.body)
    if isinstance(f, (GOr, GAnd)):
        return 1 + gctl_size(f.left) + gctl_size(f.right)
    grade = max(1, f.k.bit_length())
    if isinstance(f, EU):
        return 1 + grade + gctl_size(f.left) + gctl_size(f.right)
    return 1 + grade + gctl_size(f.body)


def gctl_props(f) -> set:
    if isinstance(f, GProp):
        return {f.name}
    if isinstance(f, GTrue):
        return set()
    if isinstance(f, (GNot, EX, EG)):
        return gctl_props(f.body)
    return gctl_props(f.left) | gctl_props(f.right)


# printing ------------------------------------------------------------------


def to_text(f, prec=0) -> str:
    # prec 0: |, 1: &, 2: prefix operand
    if isinstance(f, GProp):
        return f.name
    if isinstance(f, GTrue):
        return "T"
    if isinstance(f, GNot):
        return "~" + to_text(f.body, 2)
    if isinstance(f, EX):
        return f"EX{{>{f.k}}} " + to_text(f.body, 2)
    if isinstance(f, EG):
        return f"EG{{>{f.k}}} " + to_text(f.body, 2)
    if isinstance(f, EU):
        return f"EU{{>{f.k}}}({to_text(f.left)}, {to_text(f.right)})"
    if isinstance(f, GOr):
        s = f"{to_text(f.left, 0)} | {to_text(f.right, 1)}"
        return s if prec == 0 else f"({s})"
    if isinstance(f, GAnd):
        s = f"{to_text(f.left, 1)} & {to_text(f.right, 2)}"
        return s if prec <= 1 else f"({s})"
    raise TypeError(f"not a GCTL formula: {f!r}")


# parsing -------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<grade>(?:EX|EG|EU|EF|AX|AG|AU)\{\s*(?:>|<=)\s*\d+\s*\})"
                    r"|(?P<name>[A-Za-z_][A-Za-z0-9_']*)|(?P<op>[~|&(),]))")
_GRADE = re.compile(r"(\w\w)\{\s*(>|<=)\s*(\d+)\s*\}")
_EXIST = {"EX", "EG", "EU", "EF"}


def _tokenize(text):
    toks, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise GctlSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
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

    def take(self, val=None):
        t = self.toks[self.i]
        if val is not None and t[1] != val:
            got = "end of input" if t[0] == "end" else repr(t[1])
            raise GctlSyntaxError(f"expected {val!r}, got {got}", t[2], self.text)
        self.i += 1
        return t

    def expr(self):
        f = self.conj()
        while self.peek()[1] == "|":
            self.take()
            f = GOr(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.peek()[1] == "&":
            self.take()
            f = GAnd(f, self.unary())
        return f

    def unary(self):
        kind, val, pos = self.peek()
        if val == "~":
            self.take()
            return GNot(self.unary())
        if kind == "grade":
            self.take()
            op, cmp, k = _GRADE.fullmatch(val).groups()
            k = int(k)
            if (op in _EXIST) != (cmp == ">"):
                want = ">" if op in _EXIST else "<="
                raise GctlSyntaxError(f"{op} takes a '{want}' grade", pos, self.text)
            if op in ("EU", "AU"):
                self.take("(")
                a = self.expr()
                self.take(",")
                b = self.expr()
                self.take(")")
                return EU(k, a, b) if op == "EU" else AU(k, a, b)
            body = self.unary()
            return {"EX": EX, "EG": EG, "EF": EF, "AX": AX, "AG": AG}[op](k, body)
        return self.atom()

    def atom(self):
        kind, val, pos = self.take()
        if val == "(":
            f = self.expr()
            self.take(")")
            return f
        if kind == "name":
            if val == "T":
                return GTrue()
            if val[0].islower():
                return GProp(val)
        got = "end of input" if kind == "end" else repr(val)
        raise GctlSyntaxError(f"expected a formula, got {got}", pos, self.text)


def parse_gctl(text: str):
    p = _Parser(text)
    f = p.expr()
    kind, val, pos = p.peek()
    if kind != "end":
        raise GctlSyntaxError(f"unexpected {val!r}", pos, text)
    return f


# direct semantics ----------------------------------------------------------


def eval_gctl(f, t: KripkeTree) -> frozenset:
    """Nodes of the n-ary tree ``t`` where ``f`` holds."""
    if isinstance(f, str):
        f = parse_gctl(f)
    if t.form != "nary":
        raise ValueError("eval_gctl expects an n-ary tree")
    kids = [t.children(n) for n in t.nodes]
    # children before parents
    order, stack = [], [t.root]
    while stack:
        n = stack.pop()
        order.append(n)
        stack.extend(kids[n])
    order.reverse()
    memo: dict = {}

    def go(g):
        if g in memo:
            return memo[g]
        if isinstance(g, GProp):
            r = {n for n in t.nodes if g.name in t.labels[n]}
        elif isinstance(g, GTrue):
            r = set(t.nodes)
        elif isinstance(g, GNot):
            r = set(t.nodes) - go(g.body)
        elif isinstance(g, GOr):
            r = go(g.left) | go(g.right)
        elif isinstance(g, GAnd):
            r = go(g.left) & go(g.right)
        elif isinstance(g, EX):
            s = go(g.body)
            r = {n for n in t.nodes if sum(c in s for c in kids[n]) > g.k}
        elif isinstance(g, EG):
            # leaf-ending paths inside s
            s, cnt = go(g.body), {}
            for n in order:
                cnt[n] = 0 if n not in s else (1 if not kids[n] else sum(cnt[c] for c in kids[n]))
            r = {n for n in t.nodes if cnt[n] > g.k}
        elif isinstance(g, EU):
            a, b, cnt = go(g.left), go(g.right), {}
            for n in order:
                cnt[n] = (n in b) + (sum(cnt[c] for c in kids[n]) if n in a else 0)
            r = {n for n in t.nodes if cnt[n] > g.k}
        else:
            raise TypeError(f"not a GCTL formula: {g!r}")
        memo[g] = r
        return r

    return frozenset(go(f))


# translation ---------------------------------------------------------------

LEAF = Not(Modal(DN, TOP))


def _up(f, s):
    """Holds where the n-ary parent satisfies f (binary encoding)."""
    return Mu(s, Or(Modal(UP, f), Modal(LF, Var(s))))


class _Translator:
    def __init__(self, taken=()):
        self.taken = set(taken)
        self.pins: list = []

    def fresh(self, stem):
        name = fresh_name(f"{stem}{len(self.taken)}", self.taken)
        self.taken.add(name)
        return name

    def top(self, f):
        """Boolean structure seen from the single node where the formula holds."""
        if isinstance(f, GNot):
            return Not(self.top(f.body))
        if isinstance(f, GOr):
            return Or(self.top(f.left), self.top(f.right))
        if isinstance(f, GAnd):
            return And(self.top(f.left), self.top(f.right))
        if isinstance(f, GRADED) and f.k > 0:
            return self.pinned(f)
        return self.inner(f)

    def pinned(self, f):
        o = Prop(self.fresh("o"))
        pin = And(o, exactly_one(o))
        self.pins.append(pin)
        if isinstance(f, EX):
            body = And(self.inner(f.body), _up(pin, self.fresh("s")))
        else:
            x = self.fresh("x")
            path = Mu(x, And(self.inner(f.left if isinstance(f, EU) else f.body),
                             Or(_up(Var(x), self.fresh("s")), pin)))
            if isinstance(f, EG):
                body = And(LEAF, path)
            else:
                body = And(self.inner(f.right), Or(pin, _up(path, self.fresh("s"))))
        return CountGt(body, f.k)

    def inner(self, f):
        if isinstance(f, GProp):
            return Prop(f.name)
        if isinstance(f, GTrue):
            return TOP
        if isinstance(f, GNot):
            return Not(self.inner(f.body))
        if isinstance(f, GOr):
            return Or(self.inner(f.left), self.inner(f.right))
        if isinstance(f, GAnd):
            return And(self.inner(f.left), self.inner(f.right))
        if f.k == 0:
            return self.exists(f)
        return self.counted(f)

    def exists(self, f):
        x, s = self.fresh("x"), self.fresh("s")
        some_child = Modal(DN, Mu(s, Or(Var(x), Modal(RT, Var(s)))))
        if isinstance(f, EX):
            return Modal(DN, Mu(s, Or(self.inner(f.body), Modal(RT, Var(s)))))
        if isinstance(f, EG):
            return Mu(x, And(self.inner(f.body), Or(LEAF, some_child)))
        return Mu(x, Or(self.inner(f.right), And(self.inner(f.left), some_child)))

    def counted(self, f):
        """More than k children / paths, without origins.

        p_j: at least j paths start here; s_j: at least j start at this
        child or its right siblings.
        """
        k = f.k
        n = k + 1
        names, bodies = [], []

        def comp(stem, body=None):
            names.append(self.fresh(stem))
            bodies.append(body)
            return len(names) - 1

        if isinstance(f, EX):
            y = Var(names[comp("y", self.inner(f.body))])
            d = [comp("d") for _ in range(n)]
            for i in range(n):
                here = y if i == 0 else And(y, Modal(RT, Var(names[d[i - 1]])))
                bodies[d[i]] = Or(here, Modal(RT, Var(names[d[i]])))
            return MuVec(tuple(names), tuple(bodies), Modal(DN, Var(names[d[-1]])))

        if isinstance(f, EG):
            yf = Var(names[comp("y", self.inner(f.body))])
            yg = None
        else:
            yf = Var(names[comp("y", self.inner(f.left))])
            yg = Var(names[comp("y", self.inner(f.right))])
        p = [None] + [comp("p") for _ in range(n)]
        s = [None] + [comp("s") for _ in range(n)]
        P = lambda j: Var(names[p[j]])
        S = lambda j: Var(names[s[j]])
        for j in range(1, n + 1):
            if isinstance(f, EG):
                down = Modal(DN, S(j))
                bodies[p[j]] = And(yf, Or(LEAF, down) if j == 1 else down)
            else:
                more = And(yf, Modal(DN, S(j)))
                here = yg if j == 1 else And(yg, And(yf, Modal(DN, S(j - 1))))
                bodies[p[j]] = Or(here, more)
            alt = Or(P(j), Modal(RT, S(j)))
            for a in range(1, j):
                alt = Or(alt, And(P(a), Modal(RT, S(j - a))))
            bodies[s[j]] = alt
        return MuVec(tuple(names), tuple(bodies), P(n))


def translate_gctl(f, taken=()) -> Formula:
    """A binary-tree formula satisfiable on a tree exactly when ``f`` holds somewhere."""
    if isinstance(f, str):
        f = parse_gctl(f)
    tr = _Translator(set(taken) | gctl_props(f))
    body = tr.top(f)
    for pin in reversed(tr.pins):
        body = And(pin, body)
    return body


@dataclass
class GctlVerdict:
    sat: bool
    witness: KripkeTree | None = None
    formula: Formula | None = None
    stats: dict | None = None

    def __bool__(self):
        return self.sat


def gctl_satisfiable(f, **options) -> GctlVerdict:
    """Is there a finite tree with a node satisfying ``f``?"""
    if isinstance(f, str):
        f = parse_gctl(f)
    g = translate_gctl(f)
    res = satisfiable(g, rooted_tree=True, **options)
    if not res.sat:
        return GctlVerdict(False, formula=g, stats=res.stats.as_dict())
    keep = gctl_props(f)
    t = binary_to_nary(res.kripke.relabel(
        lambda lab: frozenset(x for x in lab if x in keep) or frozenset(["pfresh"])))
    if not eval_gctl(f, t):
        raise AssertionError(f"solver witness rejected by eval_gctl:\n{t}")
    return GctlVerdict(True, t, formula=g, stats=res.stats.as_dict())
