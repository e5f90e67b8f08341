"""Seeded random generators for formulas, trees and frontend inputs.

Used by the property tests and the acceptance suite.  Every generator takes a
``random.Random`` so corpora are reproducible from one seed.
"""
from __future__ import annotations

import random

from .formula import (
    TOP,
    And,
    CountGt,
    CountLe,
    Formula,
    Modal,
    Modality,
    Mu,
    Not,
    Or,
    Prop,
    Var,
    is_wellformed,
)


def ast_nodes(f: Formula) -> int:
    """Number of constructors in the formula tree (shared subterms counted again)."""
    return 1 + sum(ast_nodes(c) for c in f.children)


def count_atoms(f: Formula) -> int:
    return (1 if isinstance(f, (CountGt, CountLe)) else 0) + sum(count_atoms(c) for c in f.children)


class FormulaGen:
    """Random well-formed formulas within a constructor budget.

    Variables are only placed under a modality of their binder's chosen
    direction, so the result is guarded and converse-free by construction;
    a final well-formedness check guards against slips.
    """

    def __init__(self, rng: random.Random, props=("p", "q"), max_nodes=12, max_atoms=3,
                 max_k=3, counting=True, fixpoints=True, modal=True):
        self.rng = rng
        self.props = list(props)
        self.max_nodes = max_nodes
        self.max_atoms = max_atoms
        self.max_k = max_k
        self.counting = counting
        self.fixpoints = fixpoints
        self.modal = modal
        self._n = 0

    def __call__(self) -> Formula:
        while True:
            self._atoms = 0
            self._vars = 0
            budget = self.rng.randint(1, self.max_nodes)
            f = self._gen(budget, env={})
            if ast_nodes(f) <= self.max_nodes and count_atoms(f) <= self.max_atoms and is_wellformed(f):
                return f

    def _gen(self, budget, env):
        rng = self.rng
        # env: var -> (allowed modality set, usable) ; usable only once guarded
        usable = [x for x, (mods, ok) in env.items() if ok]
        if budget <= 1:
            choices = ["prop"] * 4 + ["top"]
            if usable:
                choices += ["var"] * 4
            c = rng.choice(choices)
            if c == "var":
                return Var(rng.choice(usable))
            if c == "top":
                return TOP
            return Prop(rng.choice(self.props))
        kinds = ["not", "and", "or"]
        if self.modal:
            kinds += ["modal"] * 3
        if self.fixpoints and budget >= 3:
            kinds += ["mu"]
        if self.counting and self._atoms < self.max_atoms:
            kinds += ["count"] * 2
        k = rng.choice(kinds)
        if k == "not":
            # variables may not occur negatively: hide them below the negation
            inner = {x: (None, False) for x in env}
            return Not(self._gen(budget - 1, inner))
        if k in ("and", "or"):
            a = rng.randint(1, budget - 2) if budget > 2 else 1
            left = self._gen(a, env)
            right = self._gen(max(1, budget - 1 - a), env)
            return And(left, right) if k == "and" else Or(left, right)
        if k == "modal":
            mods = list(Modality)
            m = rng.choice(mods)
            inner = {}
            for x, (allowed, ok) in env.items():
                if allowed is None:
                    inner[x] = (None, False)  # hidden for good (negation, counting)
                else:
                    inner[x] = (allowed, m in allowed)
            return Modal(m, self._gen(budget - 1, inner))
        if k == "mu":
            self._vars += 1
            x = f"x{self._vars}"
            fwd = rng.random() < 0.5
            allowed = {Modality.DOWN, Modality.RIGHT} if fwd else {Modality.UP, Modality.LEFT}
            # keep outer variables usable only through modalities they allow
            # an outer variable of the other direction would end up under both
            inner = {y: (a, ok) if a == allowed else (None, False) for y, (a, ok) in env.items()}
            inner[x] = (allowed, False)
            # bias towards a recursive shape so the variable actually occurs
            m = rng.choice(sorted(allowed, key=lambda mm: mm.value))
            if budget >= 4 and rng.random() < 0.7:
                rest = self._gen(budget - 3, {y: v for y, v in inner.items() if y != x})
                body = Or(rest, Modal(m, Var(x)))
                return Mu(x, body)
            return Mu(x, self._gen(budget - 1, inner))
        # counting: recursion through a counting body is not generated
        self._atoms += 1
        inner = {x: (None, False) for x in env}
        body = self._gen(budget - 1, inner)
        kval = rng.randint(0, self.max_k)
        return CountGt(body, kval) if rng.random() < 0.5 else CountLe(body, kval)


def random_formula(rng: random.Random, **kw) -> Formula:
    return FormulaGen(rng, **kw)()


def formula_corpus(seed: int, n: int, **kw) -> list:
    rng = random.Random(seed)
    gen = FormulaGen(rng, **kw)
    return [gen() for _ in range(n)]


# ---------------------------------------------------------------------------
# CPath queries


class CPathGen:
    """Random CPath queries; ``depth`` bounds the nesting of paths and qualifiers."""

    AXES = ("dn", "rt", "up", "lf", "dn*", "up*")

    def __init__(self, rng: random.Random, props=("a", "b"), depth=3, max_k=2, set_ops=True):
        self.rng = rng
        self.props = list(props)
        self.depth = depth
        self.max_k = max_k
        self.set_ops = set_ops

    def path(self, d):
        from . import cpath as cp
        rng = self.rng
        r = rng.random()
        if d <= 0 or r < 0.35:
            r2 = rng.random()
            if r2 < 0.05:
                return cp.Top()
            if r2 < 0.25:
                return cp.Axis(rng.choice(self.AXES))
            if r2 < 0.35:
                return cp.PropTest(rng.choice(self.props))
            return cp.AxisProp(rng.choice(self.AXES), rng.choice(self.props))
        if r < 0.7:
            return cp.Compose(self.path(d - 1), self.path(d - 1))
        return cp.Qualified(self.path(d - 1), self.qual(d - 1))

    def qual(self, d):
        from . import cpath as cp
        rng = self.rng
        r = rng.random()
        if d <= 0 or r < 0.6:
            k = 0 if rng.random() < 0.5 else rng.randint(1, self.max_k)
            return cp.QCount(self.path(d - 1), k)
        if r < 0.75:
            return cp.QNot(self.qual(d - 1))
        if r < 0.88:
            return cp.QOr(self.qual(d - 1), self.qual(d - 1))
        return cp.q_and(self.qual(d - 1), self.qual(d - 1))

    def query(self):
        from . import cpath as cp
        rng = self.rng
        r = rng.random()
        if not self.set_ops or r < 0.6:
            q = self.path(self.depth)
        elif r < 0.7:
            q = cp.Rooted(self.path(self.depth - 1))
        else:
            op = rng.choice([cp.Union, cp.Intersection, cp.Difference])
            q = op(self.path(self.depth - 1), self.path(self.depth - 1))
        return q


def cpath_corpus(seed: int, n: int, negatable=False, **kw) -> list:
    """Queries the translation accepts; with ``negatable`` also in negated form."""
    from . import cpath as cp
    rng = random.Random(seed)
    gen = CPathGen(rng, **kw)
    out = []
    while len(out) < n:
        q = gen.query()
        try:
            cp.translate_query(q)
            if negatable:
                cp.containment_formula(q, q)
        except cp.UnsupportedQuery:
            continue
        out.append(q)
    return out


# ---------------------------------------------------------------------------
# CTypes expressions


class CTypeGen:
    """Random closed CTypes expressions, sometimes with explicit recursion."""

    def __init__(self, rng: random.Random, labels=("a", "b"), depth=3, max_k=2):
        self.rng = rng
        self.labels = list(labels)
        self.depth = depth
        self.max_k = max_k
        self._n = 0

    def expr(self, d, scope=()):
        from . import ctypes as ct
        rng = self.rng
        r = rng.random()
        if d <= 0 or r < 0.3:
            r2 = rng.random()
            if scope and r2 < 0.2:
                return ct.TVar(rng.choice(scope))
            if r2 < 0.3:
                return ct.Eps()
            return ct.Labeled(rng.choice(self.labels), ct.Eps())
        if r < 0.45:
            return ct.Concat(self.expr(d - 1, scope), self.expr(d - 1, scope))
        if r < 0.6:
            return ct.Alt(self.expr(d - 1, scope), self.expr(d - 1, scope))
        if r < 0.7:
            self._n += 1
            return ct.star(self.expr(d - 1, scope), f"*{self._n}")
        if r < 0.9:
            lab = rng.choice(self.labels)
            cmp = rng.choice([None, None, ">", "<="])
            k = rng.randint(0, self.max_k) if cmp else 0
            # recursion through '<=' is rejected, so hide the scope there
            inner = () if cmp == "<=" else scope
            return ct.Labeled(lab, self.expr(d - 1, inner), cmp, k)
        self._n += 1
        x = f"x{self._n}"
        # recursion guarded by a label keeps the type regular
        body = ct.Alt(ct.Labeled(rng.choice(self.labels), self.expr(d - 1, scope + (x,))),
                      self.expr(d - 1, scope))
        return ct.LetRec((x,), (body,), self.expr(d - 1, scope + (x,)))

    def __call__(self):
        return self.expr(self.depth)


def ctype_corpus(seed: int, n: int, nonempty_forest=False, **kw) -> list:
    """Closed expressions that parse back from their printed form."""
    from . import ctypes as ct
    rng = random.Random(seed)
    gen = CTypeGen(rng, **kw)
    out = []
    while len(out) < n:
        e = gen()
        try:
            ct.check_monotone(e)
            ct.translate_type(e)
            ct.translate_type_negated(e)
        except ct.UnsupportedType:
            continue
        if nonempty_forest and ct.nullable(e):
            continue
        out.append(e)
    return out


# ---------------------------------------------------------------------------
# GCTL formulas


class GctlGen:
    def __init__(self, rng: random.Random, props=("a", "b"), depth=3, max_k=2, universal=True):
        self.rng = rng
        self.props = list(props)
        self.depth = depth
        self.max_k = max_k
        self.universal = universal

    def formula(self, d):
        from . import gctl as g
        rng = self.rng
        if d <= 0 or rng.random() < 0.25:
            return g.GTrue() if rng.random() < 0.1 else g.GProp(rng.choice(self.props))
        c = rng.randrange(8 if self.universal else 6)
        k = rng.randint(0, self.max_k)
        sub = lambda: self.formula(d - 1)
        if c == 0:
            return g.GNot(sub())
        if c == 1:
            return g.GOr(sub(), sub())
        if c == 2:
            return g.GAnd(sub(), sub())
        if c == 3:
            return g.EX(k, sub())
        if c == 4:
            return g.EG(k, sub())
        if c == 5:
            return g.EU(k, sub(), sub())
        if c == 6:
            return g.AX(k, sub())
        return g.AG(k, sub())

    def __call__(self):
        return self.formula(self.depth)


def gctl_corpus(seed: int, n: int, max_origins=None, **kw) -> list:
    """Random GCTL formulas; ``max_origins`` bounds the nominals of the translation."""
    from . import gctl as g
    from .formula import propositions
    rng = random.Random(seed)
    gen = GctlGen(rng, **kw)
    out = []
    while len(out) < n:
        f = gen()
        if max_origins is not None:
            extra = set(propositions(g.translate_gctl(f))) - g.gctl_props(f)
            if len(extra) > max_origins:
                continue
        out.append(f)
    return out
