"""CTypes: regular tree types with counting constraints on children.

A type denotes a set of forests (sequences of trees).  ``p[e]`` is a tree
whose root carries ``p`` and whose children form a forest of ``e``;
``p[e > k]`` and ``p[e <= k]`` instead count the children whose own subtree
matches ``e``, wherever they sit among their siblings.  A bare name ``p`` is
a leaf, that is ``p[eps]``.

Concrete syntax::

    e := eps | p | $x | e . e | e + e | e* | e+ | e? | (e)
       | p[e] | p[e > k] | p[e <= k]
       | let $x = e, $y = e in e
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from .formula import (
    BOTTOM,
    TOP,
    And,
    CountGt,
    CountLe,
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
    rebuild,
)
from .solver import satisfiable
from .trees import KripkeTree, binary_to_nary

DN, RT, UP, LF = Modality.DOWN, Modality.RIGHT, Modality.UP, Modality.LEFT

MAX_INSTANCES = 400


class CTypeSyntaxError(ValueError):
    def __init__(self, msg, pos, text):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos
        self.text = text


class UnsupportedType(ValueError):
    pass


# ---------------------------------------------------------------------------
# syntax


@dataclass(frozen=True)
class Eps:
    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class TVar:
    name: str

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Concat:
    left: object
    right: object

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Alt:
    left: object
    right: object

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class LetRec:
    vars: tuple
    bodies: tuple
    main: object

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Labeled:
    """``cmp`` is ``None`` for a content model, else ``">"`` or ``"<="``."""
    label: str
    body: object
    cmp: str | None = None
    k: int = 0

    def __str__(self):
        return to_text(self)


def star(e, name):
    return LetRec((name,), (Alt(Concat(e, TVar(name)), Eps()),), TVar(name))


def _star_body(e):
    """``e`` when ``e`` is the desugared form of a star, else ``None``."""
    if isinstance(e, LetRec) and len(e.vars) == 1 and e.main == TVar(e.vars[0]):
        b = e.bodies[0]
        if isinstance(b, Alt) and b.right == Eps() and isinstance(b.left, Concat) \
                and b.left.right == TVar(e.vars[0]) and e.vars[0] not in free_vars(b.left.left):
            return b.left.left
    return None


def free_vars(e) -> set:
    if isinstance(e, TVar):
        return {e.name}
    if isinstance(e, Eps):
        return set()
    if isinstance(e, Labeled):
        return free_vars(e.body)
    if isinstance(e, LetRec):
        inner = free_vars(e.main)
        for b in e.bodies:
            inner |= free_vars(b)
        return inner - set(e.vars)
    return free_vars(e.left) | free_vars(e.right)


def type_size(e) -> int:
    if isinstance(e, (Eps, TVar)):
        return 1
    if isinstance(e, Labeled):
        return 2 + type_size(e.body) + (max(1, e.k.bit_length()) if e.cmp else 0)
    if isinstance(e, LetRec):
        return 1 + len(e.vars) + sum(type_size(b) for b in e.bodies) + type_size(e.main)
    return 1 + type_size(e.left) + type_size(e.right)


def type_labels(e) -> set:
    if isinstance(e, Labeled):
        return {e.label} | type_labels(e.body)
    if isinstance(e, LetRec):
        out = type_labels(e.main)
        for b in e.bodies:
            out |= type_labels(b)
        return out
    if isinstance(e, (Concat, Alt)):
        return type_labels(e.left) | type_labels(e.right)
    return set()


# printing ------------------------------------------------------------------


def to_text(e, prec=0) -> str:
    # prec 0: alternation, 1: concatenation, 2: postfix operand
    s = _star_body(e)
    if s is not None:
        return to_text(s, 2) + "*"
    if isinstance(e, Eps):
        return "eps"
    if isinstance(e, TVar):
        return "$" + e.name
    if isinstance(e, Labeled):
        if e.cmp is None:
            if isinstance(e.body, Eps):
                return e.label
            return f"{e.label}[{to_text(e.body)}]"
        return f"{e.label}[{to_text(e.body)} {e.cmp} {e.k}]"
    if isinstance(e, Alt):
        out = f"{to_text(e.left, 0)} + {to_text(e.right, 1)}"
        return f"({out})" if prec > 0 else out
    if isinstance(e, Concat):
        out = f"{to_text(e.left, 1)} . {to_text(e.right, 2)}"
        return f"({out})" if prec > 1 else out
    if isinstance(e, LetRec):
        binds = ", ".join(f"${x} = {to_text(b)}" for x, b in zip(e.vars, e.bodies))
        out = f"let {binds} in {to_text(e.main)}"
        return f"({out})" if prec > 0 else out
    raise TypeError(f"not a type: {e!r}")


# parsing -------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<var>\$[A-Za-z_][A-Za-z0-9_]*)|(?P<num>\d+)"
                    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op><=|[.+*?()\[\]>=,]))")
_STARTS = {"name", "var"}


def _tokenize(text):
    toks, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise CTypeSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
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
        self.stars = 0

    def peek(self, d=0):
        return self.toks[min(self.i + d, len(self.toks) - 1)]

    def at(self, val):
        k, v, _ = self.peek()
        return k in ("op", "name") and v == val

    def take(self, val=None):
        t = self.peek()
        if val is not None and not self.at(val):
            self.fail(f"expected {val!r}")
        self.i += 1
        return t

    def fail(self, msg, pos=None):
        t = self.peek()
        got = "end of input" if t[0] == "end" else repr(t[1])
        raise CTypeSyntaxError(f"{msg}, got {got}", t[2] if pos is None else pos, self.text)

    def starts_expr(self, d=0):
        k, v, _ = self.peek(d)
        return k in _STARTS or (k == "op" and v == "(")

    def fresh(self):
        # not a legal user variable, so it cannot capture one
        self.stars += 1
        return f"*{self.stars}"

    def expr(self):
        if self.at("let"):
            return self.let()
        e = self.concat()
        while self.at("+") and (self.starts_expr(1) or self.peek(1)[1] == "let"):
            self.take()
            if self.at("let"):
                e = Alt(e, self.let())
                break
            e = Alt(e, self.concat())
        return e

    def let(self):
        self.take("let")
        binds, bodies = [], []
        while True:
            k, v, pos = self.peek()
            if k != "var":
                self.fail("expected a $variable")
            self.take()
            if v[1:] in binds:
                raise CTypeSyntaxError(f"duplicate variable {v}", pos, self.text)
            binds.append(v[1:])
            self.take("=")
            bodies.append(self.expr())
            if not self.at(","):
                break
            self.take()
        self.take("in")
        return LetRec(tuple(binds), tuple(bodies), self.expr())

    def concat(self):
        e = self.postfix()
        while self.at("."):
            self.take()
            e = Concat(e, self.postfix())
        return e

    def postfix(self):
        e = self.atom()
        while True:
            if self.at("*"):
                self.take()
                e = star(e, self.fresh())
            elif self.at("?"):
                self.take()
                e = Alt(Eps(), e)
            elif self.at("+") and not (self.starts_expr(1) or self.peek(1)[1] == "let"):
                self.take()
                e = Concat(e, star(e, self.fresh()))
            else:
                return e

    def atom(self):
        k, v, pos = self.peek()
        if k == "op" and v == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if k == "var":
            self.take()
            return TVar(v[1:])
        if k == "name":
            if v in ("let", "in"):
                self.fail("unexpected keyword")
            self.take()
            if v == "eps":
                return Eps()
            if self.at("["):
                self.take()
                body = self.expr()
                cmp, bound = None, 0
                if self.at(">") or self.at("<="):
                    cmp = self.take()[1]
                    kk, vv, _ = self.peek()
                    if kk != "num":
                        self.fail("expected a number")
                    self.take()
                    bound = int(vv)
                self.take("]")
                return Labeled(v, body, cmp, bound)
            return Labeled(v, Eps())
        self.fail("expected a type")


def parse_ctype(text: str):
    p = _Parser(text)
    e = p.expr()
    if p.peek()[0] != "end":
        p.fail("unexpected input")
    free = free_vars(e)
    if free:
        name = "$" + sorted(free)[0]
        raise CTypeSyntaxError(f"free variable {name}", text.find(name), text)
    check_monotone(e)
    return e


def check_monotone(e):
    """Reject a recursive variable used inside a ``<=`` count it helps define.

    Such a constraint shrinks as the variable grows, so the least fixpoint
    of the definition need not exist.
    """
    def go(g, defining):
        # defining: variables whose definition we are inside
        if isinstance(g, Labeled):
            if g.cmp == "<=":
                bad = free_vars(g.body) & _reaching(defining, g)
                if bad:
                    raise UnsupportedType(f"variable ${sorted(bad)[0]} recurses through a '<=' count")
            go(g.body, defining)
        elif isinstance(g, LetRec):
            deps = {x: free_vars(b) for x, b in zip(g.vars, g.bodies)}
            for x, b in zip(g.vars, g.bodies):
                go(b, defining + [(x, deps)])
            go(g.main, defining)
        elif isinstance(g, (Concat, Alt)):
            go(g.left, defining)
            go(g.right, defining)

    def _reaching(defining, atom):
        # variables whose value depends on the definition we are inside
        inside = {x for x, _ in defining}
        out = set()
        for x, deps in defining:
            seen, todo = set(), [y for y in deps if y in deps]
            reach = set()
            frontier = {x}
            while frontier:
                y = frontier.pop()
                for z, dz in deps.items():
                    if y in dz and z not in reach:
                        reach.add(z)
                        frontier.add(z)
            out |= reach | ({x} if x in inside else set())
        return out

    go(e, [])


# ---------------------------------------------------------------------------
# direct semantics


def _kids(t: KripkeTree, c: int) -> tuple:
    out = []
    j = t.first_child[c]
    while j >= 0:
        out.append(j)
        j = t.next_sibling[j]
    return tuple(out)


class _Member:
    """Slices of sibling lists: ``(list id, i, j)``; list id -1 is the top forest."""

    def __init__(self, t: KripkeTree):
        self.t = t
        if t.form == "nary":
            top = (t.root,)
        else:
            top = [t.root]
            while t.next_sibling[top[-1]] >= 0:
                top.append(t.next_sibling[top[-1]])
            top = tuple(top)
        self.lists = {-1: top}
        for c in t.nodes:
            self.lists[c] = _kids(t, c)
        self._lets: dict = {}
        self.slices = [(l, i, j) for l, xs in self.lists.items()
                       for i in range(len(xs) + 1) for j in range(i, len(xs) + 1)]

    def matches(self, e, sl, env, memo):
        key = (id(e), sl)
        hit = memo.get(key)
        if hit is not None:
            return hit
        memo[key] = False  # guards against ill-founded recursion within one pass
        r = self._matches(e, sl, env, memo)
        memo[key] = r
        return r

    def _matches(self, e, sl, env, memo):
        l, i, j = sl
        if isinstance(e, Eps):
            return i == j
        if isinstance(e, TVar):
            return sl in env[e.name]
        if isinstance(e, Alt):
            return self.matches(e.left, sl, env, memo) or self.matches(e.right, sl, env, memo)
        if isinstance(e, Concat):
            return any(self.matches(e.left, (l, i, m), env, memo) and self.matches(e.right, (l, m, j), env, memo)
                       for m in range(i, j + 1))
        if isinstance(e, Labeled):
            if j != i + 1:
                return False
            c = self.lists[l][i]
            if e.label not in self.t.labels[c]:
                return False
            kids = self.lists[c]
            if e.cmp is None:
                return self.matches(e.body, (c, 0, len(kids)), env, memo)
            n = sum(self.matches(e.body, (c, x, x + 1), env, memo) for x in range(len(kids)))
            return n > e.k if e.cmp == ">" else n <= e.k
        if isinstance(e, LetRec):
            key = (id(e), frozenset(env.items()))
            hit = self._lets.get(key)
            if hit is None:
                hit = self._lets[key] = (self.lfp(e, env), {})
            inner, inner_memo = hit
            return self.matches(e.main, sl, inner, inner_memo)
        raise TypeError(f"not a type: {e!r}")

    def lfp(self, e: LetRec, env):
        cur = dict(env)
        for x in e.vars:
            cur[x] = frozenset()
        for _ in range(len(self.slices) * len(e.vars) + 2):
            memo: dict = {}
            nxt = dict(cur)
            for x, b in zip(e.vars, e.bodies):
                nxt[x] = frozenset(s for s in self.slices if self.matches(b, s, cur, memo))
            if all(nxt[x] == cur[x] for x in e.vars):
                return cur
            cur = nxt
        raise UnsupportedType("let definition has no least fixpoint")


def member(t: KripkeTree | None, e) -> bool:
    """Does the forest of ``t`` belong to the type?

    An n-ary tree is a forest of one tree; a binary tree stands for the
    forest made of its root and the root's right siblings; ``None`` is the
    empty forest.
    """
    if isinstance(e, str):
        e = parse_ctype(e)
    if t is None:
        return nullable(e)
    m = _Member(t)
    return m.matches(e, (-1, 0, len(m.lists[-1])), {}, {})


# ---------------------------------------------------------------------------
# static analysis


def _rename_apart(e):
    """Give every let variable a unique name; returns (expr, defs)."""
    defs: dict = {}
    counter = itertools.count(1)

    def go(g, env):
        if isinstance(g, TVar):
            return TVar(env[g.name])
        if isinstance(g, Eps):
            return g
        if isinstance(g, Labeled):
            return Labeled(g.label, go(g.body, env), g.cmp, g.k)
        if isinstance(g, LetRec):
            names = [f"v{next(counter)}" for _ in g.vars]
            env2 = {**env, **dict(zip(g.vars, names))}
            for n, b in zip(names, g.bodies):
                defs[n] = None
            for n, b in zip(names, g.bodies):
                defs[n] = go(b, env2)
            return LetRec(tuple(names), tuple(defs[n] for n in names), go(g.main, env2))
        return type(g)(go(g.left, env), go(g.right, env))

    return go(e, {}), defs


def _lfp_bool(defs, fn):
    val = {x: False for x in defs}
    while True:
        nxt = {x: fn(b, val) for x, b in defs.items()}
        if nxt == val:
            return val
        val = nxt


def _nullable(e, val) -> bool:
    if isinstance(e, Eps):
        return True
    if isinstance(e, TVar):
        return val.get(e.name, False)
    if isinstance(e, Labeled):
        return False
    if isinstance(e, Alt):
        return _nullable(e.left, val) or _nullable(e.right, val)
    if isinstance(e, Concat):
        return _nullable(e.left, val) and _nullable(e.right, val)
    if isinstance(e, LetRec):
        inner = dict(val)
        local = _lfp_bool(dict(zip(e.vars, e.bodies)), lambda b, v: _nullable(b, {**inner, **v}))
        return _nullable(e.main, {**inner, **local})
    raise TypeError(type(e))


def nullable(e) -> bool:
    """Does the type accept the empty forest?"""
    if isinstance(e, str):
        e = parse_ctype(e)
    return _nullable(e, {})


# ---------------------------------------------------------------------------
# translation
#
# Seq(e, R, E) holds at node n when the sibling sequence n, n+1, ... splits
# into a prefix in e and a rest such that R holds at the first node of the
# rest, or, when the rest is empty, E is true.  Recursion and shared
# continuations become components of one vector fixpoint.


def _bot(f):
    return f == BOTTOM


def _or(a, b):
    if _bot(a):
        return b
    if _bot(b):
        return a
    return Or(a, b)


def _and(a, b):
    if _bot(a) or _bot(b):
        return BOTTOM
    if a is TOP:
        return b
    if b is TOP:
        return a
    return And(a, b)


def _dia(m, f):
    return BOTTOM if _bot(f) else Modal(m, f)


END = Not(Modal(RT, TOP))
LEAF = Not(Modal(DN, TOP))


class _Translator:
    def __init__(self, e, taken=()):
        self.expr, self.defs = _rename_apart(e)
        self.null = _lfp_bool(self.defs, lambda b, v: _nullable(b, v))
        self.taken = set(taken) | type_labels(e)
        self.origins: list = []
        self.names: list = []
        self.bodies: dict = {}
        self.inst: dict = {}
        self.shared: dict = {}
        self._mu = itertools.count(1)
        self._singles = None

    # helpers
    def nullable(self, e):
        return _nullable(e, self.null)

    def component(self, body=None, prefix="k"):
        name = fresh_name(f"{prefix}{len(self.names) + 1}", self.taken)
        self.taken.add(name)
        self.names.append(name)
        self.bodies[name] = body
        if len(self.names) > MAX_INSTANCES:
            raise UnsupportedType("type is not regular (unbounded continuations)")
        return name

    def share(self, f):
        if isinstance(f, (Var, Prop)) or f is TOP or _bot(f):
            return f
        name = self.shared.get(f)
        if name is None:
            name = self.component(f)
            self.shared[f] = name
        return Var(name)

    def origin(self):
        o = fresh_name(f"o{len(self.origins) + 1}", self.taken)
        self.taken.add(o)
        self.origins.append(o)
        return o

    # sequences
    def seq(self, e, r, end, single):
        if isinstance(e, Eps):
            return r if not _bot(r) or True else r
        if isinstance(e, Labeled):
            after = _dia(RT, r)
            if end:
                after = _or(after, END)
            return _and(self.atom(e, single), after)
        if isinstance(e, Alt):
            return _or(self.seq(e.left, r, end, single), self.seq(e.right, r, end, single))
        if isinstance(e, Concat):
            rest = self.share(self.seq(e.right, r, end, single))
            return self.seq(e.left, rest, end and self.nullable(e.right), single)
        if isinstance(e, TVar):
            key = (e.name, r, end)
            name = self.inst.get(key)
            if name is None:
                name = self.component(None, prefix="x")
                self.inst[key] = name
                # recursion: every visit may match a different node
                self.bodies[name] = self.seq(self.defs[e.name], r, end, False)
            return Var(name)
        if isinstance(e, LetRec):
            return self.seq(e.main, r, end, single)
        raise TypeError(f"not a type: {e!r}")

    def singles(self, e):
        """Atoms ``a`` such that the one-tree forest [a] can match ``e``."""
        if self._singles is None:
            val = {x: frozenset() for x in self.defs}
            while True:
                nxt = {x: frozenset(self._single_atoms(b, val)) for x, b in self.defs.items()}
                if nxt == val:
                    break
                val = nxt
            self._singles = val
        return self._single_atoms(e, self._singles)

    def _single_atoms(self, e, val):
        if isinstance(e, Eps):
            return set()
        if isinstance(e, Labeled):
            return {e}
        if isinstance(e, TVar):
            return set(val[e.name])
        if isinstance(e, Alt):
            return self._single_atoms(e.left, val) | self._single_atoms(e.right, val)
        if isinstance(e, Concat):
            out = set()
            if self.nullable(e.left):
                out |= self._single_atoms(e.right, val)
            if self.nullable(e.right):
                out |= self._single_atoms(e.left, val)
            return out
        if isinstance(e, LetRec):
            return self._single_atoms(e.main, val)
        raise TypeError(type(e))

    def tree(self, e):
        """Holds at a node whose subtree alone is a forest of ``e``."""
        out = BOTTOM
        for a in sorted(self.singles(e), key=to_text):
            out = _or(out, self.atom(a, False))
        return out

    # atoms
    def children(self, e):
        part = _dia(DN, self.seq(e.body, BOTTOM, True, False))
        return _or(LEAF, part) if self.nullable(e.body) else part

    def counted(self, e, single):
        """(formula, pinned) for the counting constraint of ``e``."""
        t = self.tree(e.body)
        if single:
            body = self.close(t, strict=False)
            if body is not None:
                o = Prop(self.origin())
                pin = And(o, exactly_one(o))
                x = f"u{next(self._mu)}"
                up = Mu(x, Or(Modal(UP, pin), Modal(LF, Var(x))))
                cnt = (CountGt if e.cmp == ">" else CountLe)(And(body, up), e.k)
                return pin, cnt
        if e.cmp == ">":
            return None, _dia(DN, self.more_than(t, e.k))
        return None, Not(self.close(_dia(DN, self.more_than(t, e.k)), strict=True))

    def more_than(self, psi, k):
        """At a node: more than k of it and its right siblings satisfy psi."""
        psi = self.share(psi)
        prev = None
        for i in range(k + 1):
            x = f"d{next(self._mu)}"
            hit = psi if prev is None else _and(psi, Modal(RT, prev))
            prev = Mu(x, _or(hit, Modal(RT, Var(x))))
        return prev

    def atom(self, e: Labeled, single):
        p = Prop(e.label)
        if e.cmp is None:
            return _and(p, self.children(e))
        pin, cnt = self.counted(e, single)
        return _and(p, cnt if pin is None else And(pin, cnt))

    def negated_atom(self, e: Labeled):
        """Holds at a node that is not a tree of the atom ``e`` (closed)."""
        p = Prop(e.label)
        if e.cmp is None:
            return Or(Not(p), Not(self.close(self.children(e), strict=True)))
        pin, cnt = self.counted(e, True)
        if pin is None:
            return Or(Not(p), Not(self.close(cnt, strict=True)))
        return Or(Not(p), And(pin, Not(cnt)))

    # closing
    def close(self, f, strict=True):
        """Bind the components ``f`` needs; ``None`` (or an error) if one is unfinished."""
        need, todo = [], list(f.free_vars)
        seen = set()
        while todo:
            x = todo.pop()
            if x in seen:
                continue
            seen.add(x)
            b = self.bodies.get(x)
            if b is None:
                if x in self.bodies:
                    if strict:
                        raise UnsupportedType("a '<=' count depends on the recursion it belongs to")
                    return None
                continue
            need.append(x)
            todo.extend(b.free_vars)
        if not need:
            return f
        order = [x for x in self.names if x in seen]
        names, bodies, main = _eliminate_unguarded(order, [self.bodies[x] for x in order], f)
        return MuVec(tuple(names), tuple(bodies), main)


def _unguarded_subst(f, name, repl):
    """Replace occurrences of Var(name) that are not under a modality."""
    if isinstance(f, Var):
        return repl if f.name == name else f
    if isinstance(f, (Modal, CountGt, CountLe)) or not f.children:
        return f
    if isinstance(f, Mu) and f.var == name:
        return f
    if isinstance(f, MuVec) and name in f.vars:
        return f
    return rebuild(f, [_unguarded_subst(c, name, repl) for c in f.children])


def _eliminate_unguarded(names, bodies, main):
    """Remove unguarded recursion from a vector fixpoint, keeping its meaning.

    One variable at a time: its unguarded self references contribute nothing
    to a least fixpoint, and its other unguarded uses are unfolded once.
    """
    bodies = list(bodies)
    for i, x in enumerate(names):
        bodies[i] = _unguarded_subst(bodies[i], x, BOTTOM)
        for j in range(len(bodies)):
            if j != i:
                bodies[j] = _unguarded_subst(bodies[j], x, bodies[i])
        main = _unguarded_subst(main, x, bodies[i])
    return names, bodies, main


def _coerce(e):
    return parse_ctype(e) if isinstance(e, str) else e


def translate_type(e, taken=()) -> Formula:
    """F(e): holds at a node whose sibling sequence (from it on) is a forest of e."""
    e = _coerce(e)
    tr = _Translator(e, taken)
    return tr.close(tr.seq(tr.expr, BOTTOM, True, True))


def translate_type_negated(e, taken=()) -> Formula:
    """F'(e): holds at a node whose sibling sequence is not a forest of e."""
    e = _coerce(e)
    tr = _Translator(e, taken)
    return _negated(tr)


def _negated(tr):
    # a one-tree forest is pinned at this node, so its counts may use origins
    one = TOP
    for a in sorted(tr.singles(tr.expr), key=to_text):
        one = _and(one, tr.negated_atom(a))
    more = Not(tr.close(tr.seq(tr.expr, BOTTOM, True, False)))
    return And(Or(Modal(RT, TOP), one), Or(END, more))


ROOT = And(Not(Modal(UP, TOP)), Not(Modal(LF, TOP)))


# ---------------------------------------------------------------------------
# reasoning


@dataclass
class TypeVerdict:
    holds: bool
    counterexample: KripkeTree | None = None
    empty_forest: bool = False
    formula: Formula | None = None
    stats: dict | None = None

    def __bool__(self):
        return self.holds


def _clean(t: KripkeTree, keep: set) -> KripkeTree:
    t = t.relabel(lambda lab: frozenset(x for x in lab if x in keep) or frozenset(["pfresh"]))
    if t.next_sibling[t.root] < 0:
        return binary_to_nary(t)
    return t


def _solve(f, keep, check, options):
    res = satisfiable(f, **options)
    if not res.sat:
        return TypeVerdict(True, formula=f, stats=res.stats.as_dict())
    t = _clean(res.kripke, keep)
    if not check(t):
        raise AssertionError(f"solver witness rejected by member:\n{t}")
    return TypeVerdict(False, t, formula=f, stats=res.stats.as_dict())


def type_empty(e, **options) -> TypeVerdict:
    """Is the type empty?  Otherwise a member forest is returned."""
    e = _coerce(e)
    if nullable(e):
        return TypeVerdict(False, None, empty_forest=True)
    f = And(ROOT, translate_type(e))
    return _solve(f, type_labels(e), lambda t: member(t, e), options)


def type_contained(e1, e2, **options) -> TypeVerdict:
    """Is every forest of e1 a forest of e2?"""
    e1, e2 = _coerce(e1), _coerce(e2)
    if nullable(e1) and not nullable(e2):
        return TypeVerdict(False, None, empty_forest=True)
    labels = type_labels(e1) | type_labels(e2)
    f = containment_formula(e1, e2)
    return _solve(f, labels, lambda t: member(t, e1) and not member(t, e2), options)


def containment_formula(e1, e2) -> Formula:
    e1, e2 = _coerce(e1), _coerce(e2)
    labels = type_labels(e1) | type_labels(e2)
    t1 = _Translator(e1, labels)
    f1 = t1.close(t1.seq(t1.expr, BOTTOM, True, True))
    t2 = _Translator(e2, t1.taken)
    return And(ROOT, And(f1, _negated(t2)))


def type_equiv(e1, e2, **options) -> TypeVerdict:
    v = type_contained(e1, e2, **options)
    if not v:
        return v
    return type_contained(e2, e1, **options)
