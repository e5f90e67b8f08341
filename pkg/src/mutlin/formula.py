"""Formula AST for the tree mu-calculus with global counting.

Formulas are hash-consed: building the same formula twice returns the same
object, so equality is identity and hashing is O(1).  This matters because
the solver memoizes heavily on formulas.
"""
from __future__ import annotations

import enum
import itertools
import re
import threading
import weakref
from dataclasses import dataclass

INT64_MAX = 2**63 - 1


class Modality(enum.Enum):
    DOWN = "dn"
    RIGHT = "rt"
    UP = "up"
    LEFT = "lf"

    @property
    def inverse(self) -> "Modality":
        return _INVERSE[self]

    @property
    def forward(self) -> bool:
        return self in (Modality.DOWN, Modality.RIGHT)

    def __repr__(self):
        return f"<{self.value}>"


_INVERSE = {
    Modality.DOWN: Modality.UP,
    Modality.UP: Modality.DOWN,
    Modality.RIGHT: Modality.LEFT,
    Modality.LEFT: Modality.RIGHT,
}
MODALITIES = (Modality.DOWN, Modality.RIGHT, Modality.UP, Modality.LEFT)

_table: "weakref.WeakValueDictionary" = weakref.WeakValueDictionary()
_lock = threading.Lock()
_serial = itertools.count()


class Formula:
    """Base class. Subclasses declare ``_fields``; instances are interned."""

    _fields: tuple = ()

    def __new__(cls, *args):
        key = (cls,) + args
        obj = _table.get(key)
        if obj is not None:
            return obj
        with _lock:
            obj = _table.get(key)
            if obj is None:
                obj = object.__new__(cls)
                for name, value in zip(cls._fields, args):
                    object.__setattr__(obj, name, value)
                object.__setattr__(obj, "serial", next(_serial))
                _table[key] = obj
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("formulas are immutable")

    def __getnewargs__(self):
        return tuple(getattr(self, f) for f in self._fields)

    def __reduce__(self):
        return (self.__class__, self.__getnewargs__())

    @property
    def children(self) -> tuple:
        return ()

    def _cached(self, name, compute):
        try:
            return self.__dict__[name]
        except KeyError:
            value = compute()
            object.__setattr__(self, name, value)
            return value

    @property
    def free_vars(self) -> frozenset:
        return self._cached("_fv", self._free_vars)

    def _free_vars(self):
        return frozenset().union(*(c.free_vars for c in self.children))

    @property
    def closed(self) -> bool:
        return not self.free_vars

    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"{type(self).__name__}({to_text(self)!r})"

    # operator sugar, handy in tests and frontends
    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


class Prop(Formula):
    _fields = ("name",)


class Var(Formula):
    _fields = ("name",)

    def _free_vars(self):
        return frozenset((self.name,))


class Top(Formula):
    _fields = ()


class Not(Formula):
    _fields = ("body",)

    @property
    def children(self):
        return (self.body,)


class Or(Formula):
    _fields = ("left", "right")

    @property
    def children(self):
        return (self.left, self.right)


class And(Formula):
    _fields = ("left", "right")

    @property
    def children(self):
        return (self.left, self.right)


class Modal(Formula):
    _fields = ("mod", "body")

    @property
    def children(self):
        return (self.body,)


class Mu(Formula):
    _fields = ("var", "body")

    @property
    def children(self):
        return (self.body,)

    def _free_vars(self):
        return self.body.free_vars - {self.var}


class MuVec(Formula):
    """Vector least fixpoint ``let x1 = b1, ..., xn = bn in main``."""

    _fields = ("vars", "bodies", "main")

    @property
    def children(self):
        return self.bodies + (self.main,)

    def _free_vars(self):
        inner = frozenset().union(*(c.free_vars for c in self.children))
        return inner - set(self.vars)

    def component(self, i: int) -> "MuVec":
        return MuVec(self.vars, self.bodies, Var(self.vars[i]))


class CountGt(Formula):
    _fields = ("body", "k")

    @property
    def children(self):
        return (self.body,)


class CountLe(Formula):
    _fields = ("body", "k")

    @property
    def children(self):
        return (self.body,)


COUNTING = (CountGt, CountLe)
TOP = Top()
BOTTOM = Not(TOP)


def _check_k(k: int) -> int:
    if not isinstance(k, int) or k < 0:
        raise ValueError(f"counting bound must be a non-negative integer, got {k!r}")
    if k > INT64_MAX:
        raise OverflowError(f"counting bound {k} exceeds 64-bit range")
    return k


def count_gt(body: Formula, k: int) -> CountGt:
    return CountGt(body, _check_k(k))


def count_le(body: Formula, k: int) -> CountLe:
    return CountLe(body, _check_k(k))


def dia(mod: Modality, body: Formula = TOP) -> Modal:
    return Modal(mod, body)


def conj(*fs: Formula) -> Formula:
    fs = [f for f in fs if f is not TOP]
    if not fs:
        return TOP
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = And(f, out)
    return out


def disj(*fs: Formula) -> Formula:
    fs = [f for f in fs if f is not BOTTOM]
    if not fs:
        return BOTTOM
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = Or(f, out)
    return out


def exactly_one(p: Formula) -> Formula:
    """``p = 1``: ``p`` holds at exactly one node of the tree."""
    return And(count_le(p, 1), count_gt(p, 0))


# ---------------------------------------------------------------------------
# traversal helpers


def subformulas(f: Formula):
    """All syntactic subformulas, parents before children, without repeats."""
    seen = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        yield g
        stack.extend(reversed(g.children))


def propositions(f: Formula) -> list:
    """Proposition names in first-occurrence order."""
    out = []
    for g in subformulas(f):
        if isinstance(g, Prop) and g.name not in out:
            out.append(g.name)
    return out


def bound_names(f: Formula) -> set:
    names = set()
    for g in subformulas(f):
        if isinstance(g, Mu):
            names.add(g.var)
        elif isinstance(g, MuVec):
            names.update(g.vars)
        elif isinstance(g, Var):
            names.add(g.name)
    return names


def fresh_name(base: str, taken) -> str:
    if base not in taken:
        return base
    for i in itertools.count(1):
        cand = f"{base}_{i}"
        if cand not in taken:
            return cand


def fresh_prop(base: str, f_or_names) -> str:
    taken = set(f_or_names) if not isinstance(f_or_names, Formula) else set(propositions(f_or_names))
    return fresh_name(base, taken)


def rebuild(f: Formula, kids) -> Formula:
    """Same node type as ``f`` with replaced children."""
    if isinstance(f, (Prop, Var, Top)):
        return f
    if isinstance(f, Not):
        return Not(kids[0])
    if isinstance(f, Or):
        return Or(kids[0], kids[1])
    if isinstance(f, And):
        return And(kids[0], kids[1])
    if isinstance(f, Modal):
        return Modal(f.mod, kids[0])
    if isinstance(f, Mu):
        return Mu(f.var, kids[0])
    if isinstance(f, MuVec):
        n = len(f.vars)
        return MuVec(f.vars, tuple(kids[:n]), kids[n])
    if isinstance(f, CountGt):
        return CountGt(kids[0], f.k)
    if isinstance(f, CountLe):
        return CountLe(kids[0], f.k)
    raise TypeError(type(f))


# ---------------------------------------------------------------------------
# substitution


def substitute(f: Formula, mapping: dict) -> Formula:
    """Capture-avoiding simultaneous substitution of free variables."""
    mapping = {v: g for v, g in mapping.items() if v in f.free_vars}
    if not mapping:
        return f
    if isinstance(f, Var):
        return mapping.get(f.name, f)
    if isinstance(f, Mu):
        inner = {v: g for v, g in mapping.items() if v != f.var}
        repl_fv = frozenset().union(*(g.free_vars for g in inner.values()))
        var, body = f.var, f.body
        if var in repl_fv:
            new = fresh_name(var, repl_fv | body.free_vars | bound_names(body))
            body = substitute(body, {var: Var(new)})
            var = new
        return Mu(var, substitute(body, inner))
    if isinstance(f, MuVec):
        inner = {v: g for v, g in mapping.items() if v not in f.vars}
        repl_fv = frozenset().union(*(g.free_vars for g in inner.values()))
        vars_, bodies, main = f.vars, f.bodies, f.main
        clash = [v for v in vars_ if v in repl_fv]
        if clash:
            taken = set(repl_fv) | bound_names(f)
            ren = {}
            for v in clash:
                ren[v] = fresh_name(v, taken)
                taken.add(ren[v])
            rmap = {v: Var(n) for v, n in ren.items()}
            vars_ = tuple(ren.get(v, v) for v in vars_)
            bodies = tuple(substitute(b, rmap) for b in bodies)
            main = substitute(main, rmap)
        return MuVec(vars_, tuple(substitute(b, inner) for b in bodies), substitute(main, inner))
    return rebuild(f, [substitute(c, mapping) for c in f.children])


def unfold(f: Formula) -> Formula:
    """One-step fixpoint unfolding of a ``Mu`` or ``MuVec``."""
    if isinstance(f, Mu):
        return substitute(f.body, {f.var: f})
    if isinstance(f, MuVec):
        comps = {v: f.component(i) for i, v in enumerate(f.vars)}
        main = f.main
        if isinstance(main, Var) and main.name in f.vars:
            main = f.bodies[f.vars.index(main.name)]
        return substitute(main, comps)
    raise TypeError(f"not a fixpoint: {f!r}")


def rename_apart(f: Formula) -> Formula:
    """Rename binders so that no variable name is bound twice."""
    used: set = set(f.free_vars)

    def go(g, env):
        if isinstance(g, Var):
            return Var(env.get(g.name, g.name))
        if isinstance(g, Mu):
            new = fresh_name(g.var, used)
            used.add(new)
            return Mu(new, go(g.body, {**env, g.var: new}))
        if isinstance(g, MuVec):
            env2 = dict(env)
            names = []
            for v in g.vars:
                new = fresh_name(v, used)
                used.add(new)
                env2[v] = new
                names.append(new)
            return MuVec(tuple(names), tuple(go(b, env2) for b in g.bodies), go(g.main, env2))
        return rebuild(g, [go(c, env) for c in g.children])

    return go(f, {})


# ---------------------------------------------------------------------------
# well-formedness


@dataclass(frozen=True)
class Violation:
    kind: str
    path: tuple
    subterm: Formula

    def __str__(self):
        return f"{self.kind} at {list(self.path)}: {to_text(self.subterm)}"


UNBOUND = "unbound variable"
UNGUARDED = "unguarded variable"
CONVERSE = "variable under modality and its converse"
NEGATIVE = "variable occurs negatively"
UNGUARDED_CYCLE = "unguarded cycle between vector fixpoint variables"


def check_wellformed(f: Formula) -> list:
    """Return every violation of the syntactic restrictions (empty = ok)."""
    out: list = []
    seen_mods: dict = {}
    keep = []

    def mark():
        return {t: len(occ) for t, occ in seen_mods.items()}

    def converse(st, binder, path, before):
        occ = seen_mods.pop(st[4])
        keep.append(st)
        used = set().union(*(m for m, _ in occ)) if occ else set()
        if any(m.inverse in used for m in used):
            out.append(Violation(CONVERSE, path, binder))
        # unfolding this binder wraps its modalities around outer variables in its scope
        for t, n in before.items():
            if t in seen_mods:
                for mods, _ in seen_mods[t][n:]:
                    mods |= used

    # env maps a bound name to its binder state: (guarded, modalities, negative, owner)
    def go(g, path, env):
        if isinstance(g, Var):
            st = env.get(g.name)
            if st is None:
                out.append(Violation(UNBOUND, path, g))
                return
            guarded, mods, neg, kind, _ = st
            if not guarded and kind == "mu":
                out.append(Violation(UNGUARDED, path, g))
            seen_mods[st[4]].append((set(mods), path))
            if neg:
                out.append(Violation(NEGATIVE, path, g))
            return
        if isinstance(g, Mu):
            env2 = dict(env)
            st = env2[g.var] = (False, frozenset(), False, "mu", object())
            before = mark()
            seen_mods[st[4]] = []
            go(g.body, path + (0,), env2)
            converse(st, g, path, before)
            return
        if isinstance(g, MuVec):
            env2 = dict(env)
            states = []
            before = mark()
            for v in g.vars:
                st = env2[v] = (False, frozenset(), False, "vec", object())
                seen_mods[st[4]] = []
                states.append(st)
            for i, b in enumerate(g.bodies):
                go(b, path + (i,), env2)
            go(g.main, path + (len(g.vars),), env2)
            for st in states:
                converse(st, g, path, before)
            _vec_cycles(g, path, out)
            return
        if isinstance(g, Modal):
            env2 = {v: (True, mods | {g.mod}, neg, k, t) for v, (gd, mods, neg, k, t) in env.items()}
            go(g.body, path + (0,), env2)
            return
        if isinstance(g, (CountGt, CountLe)):
            flip = isinstance(g, CountLe)
            env2 = {v: (True, mods, neg ^ flip, k, t) for v, (gd, mods, neg, k, t) in env.items()}
            go(g.body, path + (0,), env2)
            return
        if isinstance(g, Not):
            env2 = {v: (gd, mods, not neg, k, t) for v, (gd, mods, neg, k, t) in env.items()}
            go(g.body, path + (0,), env2)
            return
        for i, c in enumerate(g.children):
            go(c, path + (i,), env)

    go(f, (), {})
    return out


def _unguarded_refs(g: Formula, names) -> set:
    if isinstance(g, Var):
        return {g.name} & set(names)
    if isinstance(g, (Modal, CountGt, CountLe)):
        return set()
    if isinstance(g, Mu):
        return _unguarded_refs(g.body, [n for n in names if n != g.var])
    if isinstance(g, MuVec):
        inner = [n for n in names if n not in g.vars]
        refs = _unguarded_refs(g.main, inner)
        for b in g.bodies:
            refs |= _unguarded_refs(b, inner)
        return refs
    refs = set()
    for c in g.children:
        refs |= _unguarded_refs(c, names)
    return refs


def _vec_cycles(g: MuVec, path, out):
    deps = {v: _unguarded_refs(b, g.vars) for v, b in zip(g.vars, g.bodies)}
    state: dict = {}

    def visit(v):
        state[v] = 1
        for w in deps[v]:
            if state.get(w) == 1 or (w not in state and visit(w)):
                return True
        state[v] = 2
        return False

    for v in g.vars:
        if v not in state and visit(v):
            out.append(Violation(UNGUARDED_CYCLE, path, g))
            return


def is_wellformed(f: Formula) -> bool:
    return not check_wellformed(f)


class IllFormedFormula(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


def require_wellformed(f: Formula) -> None:
    bad = check_wellformed(f)
    if bad:
        raise IllFormedFormula(bad)


# ---------------------------------------------------------------------------
# negation normal form, size, maxK


def nnf(f: Formula) -> Formula:
    """Negation normal form: negation only on propositions, T and <m>T."""
    return f._cached("_nnf", lambda: _nnf(f))


def _nnf(f):
    if isinstance(f, (Prop, Var, Top)):
        return f
    if isinstance(f, Not):
        return _neg(f.body)
    if isinstance(f, CountGt):
        return CountGt(nnf(f.body), f.k)
    if isinstance(f, CountLe):
        return CountLe(nnf(f.body), f.k)
    return rebuild(f, [nnf(c) for c in f.children])


def _neg(f):
    if isinstance(f, (Prop, Top)):
        return Not(f)
    if isinstance(f, Var):
        # bound by a fixpoint that is itself being negated: x[x/~x] cancels
        return f
    if isinstance(f, Not):
        return nnf(f.body)
    if isinstance(f, Or):
        return And(_neg(f.left), _neg(f.right))
    if isinstance(f, And):
        return Or(_neg(f.left), _neg(f.right))
    if isinstance(f, Modal):
        if f.body is TOP:
            return Not(f)
        return Or(Modal(f.mod, _neg(f.body)), Not(Modal(f.mod, TOP)))
    if isinstance(f, Mu):
        return Mu(f.var, _neg(f.body))
    if isinstance(f, MuVec):
        return MuVec(f.vars, tuple(_neg(b) for b in f.bodies), _neg(f.main))
    if isinstance(f, CountGt):
        return CountLe(nnf(f.body), f.k)
    if isinstance(f, CountLe):
        return CountGt(nnf(f.body), f.k)
    raise TypeError(type(f))


def is_nnf(f: Formula) -> bool:
    for g in subformulas(f):
        if isinstance(g, Not):
            b = g.body
            if not (isinstance(b, (Prop, Top)) or (isinstance(b, Modal) and b.body is TOP)):
                return False
    return True


def size(f: Formula) -> int:
    """Formula length; a counting bound k costs ceil(log2(k+1)) symbols."""
    if isinstance(f, (Prop, Var, Top)):
        return 1
    if isinstance(f, (CountGt, CountLe)):
        return f.k.bit_length() + size(f.body)
    return 1 + sum(size(c) for c in f.children)


def max_k(f: Formula) -> int:
    """Counter saturation bound: sum over counting atoms of (k + 1)."""
    def go(g):
        if isinstance(g, (Prop, Var, Top)):
            return 0
        if isinstance(g, (CountGt, CountLe)):
            return go(g.body) + g.k + 1
        if isinstance(g, (Not, Modal, Mu)):
            return go(g.children[0])
        return sum(go(c) for c in g.children)

    value = go(f)
    if value > INT64_MAX:
        raise OverflowError(f"maxK = {value} exceeds 64-bit range")
    return value


# ---------------------------------------------------------------------------
# text syntax

_TOKEN = re.compile(
    r"""\s*(?:
      (?P<int>\d+)
    | (?P<var>\$[A-Za-z_][A-Za-z0-9_']*)
    | (?P<mod><(?:dn|rt|up|lf)>)
    | (?P<op><=|>=|[~|&().#>=,])
    | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    )""",
    re.VERBOSE,
)


class ParseError(ValueError):
    def __init__(self, msg, pos, text=None):
        self.pos = pos
        self.text = text
        super().__init__(f"{msg} at position {pos}")


def tokenize(text: str):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos, self.text)

    def parse(self):
        f = self.expr()
        kind, val, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"unexpected {val!r}", pos, self.text)
        return f

    def expr(self):
        f = self.conj()
        while self.peek()[1] == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.peek()[1] == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self):
        kind, val, pos = self.peek()
        if val == "~":
            self.take()
            return Not(self.unary())
        if kind == "mod":
            self.take()
            return Modal(Modality(val[1:-1]), self.unary())
        if val == "#":
            self.take()
            self.expect("(")
            body = self.expr()
            self.expect(")")
            _, op, opos = self.take()
            kkind, kval, kpos = self.take()
            if kkind != "int":
                raise ParseError("expected counting bound", kpos, self.text)
            k = int(kval)
            if k > INT64_MAX:
                raise ParseError("counting bound exceeds 64-bit range", kpos, self.text)
            if op == ">":
                return CountGt(body, k)
            if op == "<=":
                return CountLe(body, k)
            raise ParseError(f"expected '>' or '<=', found {op!r}", opos, self.text)
        return self.atom()

    def atom(self):
        kind, val, pos = self.take()
        if val == "(":
            f = self.expr()
            self.expect(")")
            return f
        if kind == "var":
            return Var(val[1:])
        if kind == "ident":
            if val == "T":
                return TOP
            if val == "mu":
                vkind, vval, vpos = self.take()
                if vkind != "var":
                    raise ParseError("expected variable after 'mu'", vpos, self.text)
                self.expect(".")
                return Mu(vval[1:], self.expr())
            if val == "let":
                names, bodies = [], []
                while True:
                    vkind, vval, vpos = self.take()
                    if vkind != "var":
                        raise ParseError("expected variable in 'let'", vpos, self.text)
                    self.expect("=")
                    names.append(vval[1:])
                    bodies.append(self.expr())
                    if self.peek()[1] == ",":
                        self.take()
                        continue
                    break
                _, word, wpos = self.take()
                if word != "in":
                    raise ParseError("expected 'in'", wpos, self.text)
                return MuVec(tuple(names), tuple(bodies), self.expr())
            if val in ("in",) or not val[0].islower():
                raise ParseError(f"unexpected {val!r}", pos, self.text)
            return Prop(val)
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos, self.text)


def parse_formula(text: str) -> Formula:
    """Parse the concrete syntax; bound variables are renamed apart."""
    return rename_apart(_Parser(text).parse())


def to_text(f: Formula) -> str:
    return _print(f, 0)


def _print(f, prec):
    # prec: 0 = top, 1 = inside |, 2 = inside &, 3 = operand of a prefix operator
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, Var):
        return "$" + f.name
    if isinstance(f, Top):
        return "T"
    if isinstance(f, Not):
        return "~" + _print(f.body, 3)
    if isinstance(f, Modal):
        return f"<{f.mod.value}>" + _print(f.body, 3)
    if isinstance(f, CountGt):
        return f"#({_print(f.body, 0)}) > {f.k}"
    if isinstance(f, CountLe):
        return f"#({_print(f.body, 0)}) <= {f.k}"
    if isinstance(f, Or):
        s = f"{_print(f.left, 1)} | {_print(f.right, 2)}"
        return s if prec <= 1 else f"({s})"
    if isinstance(f, And):
        s = f"{_print(f.left, 2)} & {_print(f.right, 3)}"
        return s if prec <= 2 else f"({s})"
    if isinstance(f, Mu):
        s = f"mu ${f.var} . {_print(f.body, 0)}"
        return s if prec == 0 else f"({s})"
    if isinstance(f, MuVec):
        binds = ", ".join(f"${v} = {_print(b, 0)}" for v, b in zip(f.vars, f.bodies))
        s = f"let {binds} in {_print(f.main, 0)}"
        return s if prec == 0 else f"({s})"
    raise TypeError(type(f))
