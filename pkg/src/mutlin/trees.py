"""Explicit finite trees and direct formula evaluation.

A tree is stored as first-child / next-sibling arrays over node ids
``0..n-1``.  The same arrays describe both readings of the tree:

* ``form="binary"``: ``<dn>`` goes to the first child only, ``<up>`` is only
  defined on first children.
* ``form="nary"``: ``<dn>`` reaches every child, ``<up>`` every child's parent.

Sibling moves are identical in both readings, so converting between the two
forms keeps node ids and only swaps the tag (and the JSON edge list).
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .formula import (
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
    Top,
    Var,
    bound_names,
    disj,
    fresh_name,
    fresh_prop,
    nnf,
    propositions,
    rebuild,
)

FORMS = ("nary", "binary")


class TreeError(ValueError):
    pass


@dataclass(frozen=True)
class KripkeTree:
    form: str
    labels: tuple  # frozenset of proposition names per node
    first_child: tuple  # node id or -1
    next_sibling: tuple  # node id or -1

    def __post_init__(self):
        if self.form not in FORMS:
            raise TreeError(f"unknown tree form {self.form!r}")
        n = len(self.labels)
        if len(self.first_child) != n or len(self.next_sibling) != n:
            raise TreeError("edge arrays do not match the node count")
        if n == 0:
            raise TreeError("a tree has at least one node")
        for i, lab in enumerate(self.labels):
            if not lab:
                raise TreeError(f"node {i} has an empty label set")
        # every node except the root has exactly one predecessor
        preds = [0] * n
        for arr in (self.first_child, self.next_sibling):
            for c in arr:
                if c >= n or c < -1:
                    raise TreeError(f"edge to unknown node {c}")
                if c >= 0:
                    preds[c] += 1
        roots = [i for i in range(n) if preds[i] == 0]
        if len(roots) != 1 or any(p > 1 for p in preds):
            raise TreeError("edges do not form a tree")
        # acyclicity: everything reachable from the root
        seen, stack = set(), [roots[0]]
        while stack:
            i = stack.pop()
            if i in seen:
                raise TreeError("cycle in tree edges")
            seen.add(i)
            for c in (self.first_child[i], self.next_sibling[i]):
                if c >= 0:
                    stack.append(c)
        if len(seen) != n:
            raise TreeError("edges do not form a tree")
        object.__setattr__(self, "root", roots[0])
        if self.form == "nary" and self.next_sibling[roots[0]] >= 0:
            raise TreeError("n-ary tree root cannot have siblings")

    # --- structure -------------------------------------------------------
    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def nodes(self) -> range:
        return range(len(self.labels))

    def _cache(self, name, fn):
        try:
            return self.__dict__[name]
        except KeyError:
            v = fn()
            object.__setattr__(self, name, v)
            return v

    @property
    def prev_sibling(self) -> tuple:
        def build():
            out = [-1] * self.size
            for i, s in enumerate(self.next_sibling):
                if s >= 0:
                    out[s] = i
            return tuple(out)
        return self._cache("_ps", build)

    @property
    def binary_parent(self) -> tuple:
        """Parent of first children, -1 elsewhere."""
        def build():
            out = [-1] * self.size
            for i, c in enumerate(self.first_child):
                if c >= 0:
                    out[c] = i
            return tuple(out)
        return self._cache("_bp", build)

    @property
    def parent(self) -> tuple:
        """n-ary parent of every node (-1 at the root)."""
        def build():
            out = [-1] * self.size
            for i in self.nodes:
                c = self.first_child[i]
                while c >= 0:
                    out[c] = i
                    c = self.next_sibling[c]
            return tuple(out)
        return self._cache("_par", build)

    def children(self, i: int) -> list:
        out = []
        c = self.first_child[i]
        while c >= 0:
            out.append(c)
            c = self.next_sibling[c]
        return out

    def successors(self, mod: Modality, i: int) -> list:
        """Nodes reachable from ``i`` by one step of ``mod`` in this tree's form."""
        if mod is Modality.RIGHT:
            j = self.next_sibling[i]
            return [j] if j >= 0 else []
        if mod is Modality.LEFT:
            j = self.prev_sibling[i]
            return [j] if j >= 0 else []
        if self.form == "binary":
            j = self.first_child[i] if mod is Modality.DOWN else self.binary_parent[i]
            return [j] if j >= 0 else []
        if mod is Modality.DOWN:
            return self.children(i)
        j = self.parent[i]
        return [j] if j >= 0 else []

    def with_form(self, form: str) -> "KripkeTree":
        return KripkeTree(form, self.labels, self.first_child, self.next_sibling)

    def relabel(self, fn) -> "KripkeTree":
        return KripkeTree(self.form, tuple(frozenset(fn(l)) for l in self.labels),
                          self.first_child, self.next_sibling)

    # --- JSON ------------------------------------------------------------
    def to_dict(self) -> dict:
        if self.form == "binary":
            child = [[i, c] for i, c in enumerate(self.first_child) if c >= 0]
        else:
            child = [[i, c] for i in self.nodes for c in self.children(i)]
        sib = [[i, s] for i, s in enumerate(self.next_sibling) if s >= 0]
        return {
            "form": self.form,
            "nodes": {str(i): sorted(l) for i, l in enumerate(self.labels)},
            "edges": {"child": child, "sibling": sib},
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def __str__(self):
        return _render(self)


def tree_from_dict(d: dict) -> KripkeTree:
    form = d.get("form")
    if form not in FORMS:
        raise TreeError(f"unknown tree form {form!r}")
    ids = sorted(int(k) for k in d["nodes"])
    if ids != list(range(len(ids))):
        raise TreeError("node ids must be 0..n-1")
    n = len(ids)
    labels = tuple(frozenset(d["nodes"][str(i)]) for i in range(n))
    fc = [-1] * n
    ns = [-1] * n
    edges = d.get("edges", {})
    for a, b in edges.get("sibling", []):
        if ns[a] >= 0:
            raise TreeError(f"node {a} has two right siblings")
        ns[a] = b
    if form == "binary":
        for a, b in edges.get("child", []):
            if fc[a] >= 0:
                raise TreeError(f"node {a} has two first children")
            fc[a] = b
    else:
        ps = {b: a for a, b in edges.get("sibling", [])}
        for a, b in edges.get("child", []):
            if b not in ps:  # the child with no left sibling is the first one
                if fc[a] >= 0:
                    raise TreeError(f"node {a} has two first children")
                fc[a] = b
    t = KripkeTree(form, labels, tuple(fc), tuple(ns))
    if form == "nary":
        # child pairs must agree with the sibling chains
        want = sorted(map(tuple, edges.get("child", [])))
        have = sorted((i, c) for i in t.nodes for c in t.children(i))
        if want != have:
            raise TreeError("child edges inconsistent with sibling order")
    return t


def tree_from_json(text: str) -> KripkeTree:
    return tree_from_dict(json.loads(text))


def nary_tree(spec) -> KripkeTree:
    """Build an n-ary tree from nested ``(labels, [children...])`` tuples.

    ``labels`` may be a string (one proposition) or an iterable of names.
    Nodes are numbered in preorder.
    """
    labels, fc, ns = [], [], []

    def go(node):
        lab, kids = node if isinstance(node, tuple) else (node, [])
        i = len(labels)
        labels.append(frozenset([lab] if isinstance(lab, str) else lab))
        fc.append(-1)
        ns.append(-1)
        prev = -1
        for k in kids:
            j = go(k)
            if prev < 0:
                fc[i] = j
            else:
                ns[prev] = j
            prev = j
        return i

    go(spec)
    return KripkeTree("nary", tuple(labels), tuple(fc), tuple(ns))


def _render(t: KripkeTree) -> str:
    lines = []

    def go(i, depth):
        lines.append("  " * depth + f"{i}: {{{', '.join(sorted(t.labels[i]))}}}")
        if t.form == "nary":
            for c in t.children(i):
                go(c, depth + 1)
        else:
            c, s = t.first_child[i], t.next_sibling[i]
            if c >= 0:
                lines.append("  " * (depth + 1) + "dn:")
                go(c, depth + 2)
            if s >= 0:
                lines.append("  " * (depth + 1) + "rt:")
                go(s, depth + 2)

    go(t.root, 0)
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# the bijection


def nary_to_binary(t: KripkeTree) -> KripkeTree:
    if t.form != "nary":
        raise TreeError("expected an n-ary tree")
    return t.with_form("binary")


def binary_to_nary(t: KripkeTree) -> KripkeTree:
    if t.form != "binary":
        raise TreeError("expected a binary tree")
    if t.next_sibling[t.root] >= 0:
        raise TreeError("binary root has a right sibling: encodes a forest, not a tree")
    return t.with_form("nary")


def nary_formula_to_binary(f: Formula) -> Formula:
    """Rewrite a formula read over n-ary trees into one over their encodings."""
    taken = set(bound_names(f)) | set(f.free_vars)

    def go(g):
        if isinstance(g, Modal) and g.mod in (Modality.DOWN, Modality.UP):
            body = go(g.body)
            x = fresh_name("s", taken)
            taken.add(x)
            if g.mod is Modality.DOWN:
                if body is TOP:
                    return g
                return Modal(Modality.DOWN, Mu(x, Or(body, Modal(Modality.RIGHT, Var(x)))))
            return Mu(x, Or(Modal(Modality.UP, body), Modal(Modality.LEFT, Var(x))))
        if not g.children:
            return g
        return rebuild(g, [go(c) for c in g.children])

    return go(f)


# ---------------------------------------------------------------------------
# scalar evaluation


class EvalError(ValueError):
    pass


def eval_formula(f: Formula, t: KripkeTree, v: dict | None = None) -> frozenset:
    """Set of nodes of ``t`` where ``f`` holds under valuation ``v``."""
    v = dict(v or {})
    missing = f.free_vars - set(v)
    if missing:
        raise EvalError(f"no valuation for free variables {sorted(missing)}")
    everything = frozenset(t.nodes)
    pre = {m: [t.successors(m, i) for i in t.nodes] for m in Modality}
    closed: dict = {}

    def ev(g, env):
        if g.closed:
            r = closed.get(g)
            if r is None:
                r = closed[g] = compute(g, env)
            return r
        return compute(g, env)

    def compute(g, env):
        if isinstance(g, Prop):
            return frozenset(i for i in t.nodes if g.name in t.labels[i])
        if isinstance(g, Top):
            return everything
        if isinstance(g, Var):
            return env[g.name]
        if isinstance(g, Not):
            return everything - ev(g.body, env)
        if isinstance(g, Or):
            return ev(g.left, env) | ev(g.right, env)
        if isinstance(g, And):
            return ev(g.left, env) & ev(g.right, env)
        if isinstance(g, Modal):
            body = ev(g.body, env)
            succ = pre[g.mod]
            return frozenset(i for i in t.nodes if any(j in body for j in succ[i]))
        if isinstance(g, CountGt):
            return everything if len(ev(g.body, env)) > g.k else frozenset()
        if isinstance(g, CountLe):
            return everything if len(ev(g.body, env)) <= g.k else frozenset()
        if isinstance(g, Mu):
            cur = frozenset()
            while True:
                nxt = ev(g.body, {**env, g.var: cur})
                if nxt == cur:
                    return cur
                cur = nxt
        if isinstance(g, MuVec):
            cur = {x: frozenset() for x in g.vars}
            while True:
                env2 = {**env, **cur}
                nxt = {x: ev(b, env2) for x, b in zip(g.vars, g.bodies)}
                if nxt == cur:
                    return ev(g.main, {**env, **cur})
                cur = nxt
        raise TypeError(type(g))

    return ev(f, {k: frozenset(s) for k, s in v.items()})


def sat_on_tree(f: Formula, t: KripkeTree) -> bool:
    return bool(eval_formula(f, t, {}))


# ---------------------------------------------------------------------------
# enumeration


@lru_cache(maxsize=None)
def binary_shapes(n: int) -> tuple:
    """All binary shapes with ``n`` nodes as (first_child, next_sibling) in preorder."""
    if n == 0:
        return ((),)
    out = []
    for a in range(n):
        for left in binary_shapes(a):
            for right in binary_shapes(n - 1 - a):
                fc = [-1] * n
                ns = [-1] * n
                if a:
                    fc[0] = 1
                    for i, (c, s) in enumerate(left):
                        fc[1 + i] = c + 1 if c >= 0 else -1
                        ns[1 + i] = s + 1 if s >= 0 else -1
                if n - 1 - a:
                    ns[0] = a + 1
                    for i, (c, s) in enumerate(right):
                        fc[a + 1 + i] = c + a + 1 if c >= 0 else -1
                        ns[a + 1 + i] = s + a + 1 if s >= 0 else -1
                out.append(tuple(zip(fc, ns)))
    return tuple(out)


def _shape_arrays(shape):
    return tuple(c for c, _ in shape), tuple(s for _, s in shape)


def iter_shapes(max_nodes: int, nary: bool = False):
    """Shapes with 1..max_nodes nodes; ``nary`` keeps those whose root has no sibling."""
    for n in range(1, max_nodes + 1):
        for shape in binary_shapes(n):
            fc, ns = _shape_arrays(shape)
            if nary and ns[0] >= 0:
                continue
            yield fc, ns


def _label_options(props, allow_empty=False, empty_as=None):
    props = sorted(props)
    opts = []
    for r in range(0 if allow_empty else 1, len(props) + 1):
        for c in itertools.combinations(props, r):
            opts.append(frozenset(c) if c or empty_as is None else frozenset([empty_as]))
    return opts


def enumerate_trees(props, max_nodes: int, form: str = "binary"):
    """Every tree with 1..max_nodes nodes labeled by non-empty subsets of ``props``."""
    if max_nodes < 1:
        raise ValueError("max_nodes must be at least 1")
    opts = _label_options(props)
    if not opts:
        raise ValueError("need at least one proposition")
    for fc, ns in iter_shapes(max_nodes, nary=(form == "nary")):
        for labs in itertools.product(opts, repeat=len(fc)):
            yield KripkeTree(form, labs, fc, ns)


def count_trees(props, max_nodes: int) -> int:
    m = 2 ** len(set(props)) - 1
    return sum(len(binary_shapes(n)) * m**n for n in range(1, max_nodes + 1))


# ---------------------------------------------------------------------------
# batched evaluation: one shape, every labeling at once


class BatchEvaluator:
    """Evaluate formulas on one tree shape under many labelings at once.

    ``labels`` is an integer array ``(L, n)`` of label indices into
    ``options`` (a list of frozensets).  Results are boolean arrays ``(L, n)``.
    """

    def __init__(self, fc, ns, form: str, options, labels: np.ndarray):
        n = len(fc)
        self.n = n
        self.fc, self.ns = tuple(fc), tuple(ns)
        self.form = form
        self.options = options
        self.labels = labels
        t = KripkeTree(form, tuple(frozenset(["_"]) for _ in range(n)), tuple(fc), tuple(ns))
        # successor matrix per modality: succ[m][i, j] = j reachable from i
        self.succ = {}
        for m in Modality:
            a = np.zeros((n, n), dtype=bool)
            for i in range(n):
                for j in t.successors(m, i):
                    a[i, j] = True
            self.succ[m] = a
        self._props = {}
        self._closed = {}

    def prop(self, name):
        v = self._props.get(name)
        if v is None:
            has = np.array([name in o for o in self.options], dtype=bool)
            v = has[self.labels]
            self._props[name] = v
        return v

    def eval(self, f: Formula, env=None) -> np.ndarray:
        return self._ev(f, env or {})

    def _ev(self, g, env):
        # closed subformulas do not change between fixpoint iterations
        if g.closed:
            v = self._closed.get(g)
            if v is None:
                v = self._closed[g] = self._compute(g, env)
            return v
        return self._compute(g, env)

    def _compute(self, g, env):
        L, n = self.labels.shape
        if isinstance(g, Prop):
            return self.prop(g.name)
        if isinstance(g, Top):
            return np.ones((L, n), dtype=bool)
        if isinstance(g, Var):
            return env[g.name]
        if isinstance(g, Not):
            return ~self._ev(g.body, env)
        if isinstance(g, Or):
            return self._ev(g.left, env) | self._ev(g.right, env)
        if isinstance(g, And):
            return self._ev(g.left, env) & self._ev(g.right, env)
        if isinstance(g, Modal):
            body = self._ev(g.body, env)
            a = self.succ[g.mod]
            return (body.astype(np.uint8) @ a.T.astype(np.uint8)) > 0
        if isinstance(g, (CountGt, CountLe)):
            c = self._ev(g.body, env).sum(axis=1)
            ok = c > g.k if isinstance(g, CountGt) else c <= g.k
            return np.repeat(ok[:, None], n, axis=1)
        if isinstance(g, Mu):
            cur = np.zeros((L, n), dtype=bool)
            while True:
                nxt = self._ev(g.body, {**env, g.var: cur})
                if np.array_equal(nxt, cur):
                    return cur
                cur = nxt
        if isinstance(g, MuVec):
            cur = {x: np.zeros((L, n), dtype=bool) for x in g.vars}
            while True:
                env2 = {**env, **cur}
                nxt = {x: self._ev(b, env2) for x, b in zip(g.vars, g.bodies)}
                if all(np.array_equal(nxt[x], cur[x]) for x in g.vars):
                    return self._ev(g.main, {**env, **cur})
                cur = nxt
        raise TypeError(type(g))

    def tree(self, row: int) -> KripkeTree:
        labs = tuple(self.options[k] for k in self.labels[row])
        return KripkeTree(self.form, labs, self.fc, self.ns)


def all_labelings(n_options: int, n_nodes: int) -> np.ndarray:
    """Every assignment of ``n_options`` labels to ``n_nodes`` nodes, shape (L, n)."""
    grids = np.indices((n_options,) * n_nodes).reshape(n_nodes, -1).T
    return np.ascontiguousarray(grids)


def batches(props, max_nodes: int, form: str = "binary", allow_empty=False, empty_as=None):
    """Yield a :class:`BatchEvaluator` per shape, in enumeration order."""
    opts = _label_options(props, allow_empty=allow_empty, empty_as=empty_as)
    for fc, ns in iter_shapes(max_nodes, nary=(form == "nary")):
        yield BatchEvaluator(fc, ns, form, opts, all_labelings(len(opts), len(fc)))


def oracle_alphabet(f: Formula) -> tuple:
    """Propositions of ``f`` and the name standing in for an unlabeled node."""
    props = propositions(f)
    return props, fresh_prop("pfresh", set(props))


def brute_force_sat(f: Formula, max_nodes: int, form: str = "binary"):
    """First enumerated tree satisfying ``f``, or ``None`` within the bound.

    Nodes range over subsets of the propositions of ``f``; the empty subset
    is represented by the fresh proposition alone.
    """
    props, fresh = oracle_alphabet(f)
    for ev in batches(props, max_nodes, form, allow_empty=True, empty_as=fresh):
        hit = ev.eval(f).any(axis=1)
        if hit.any():
            return ev.tree(int(np.argmax(hit)))
    return None


def nominal_rows(f: Formula, fc, ns, options, nominals, form: str = "binary",
                 at_root: bool = False) -> np.ndarray:
    """Per labeling of one shape: does ``f`` hold for some extra labeling by ``nominals``?

    The nominals are free propositions here: each may label any set of
    nodes.  Returns a boolean vector over ``all_labelings(len(options), n)``.
    """
    n, m = len(fc), len(nominals)
    ext = [frozenset(o) | {nominals[j] for j in range(m) if mask >> j & 1}
           for o in options for mask in range(1 << m)]
    base = all_labelings(len(options), n)
    masks = all_labelings(1 << m, n)
    rows = (base[None, :, :] * (1 << m) + masks[:, None, :]).reshape(-1, n)
    ev = BatchEvaluator(fc, ns, form, ext, rows)
    hit = satisfying_rows(f, ev, at_root=at_root)
    return hit.reshape(len(masks), len(base)).any(axis=0)


def satisfying_rows(f: Formula, ev: BatchEvaluator, at_root: bool = False) -> np.ndarray:
    """Boolean vector over labelings: does ``f`` hold somewhere (or at the root)?"""
    val = ev.eval(f)
    return val[:, 0] if at_root else val.any(axis=1)
