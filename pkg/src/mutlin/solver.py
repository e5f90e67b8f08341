"""Bottom-up satisfiability check with witness extraction.

Nodes are subsets of the lean.  A node is split into a *core* (propositions
and modal entries, packed into an int) and a tuple of counter values, one
per counting atom.  Counting atoms themselves are not part of the core: a
search fixes one global truth assignment to them (a *guess*) and every node
of that search agrees with it.  The root then has to confirm the guess with
its counters.

Trees are grown from the leaves up.  A parent only looks at the roots of its
two subtrees, and only at a few features of them (which modal bodies they
entail, their converse entries, their counters, and whether the input formula
holds somewhere below).  Subtrees are therefore grouped by those features and
one representative tree is kept per group entry.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

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
    nnf,
    require_wellformed,
    subformulas,
    unfold,
)
from .lean import CountEntry, CounterBit, FlagEntry, Lean, ModalEntry, PropEntry
from .trees import KripkeTree

DN, RT, UP, LF = Modality.DOWN, Modality.RIGHT, Modality.UP, Modality.LEFT

DEFAULT_MAX_NODES = 2_000_000
DEFAULT_MAX_ITERS = 100_000


class BudgetExceeded(RuntimeError):
    """The search hit its node or iteration ceiling before reaching a verdict."""


class UnsupportedFormula(ValueError):
    """Well-formed input outside what the solver decides soundly."""


class ClosureError(ValueError):
    """Entailment was asked for a formula that is not built from lean atoms."""


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class PhiNode:
    core: int
    counters: tuple = ()


@dataclass(frozen=True)
class FLTree:
    root: PhiNode
    left: "FLTree | None" = None
    right: "FLTree | None" = None

    @property
    def size(self) -> int:
        return 1 + (self.left.size if self.left else 0) + (self.right.size if self.right else 0)

    def nodes(self):
        yield self.root
        if self.left:
            yield from self.left.nodes()
        if self.right:
            yield from self.right.nodes()


@dataclass
class Stats:
    iterations: int = 0
    nodes_generated: int = 0
    trees_built: int = 0
    guesses: int = 0
    elapsed: float = 0.0

    def as_dict(self):
        return {
            "iterations": self.iterations,
            "nodes_generated": self.nodes_generated,
            "trees_built": self.trees_built,
            "guesses": self.guesses,
            "elapsed": round(self.elapsed, 6),
        }


@dataclass
class SatResult:
    sat: bool
    witness: FLTree | None = None
    kripke: KripkeTree | None = None
    steps: int = 0
    guess: tuple = ()
    stats: Stats = field(default_factory=Stats)

    def __bool__(self):
        return self.sat

    def to_dict(self) -> dict:
        out = {"verdict": "SAT" if self.sat else "UNSAT", "stats": self.stats.as_dict()}
        if self.sat:
            out["steps"] = self.steps
            out["witness"] = self.kripke.to_dict()
        return out


# ---------------------------------------------------------------------------
# vocabulary: bit layout of node cores and compiled entailment


class Vocabulary:
    """Bit layout for node cores plus entailment predicates over them.

    Core layout, low bits first: user propositions; modal bodies for dn, rt,
    up, lf; then the four ``<m>T`` bits.  The fresh proposition is implicit
    (present exactly when no user proposition is).
    """

    def __init__(self, f: Formula, navigation: bool = False):
        self.lean = Lean(f, navigation=navigation)
        lean = self.lean
        self.formula = lean.formula
        self.props = [p for p in lean.prop_names]
        self.fresh = lean.fresh
        self.atoms = list(lean.atoms)
        self.atom_index = {a: i for i, a in enumerate(self.atoms)}
        self.max_k = lean.max_k
        self.bodies = {m: [g.body for g in lean.modal_formulas if g.mod is m] for m in Modality}
        off = len(self.props)
        self.offset = {}
        for m in (DN, RT, UP, LF):
            self.offset[m] = off
            off += len(self.bodies[m])
        self.top_bit = {}
        for m in (DN, RT, UP, LF):
            self.top_bit[m] = 1 << off
            off += 1
        self.width = off
        self.prop_mask = (1 << len(self.props)) - 1
        self.bit = {}
        for i, p in enumerate(self.props):
            self.bit[Prop(p)] = 1 << i
        for m in Modality:
            for j, b in enumerate(self.bodies[m]):
                self.bit[Modal(m, b)] = 1 << (self.offset[m] + j)
            self.bit[Modal(m, TOP)] = self.top_bit[m]
        self._expr_cache: dict = {}
        self._fn_cache: dict = {}

    # -- expression compiler ------------------------------------------------
    def _expr(self, g: Formula, depth=0) -> str:
        hit = self._expr_cache.get(g)
        if hit is not None:
            return hit
        if depth > 500:
            raise ClosureError(f"unguarded recursion while compiling {g}")
        if isinstance(g, Top):
            s = "True"
        elif isinstance(g, Prop):
            if g in self.bit:
                s = f"(m & {self.bit[g]} != 0)"
            elif g.name == self.fresh:
                s = f"(m & {self.prop_mask} == 0)"
            else:
                s = "False"  # a proposition outside the vocabulary never holds
        elif isinstance(g, Modal):
            if g not in self.bit:
                raise ClosureError(f"modal formula outside the lean: {g}")
            s = f"(m & {self.bit[g]} != 0)"
        elif isinstance(g, Not):
            s = f"(not {self._expr(g.body, depth + 1)})"
        elif isinstance(g, And):
            s = f"({self._expr(g.left, depth + 1)} and {self._expr(g.right, depth + 1)})"
        elif isinstance(g, Or):
            s = f"({self._expr(g.left, depth + 1)} or {self._expr(g.right, depth + 1)})"
        elif isinstance(g, (CountGt, CountLe)):
            if g not in self.atom_index:
                raise ClosureError(f"counting atom outside the lean: {g}")
            s = f"G[{self.atom_index[g]}]"
        elif isinstance(g, (Mu, MuVec)):
            s = self._expr(unfold(g), depth + 1)
        elif isinstance(g, Var):
            raise ClosureError(f"free variable {g}")
        else:
            raise TypeError(type(g))
        self._expr_cache[g] = s
        return s

    def predicate(self, g: Formula):
        """``fn(core, guess) -> bool`` deciding ``node |- g``."""
        fn = self._fn_cache.get(g)
        if fn is None:
            fn = eval(f"lambda m, G: bool({self._expr(g)})")  # noqa: S307 - generated locally
            self._fn_cache[g] = fn
        return fn

    def vector(self, formulas):
        """``fn(core, guess) -> int``: bit j set iff the node entails ``formulas[j]``."""
        key = ("vec",) + tuple(formulas)
        fn = self._fn_cache.get(key)
        if fn is None:
            if not formulas:
                fn = lambda m, G: 0  # noqa: E731
            else:
                parts = " | ".join(f"(({self._expr(g)}) << {j})" for j, g in enumerate(formulas))
                fn = eval(f"lambda m, G: {parts}")  # noqa: S307
            self._fn_cache[key] = fn
        return fn

    # -- field access -------------------------------------------------------
    def entries_of(self, core: int, m: Modality) -> int:
        return (core >> self.offset[m]) & ((1 << len(self.bodies[m])) - 1)

    def has(self, core: int, m: Modality) -> bool:
        return bool(core & self.top_bit[m])

    def labels(self, core: int) -> frozenset:
        props = frozenset(p for i, p in enumerate(self.props) if core >> i & 1)
        return props or frozenset([self.fresh])

    def core(self, props=(), modal=()) -> int:
        """Build a core from proposition names and ``Modal`` formulas."""
        c = 0
        for p in props:
            if p != self.fresh:
                c |= self.bit[Prop(p)]
        for g in modal:
            c |= self.bit[g]
            c |= self.top_bit[g.mod]
        return c

    def describe(self, core: int) -> list:
        out = sorted(self.labels(core))
        for g, b in self.bit.items():
            if isinstance(g, Modal) and core & b:
                out.append(str(g))
        return out


# ---------------------------------------------------------------------------
# the relations on explicit nodes and trees


class Context:
    """Explicit relations for one input formula and one counting guess.

    ``guess`` maps each counting atom position to a truth value; the default
    makes every counting atom true, which is the reading where counting
    formulas are members of every node.
    """

    def __init__(self, f: Formula, guess=None, navigation: bool = False, saturation: str = "atom"):
        self.vocab = Vocabulary(f, navigation=navigation)
        v = self.vocab
        self.formula = v.formula
        self.guess = tuple(guess) if guess is not None else (True,) * len(v.atoms)
        if len(self.guess) != len(v.atoms):
            raise ValueError("guess length does not match the counting atoms")
        if saturation == "maxk":
            self.sat = [v.max_k] * len(v.atoms)
        elif saturation == "atom":
            self.sat = [a.k + 1 for a in v.atoms]
        else:
            raise ValueError(f"unknown saturation mode {saturation!r}")
        # a node counter may never exceed k for atoms that bound the total from above
        self.bound = []
        for a, g, s in zip(v.atoms, self.guess, self.sat):
            upper = (isinstance(a, CountLe) and g) or (isinstance(a, CountGt) and not g)
            self.bound.append(a.k if upper else float("inf"))
        self._phi = v.predicate(self.formula)
        self._count = v.vector([a.body for a in v.atoms])
        self._vec = {m: v.vector(v.bodies[m]) for m in Modality}

    # counters as explicit values
    def count_entails(self, core: int) -> int:
        return self._count(core, self.guess)

    def node_entails(self, n: PhiNode | int, g: Formula) -> bool:
        core = n.core if isinstance(n, PhiNode) else n
        return self.vocab.predicate(g)(core, self.guess)

    def entails_vector(self, core: int, m: Modality) -> int:
        """Bits j where ``core |- body_j`` for the ``<m>`` bodies."""
        return self._vec[m](core, self.guess)

    def is_phi_node(self, n: PhiNode) -> bool:
        v = self.vocab
        if v.has(n.core, UP) and v.has(n.core, LF):
            return False
        for m in Modality:
            if v.entries_of(n.core, m) and not v.has(n.core, m):
                return False
        if len(n.counters) != len(v.atoms):
            return False
        return all(0 <= c <= b and c <= s for c, b, s in zip(n.counters, self.bound, self.sat))

    def flags(self, n: PhiNode) -> tuple:
        """Atom positions whose flag is in ``n`` (only ``>`` atoms have flags)."""
        return tuple(i for i, a in enumerate(self.vocab.atoms)
                     if isinstance(a, CountGt) and n.counters[i] > a.k)

    def entries(self, n: PhiNode) -> list:
        """The node as a list of lean entries."""
        v = self.vocab
        out = [PropEntry(p) for p in sorted(v.labels(n.core))]
        for g, b in v.bit.items():
            if isinstance(g, Modal) and n.core & b:
                out.append(ModalEntry(g.mod, g.body))
        bits = v.lean.counter_bits
        for i, a in enumerate(v.atoms):
            if self.guess[i]:
                out.append(CountEntry(a))
            out += [CounterBit(i, b) for b in range(bits) if n.counters[i] >> b & 1]
        out += [FlagEntry(i) for i in self.flags(n)]
        return out

    def modal_consistent(self, n1: PhiNode, n2: PhiNode, m: Modality) -> bool:
        """Delta_m: ``n2`` can sit below ``n1`` along ``m`` (dn or rt)."""
        if m not in (DN, RT):
            raise ValueError("modal consistency is defined for dn and rt")
        v, back = self.vocab, m.inverse
        if not v.has(n1.core, m) or not v.has(n2.core, back):
            return False
        if v.has(n2.core, UP if m is RT else LF):
            return False
        return (v.entries_of(n1.core, m) == self.entails_vector(n2.core, m)
                and v.entries_of(n2.core, back) == self.entails_vector(n1.core, back))

    def counter_consistent(self, n0: PhiNode, n1: PhiNode | None, n2: PhiNode | None = None) -> bool:
        ent = self.count_entails(n0.core)
        for i in range(len(self.vocab.atoms)):
            total = (ent >> i & 1)
            for c in (n1, n2):
                if c is not None:
                    total += c.counters[i]
            if n0.counters[i] != min(self.sat[i], total):
                return False
        # flags are functions of counters here, so child flags reach the parent
        # as long as counters never decrease
        return True

    def leaf_counters(self, core: int) -> tuple:
        ent = self.count_entails(core)
        return tuple(min(s, ent >> i & 1) for i, s in enumerate(self.sat))

    def leaves(self, nodes) -> set:
        v = self.vocab
        out = set()
        for n in nodes:
            if any(v.has(n.core, m) for m in (DN, RT)):
                continue
            if n.counters == self.leaf_counters(n.core) and self.is_phi_node(n):
                out.add(FLTree(n))
        return out

    def root_ok(self, n: PhiNode, rooted_tree: bool = False) -> bool:
        v = self.vocab
        if v.has(n.core, UP) or v.has(n.core, LF):
            return False
        if rooted_tree and v.has(n.core, RT):
            return False
        for i, a in enumerate(v.atoms):
            over = n.counters[i] > a.k
            if isinstance(a, CountGt) and self.guess[i] != over:
                return False
            if isinstance(a, CountLe) and self.guess[i] == over:
                return False
        return True

    def tree_entails(self, x: FLTree, g: Formula | None = None, rooted_tree: bool = False) -> bool:
        g = self.formula if g is None else nnf(g)
        if not self.root_ok(x.root, rooted_tree):
            return False
        return any(self.node_entails(n, g) for n in x.nodes())

    def fits(self, n: PhiNode, left: FLTree | None, right: FLTree | None) -> bool:
        v = self.vocab
        if left is None and right is None:
            return False
        if left is None:
            if v.has(n.core, DN):
                return False
        elif not self.modal_consistent(n, left.root, DN):
            return False
        if right is None:
            if v.has(n.core, RT):
                return False
        elif not self.modal_consistent(n, right.root, RT):
            return False
        return self.is_phi_node(n) and self.counter_consistent(
            n, left.root if left else None, right.root if right else None)

    def update(self, x: set, y: set):
        """One round of parent attachment over explicit sets.

        Returns ``(x | new_trees, y - roots_of_new_trees)``.
        """
        subtrees = [None] + sorted(x, key=_tree_key)
        new = set()
        for n in sorted(y, key=lambda n: (n.core, n.counters)):
            for left in subtrees:
                for right in subtrees:
                    if self.fits(n, left, right):
                        new.add(FLTree(n, left, right))
        roots = {t.root for t in new}
        return set(x) | new, set(y) - roots

    def all_nodes(self, max_counter: int | None = None):
        """Every phi-node (small formulas only: exponential in the lean)."""
        v = self.vocab
        n_modal = v.width - len(v.props) - 4
        cores = []
        for props in range(1 << len(v.props)):
            for mod in range(1 << n_modal):
                for tops in range(16):
                    c = props | (mod << len(v.props)) | (tops << (v.width - 4))
                    if any(v.entries_of(c, m) and not v.has(c, m) for m in Modality):
                        continue
                    if v.has(c, UP) and v.has(c, LF):
                        continue
                    cores.append(c)
        hi = [int(min(b, s)) if max_counter is None else int(min(b, s, max_counter))
              for b, s in zip(self.bound, self.sat)]
        for c in cores:
            for cnt in itertools.product(*(range(h + 1) for h in hi)):
                yield PhiNode(c, cnt)


def _tree_key(t: FLTree):
    return (t.size, repr(t))


# ---------------------------------------------------------------------------
# the search


class _Tree:
    """Compact tree used during search; converted to FLTree on success."""

    __slots__ = ("core", "counters", "left", "right", "maxlab", "count")

    def __init__(self, core, counters, left, right, maxlab, count):
        self.core = core
        self.counters = counters
        self.left = left
        self.right = right
        self.maxlab = maxlab
        self.count = count

    @property
    def key(self):
        return (self.maxlab, self.count)

    def freeze(self) -> FLTree:
        return FLTree(
            PhiNode(self.core, self.counters),
            self.left.freeze() if self.left else None,
            self.right.freeze() if self.right else None,
        )


def _better(a, b):
    return b is None or a.key < b.key


class Solver:
    """Satisfiability for one formula.

    Options: ``rooted_tree`` rejects witnesses whose root has a right
    sibling (so they decode to a single n-ary tree); ``navigation`` keeps the
    navigation entries of counting atoms in the lean; ``saturation`` is
    ``"maxk"`` (counters saturate at maxK) or ``"atom"`` (at k+1 per atom).
    """

    def __init__(self, f: Formula, *, rooted_tree: bool = False, navigation: bool = False,
                 saturation: str = "atom", max_nodes: int = DEFAULT_MAX_NODES,
                 max_iters: int = DEFAULT_MAX_ITERS):
        require_wellformed(f)
        for g in subformulas(f):
            if isinstance(g, (CountGt, CountLe)) and g.free_vars:
                # the guessed truth of such an atom could justify itself
                raise UnsupportedFormula(f"fixpoint recursion through a counting formula: {g}")
        self.input = f
        self.rooted_tree = rooted_tree
        self.navigation = navigation
        self.saturation = saturation
        self.max_nodes = max_nodes
        self.max_iters = max_iters
        self.vocab = Vocabulary(f, navigation=navigation)
        self.stats = Stats()
        self.trace: list = []  # per guess: number of group entries after each step

    def guesses(self):
        """Truth assignments to the counting atoms that a model could realise."""
        for g in itertools.product((True, False), repeat=len(self.vocab.atoms)):
            if plausible_guess(self.vocab, g):
                yield g

    def solve(self) -> SatResult:
        start = time.perf_counter()
        try:
            for guess in self.guesses():
                self.stats.guesses += 1
                ctx = Context(self.input, guess, navigation=self.navigation,
                              saturation=self.saturation)
                ctx.vocab = self.vocab  # share compiled predicates
                res = self._search(ctx)
                if res is not None:
                    tree, steps = res
                    fl = tree.freeze()
                    return SatResult(True, fl, to_kripke(fl, self.vocab), steps, guess, self.stats)
            return SatResult(False, stats=self.stats)
        finally:
            self.stats.elapsed = time.perf_counter() - start

    # core candidates -------------------------------------------------------
    def _up_choices(self):
        v = self.vocab
        out = [0]
        for m in (UP, LF):
            for s in range(1 << len(v.bodies[m])):
                out.append(v.top_bit[m] | (s << v.offset[m]))
        return out

    def _search(self, ctx: Context):
        v = self.vocab
        G = ctx.guess
        nprops = len(v.props)
        ups = self._up_choices()
        vec = {m: v.vector(v.bodies[m]) for m in Modality}
        phi = v.predicate(v.formula)
        cnt = v.vector([a.body for a in v.atoms])
        sat, bound = ctx.sat, ctx.bound
        natoms = len(v.atoms)
        upbit, lfbit, rtbit = v.top_bit[UP], v.top_bit[LF], v.top_bit[RT]
        info: dict = {}
        up_off, up_mask = v.offset[UP], (1 << len(v.bodies[UP])) - 1
        lf_off, lf_mask = v.offset[LF], (1 << len(v.bodies[LF])) - 1
        vup, vlf, vdn, vrt = vec[UP], vec[LF], vec[DN], vec[RT]
        prop_mask = v.prop_mask

        def core_info(c):
            r = info.get(c)
            if r is None:
                lab = bin(c & prop_mask).count("1") or 1
                r = (vup(c, G), vlf(c, G), cnt(c, G), phi(c, G), lab,
                     vdn(c, G), (c >> up_off) & up_mask, vrt(c, G), (c >> lf_off) & lf_mask)
                info[c] = r
            return r

        cand_cache: dict = {}
        # propositions whose count this guess bounds by zero
        forbidden = 0
        for a, b in zip(v.atoms, bound):
            if b == 0 and isinstance(a.body, Prop) and a.body in v.bit:
                forbidden |= v.bit[a.body]

        def candidates(dkey, rkey):
            """Parent cores given the dn/rt entries, indexed by converse match."""
            hit = cand_cache.get((dkey, rkey))
            if hit is not None:
                return hit
            base = 0
            if dkey is not None:
                base |= v.top_bit[DN] | (dkey << v.offset[DN])
            if rkey is not None:
                base |= v.top_bit[RT] | (rkey << v.offset[RT])
            idx: dict = {}
            for props in range(1 << nprops):
                if props & forbidden:
                    continue
                for up in ups:
                    c = base | props | up
                    key = (vup(c, G) if dkey is not None else None,
                           vlf(c, G) if rkey is not None else None)
                    idx.setdefault(key, []).append(c)
            cand_cache[(dkey, rkey)] = idx
            return idx

        # groups: signature -> {(counters, seen): _Tree}
        down: dict = {}
        right: dict = {}
        best_root = None
        stats = self.stats

        def admit(c, counters, seen, left, right_t, new_down, new_right):
            nonlocal best_root
            ci = core_info(c)
            maxlab = ci[4]
            count = 1
            if left is not None:
                maxlab = max(maxlab, left.maxlab)
                count += left.count
            if right_t is not None:
                maxlab = max(maxlab, right_t.maxlab)
                count += right_t.count
            stats.trees_built += 1
            t = _Tree(c, counters, left, right_t, maxlab, count)
            if c & upbit:
                sig, store, delta = (ci[5], ci[6]), down, new_down
            elif c & lfbit:
                sig, store, delta = (ci[7], ci[8]), right, new_right
            else:
                if not seen or (self.rooted_tree and c & rtbit):
                    return
                if ctx.root_ok(PhiNode(c, counters)) and _better(t, best_root):
                    best_root = t
                return
            grp = store.setdefault(sig, {})
            k = (counters, seen)
            old = grp.get(k)
            if old is None:
                stats.nodes_generated += 1
                if stats.nodes_generated > self.max_nodes:
                    raise BudgetExceeded(f"more than {self.max_nodes} nodes generated")
                grp[k] = t
                delta.setdefault(sig, {})[k] = t
            elif _better(t, old):
                grp[k] = t
                d = delta.get(sig)
                if d is not None and k in d:
                    d[k] = t

        def combine(c, lc, rc, ls, rs, ci):
            e = ci[2]
            out = []
            for i in range(natoms):
                x = (e >> i & 1) + (lc[i] if lc else 0) + (rc[i] if rc else 0)
                if x > bound[i]:
                    return None
                out.append(x if x < sat[i] else sat[i])
            return tuple(out)

        # step 1: leaves
        step = 1
        stats.iterations += 1
        new_down: dict = {}
        new_right: dict = {}
        for cores in candidates(None, None).values():
            for c in cores:
                ci = core_info(c)
                counters = combine(c, None, None, False, False, ci)
                if counters is None:
                    continue
                admit(c, counters, ci[3], None, None, new_down, new_right)
        self.trace.append(sum(len(g) for g in down.values()) + sum(len(g) for g in right.values()))
        if best_root is not None:
            return best_root, step

        while new_down or new_right:
            step += 1
            stats.iterations += 1
            if step > self.max_iters:
                raise BudgetExceeded(f"more than {self.max_iters} iterations")
            # snapshots: trees admitted during this step wait for the next one
            old_down = {s: {k: t for k, t in g.items() if k not in new_down.get(s, ())}
                        for s, g in down.items()}
            all_right = {s: dict(g) for s, g in right.items()}
            nd, nr = {}, {}

            def attach(lsig, lgrp, rsig, rgrp):
                dkey = lsig[0] if lsig is not None else None
                rkey = rsig[0] if rsig is not None else None
                idx = candidates(dkey, rkey)
                cores = idx.get((lsig[1] if lsig is not None else None,
                                 rsig[1] if rsig is not None else None))
                if not cores:
                    return
                litems = list(lgrp.items()) if lgrp is not None else [((None, False), None)]
                ritems = list(rgrp.items()) if rgrp is not None else [((None, False), None)]
                for c in cores:
                    ci = core_info(c)
                    here = ci[3]
                    for (lc, ls), lt in litems:
                        for (rc, rs), rt in ritems:
                            counters = combine(c, lc, rc, ls, rs, ci)
                            if counters is None:
                                continue
                            admit(c, counters, here or ls or rs, lt, rt, nd, nr)

            # new left subtrees with anything (including nothing) on the right
            for lsig, lgrp in new_down.items():
                attach(lsig, lgrp, None, None)
                for rsig, rgrp in all_right.items():
                    attach(lsig, lgrp, rsig, rgrp)
            # old left subtrees (or nothing) with new right subtrees
            for rsig, rgrp in new_right.items():
                attach(None, None, rsig, rgrp)
                for lsig, lgrp in old_down.items():
                    if lgrp:
                        attach(lsig, lgrp, rsig, rgrp)
            self.trace.append(sum(len(g) for g in down.values()) + sum(len(g) for g in right.values()))
            if best_root is not None:
                return best_root, step
            new_down, new_right = nd, nr
        return None


def _three_valued(g: Formula, guess, index, env=None):
    """Kleene value of ``g`` at an unknown node: True, False or None.

    A fixpoint is judged by its first approximant; a definite answer there
    is the answer for the fixpoint too.
    """
    env = env or {}
    if isinstance(g, Top):
        return True
    if isinstance(g, Var):
        return env.get(g.name)
    if isinstance(g, Prop):
        return None
    if isinstance(g, Not):
        v = _three_valued(g.body, guess, index, env)
        return None if v is None else not v
    if isinstance(g, (And, Or)):
        a = _three_valued(g.left, guess, index, env)
        b = _three_valued(g.right, guess, index, env)
        if isinstance(g, And):
            return False if a is False or b is False else (True if a and b else None)
        return True if a is True or b is True else (False if a is False and b is False else None)
    if isinstance(g, Modal):
        return False if _three_valued(g.body, guess, index, env) is False else None
    if isinstance(g, (CountGt, CountLe)):
        i = index.get(g)
        return None if i is None else guess[i]
    if isinstance(g, Mu):
        return _three_valued(g.body, guess, index, {**env, g.var: False})
    if isinstance(g, MuVec):
        empty = {**env, **{x: False for x in g.vars}}
        if all(_three_valued(b, guess, index, empty) is False for b in g.bodies):
            return _three_valued(g.main, guess, index, empty)
        return _three_valued(g.main, guess, index, {**env, **{x: None for x in g.vars}})
    raise TypeError(type(g))


def plausible_guess(vocab: Vocabulary, guess) -> bool:
    """Cheap necessary conditions for a guess to match some tree.

    The formula must not be false outright, and the atoms sharing a body
    must leave room for some count of that body.
    """
    index = vocab.atom_index
    if _three_valued(vocab.formula, guess, index) is False:
        return False
    ranges: dict = {}
    for a, val in zip(vocab.atoms, guess):
        lo, hi = ranges.get(a.body, (0, float("inf")))
        above = isinstance(a, CountGt) == val  # the count exceeds k
        if above:
            lo = max(lo, a.k + 1)
        else:
            hi = min(hi, a.k)
        ranges[a.body] = (lo, hi)
    for body, (lo, hi) in ranges.items():
        v = _three_valued(body, guess, index)
        if v is False:
            hi = 0
        elif v is True:
            lo = max(lo, 1)
        if lo > hi:
            return False
    return True


def to_kripke(t: FLTree, vocab: Vocabulary) -> KripkeTree:
    """Binary Kripke tree with the user propositions of each node."""
    labels, fc, ns = [], [], []

    def go(x):
        i = len(labels)
        labels.append(vocab.labels(x.root.core))
        fc.append(-1)
        ns.append(-1)
        if x.left is not None:
            fc[i] = go(x.left)
        if x.right is not None:
            ns[i] = go(x.right)
        return i

    go(t)
    return KripkeTree("binary", tuple(labels), tuple(fc), tuple(ns))


def satisfiable(f: Formula, **options) -> SatResult:
    """Decide satisfiability of ``f`` over finite binary trees."""
    return Solver(f, **options).solve()
