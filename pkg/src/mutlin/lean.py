"""Fischer-Ladner closure and the lean of a formula.

The lean is the finite vocabulary whose subsets are the solver's node
types: propositions, modal subformulas, counting atoms, counter bits and
flags, plus ``<m>T`` for every modality and one fresh proposition.
"""
from __future__ import annotations

from dataclasses import dataclass

from .formula import (
    MODALITIES,
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
    disj,
    fresh_prop,
    max_k,
    nnf,
    propositions,
    unfold,
)


def nav_formula(body: Formula) -> Formula:
    """``mu x1.(mu x2. body | <dn>x2 | <rt>x2) | <up>x1 | <lf>x1``.

    Holds everywhere in a tree as soon as ``body`` holds somewhere.
    """
    from .formula import Var, fresh_name, bound_names

    taken = bound_names(body) | body.free_vars
    x1 = fresh_name("n1", taken)
    x2 = fresh_name("n2", taken | {x1})
    down = Mu(x2, disj(body, Modal(Modality.DOWN, Var(x2)), Modal(Modality.RIGHT, Var(x2))))
    return Mu(x1, disj(down, Modal(Modality.UP, Var(x1)), Modal(Modality.LEFT, Var(x1))))


def fl_successors(f: Formula, navigation: bool = True):
    """Direct successors of ``f`` under the closure relation."""
    yield nnf(f)
    if isinstance(f, (And, Or)):
        yield f.left
        yield f.right
    elif isinstance(f, Not):
        yield f.body
    elif isinstance(f, Modal):
        yield f.body
    elif isinstance(f, (Mu, MuVec)):
        yield unfold(f)
    elif isinstance(f, (CountGt, CountLe)):
        yield f.body
        if navigation:
            yield nav_formula(f.body)


def fl_closure(f: Formula, navigation: bool = True) -> set:
    """Least set containing ``f`` and closed under :func:`fl_successors`.

    Every fixpoint is unfolded once: the unfolding contains the fixpoint
    itself, which is already a member, so the worklist terminates.
    """
    return set(closure_in_order(f, navigation))


def closure_in_order(f: Formula, navigation: bool = True) -> list:
    seen = {f}
    order = [f]
    i = 0
    while i < len(order):
        for h in fl_successors(order[i], navigation):
            if h not in seen:
                seen.add(h)
                order.append(h)
        i += 1
    return order


@dataclass(frozen=True)
class PropEntry:
    name: str


@dataclass(frozen=True)
class ModalEntry:
    mod: Modality
    body: Formula


@dataclass(frozen=True)
class CountEntry:
    atom: Formula  # CountGt or CountLe

    @property
    def body(self):
        return self.atom.body

    @property
    def k(self):
        return self.atom.k

    @property
    def gt(self):
        return isinstance(self.atom, CountGt)


@dataclass(frozen=True)
class CounterBit:
    atom_id: int
    bit: int


@dataclass(frozen=True)
class FlagEntry:
    atom_id: int


class Lean:
    """Ordered lean entries for the NNF of a formula.

    Attributes of interest: ``entries`` (list), ``index`` (entry -> position),
    ``props``/``modal``/``atoms`` views, ``max_k``, ``counter_bits``,
    ``fresh`` (the extra proposition name).

    With ``navigation=False`` the navigation formulas attached to counting
    atoms are left out of the closure.  Nothing in the input refers to them,
    so the solver can drop them without changing any verdict.
    """

    def __init__(self, f: Formula, navigation: bool = True):
        self.formula = nnf(f)
        self.navigation = navigation
        self.closure = closure_in_order(self.formula, navigation)
        self.max_k = max_k(self.formula)
        self.fresh = fresh_prop("pfresh", set(propositions(self.formula)))

        props, modal, atoms = [], [], []
        for g in self.closure:
            if isinstance(g, Prop):
                if g.name not in props:
                    props.append(g.name)
            elif isinstance(g, Modal) and g.body is not TOP:
                modal.append(g)
            elif isinstance(g, (CountGt, CountLe)):
                atoms.append(g)
        self.prop_names = props
        self.modal_formulas = modal
        self.atoms = atoms
        self.counter_bits = self.max_k.bit_length() if atoms else 0

        entries = [PropEntry(p) for p in props]
        entries += [ModalEntry(g.mod, g.body) for g in modal]
        entries += [CountEntry(a) for a in atoms]
        for i in range(len(atoms)):
            entries += [CounterBit(i, b) for b in range(self.counter_bits)]
        entries += [FlagEntry(i) for i, a in enumerate(atoms) if isinstance(a, CountGt)]
        entries += [ModalEntry(m, TOP) for m in MODALITIES]
        entries.append(PropEntry(self.fresh))
        self.entries = entries
        self.index = {e: i for i, e in enumerate(entries)}

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __contains__(self, entry):
        return entry in self.index

    def modal_bodies(self, mod: Modality) -> list:
        """Bodies ``psi`` of lean entries ``<mod>psi``, ``T`` included last."""
        return [g.body for g in self.modal_formulas if g.mod is mod] + [TOP]

    def describe(self, entry) -> str:
        if isinstance(entry, PropEntry):
            return entry.name
        if isinstance(entry, ModalEntry):
            return str(Modal(entry.mod, entry.body))
        if isinstance(entry, CountEntry):
            return str(entry.atom)
        if isinstance(entry, CounterBit):
            return f"counter[{entry.atom_id}].bit{entry.bit}"
        return f"flag[{entry.atom_id}]"


def lean(f: Formula, navigation: bool = True) -> Lean:
    return Lean(f, navigation)
