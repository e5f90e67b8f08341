"""Compile global counting into plain two-way fixpoint formulas.

``c_k(f, k)`` holds at a node when at least ``k + 1`` nodes of its binary
subtree (the node, its descendants and its right siblings' subtrees) satisfy
``f``.  Evaluated at the root this counts the whole tree, which gives a
counting-free equivalent of ``#(f) > k``.  The formulas grow exponentially
with ``k``, so this is a cross-check, not a production path.
"""
from __future__ import annotations

from .formula import (
    And,
    CountGt,
    CountLe,
    Formula,
    Modal,
    Modality,
    Mu,
    Not,
    TOP,
    Or,
    Var,
    disj,
    nnf,
    rebuild,
)

DN, RT, UP, LF = Modality.DOWN, Modality.RIGHT, Modality.UP, Modality.LEFT

ROOT = And(Not(Modal(UP, TOP)), Not(Modal(LF, TOP)))
DEFAULT_MAX_K = 6


class ExpansionBoundExceeded(ValueError):
    pass


def _check(k: int, bound: int):
    if k < 0:
        raise ValueError("k must be non-negative")
    if k > bound:
        raise ExpansionBoundExceeded(f"k = {k} exceeds the expansion bound {bound}")


def c_k(f: Formula, k: int, bound: int = DEFAULT_MAX_K) -> Formula:
    """At least ``k + 1`` nodes of the binary subtree satisfy ``f``."""
    _check(k, bound)
    if f.free_vars:
        raise ValueError("counted formula must be closed")
    memo: dict = {}

    def c(i):
        if i in memo:
            return memo[i]
        x = Var("c")
        rec = Or(Modal(DN, x), Modal(RT, x))
        if i == 0:
            out = Mu("c", Or(f, rec))
        else:
            own = [Modal(DN, c(i - 1)), Modal(RT, c(i - 1))]
            own += [And(Modal(DN, c(k1)), Modal(RT, c(i - 2 - k1))) for k1 in range(i - 1)]
            split = [And(Modal(DN, c(k1)), Modal(RT, c(i - 1 - k1))) for k1 in range(i)]
            out = Mu("c", disj(And(f, disj(*own)), And(Not(f), disj(*split)), rec))
        memo[i] = out
        return out

    return c(k)


def counting_gt_free(f: Formula, k: int, bound: int = DEFAULT_MAX_K) -> Formula:
    """Counting-free formula equivalent to ``#(f) > k`` at every node."""
    x = Var("r")
    return Mu("r", disj(And(c_k(f, k, bound), ROOT), Modal(UP, x), Modal(LF, x)))


def eliminate_counting(f: Formula, bound: int = DEFAULT_MAX_K) -> Formula:
    """Replace every counting atom, innermost first; the result is in NNF."""

    def go(g):
        if isinstance(g, (CountGt, CountLe)):
            body = go(g.body)
            gt = counting_gt_free(body, g.k, bound)
            return gt if isinstance(g, CountGt) else Not(gt)
        if not g.children:
            return g
        return rebuild(g, [go(c) for c in g.children])

    return nnf(go(f))
