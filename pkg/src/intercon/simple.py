"""Simple semantics: minimal partial solutions, computed generatively.

Satisfaction binds exactly the variables a formula forces and nothing
else: ``true`` holds of the empty assignment only, an atom of the
singleton that makes it true, overlapping conjunction joins compatible
solutions of the two sides, additive conjunction keeps the assignments
both sides accept as they stand.  Dissolution (the negative judgement)
is computed alongside; negation swaps the two.

Under this discipline the two conjunctions genuinely differ, and the
firings of a constraint are the solutions of its simple form conjoined
(additively) with the firing guard: per sync pair the five shapes of
locally admissible flow, per remaining term variable an unconstrained
"bound or absent".  The guard's only effect is to drop solutions that
bind a datum at a port whose sync variable is false.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Optional

from .core import (
    TRUE,
    Additive,
    Assignment,
    EMPTY,
    ExtConstraint,
    ExtPred,
    Formula,
    Fun,
    Interpretation,
    Not,
    Overlap,
    Pred,
    SyncAtom,
    TrueF,
    Var,
    VarKind,
    VarT,
    adisj,
    conj,
    eq,
    eval_term,
    free_vars,
    instantiate,
    pair_closure,
    sorted_solutions,
    term_vars,
)
from .errors import PreconditionError

# ---------------------------------------------------------------------------
# Conversions between the constraint families


def to_simple(f: Formula, positive: bool = True) -> Formula:
    """Rewrite overlapping conjunction at negative positions to additive
    conjunction; the result dissolves the way the partial semantics
    refutes, while positive occurrences keep their joining behaviour.
    Idempotent."""
    if isinstance(f, (TrueF, SyncAtom, Pred, ExtPred)):
        return f
    if isinstance(f, Overlap):
        if positive:
            return Overlap(to_simple(f.left, True), to_simple(f.right, True))
        return Additive(to_simple(f.left, False), to_simple(f.right, False))
    if isinstance(f, Additive):
        return Additive(to_simple(f.left, positive), to_simple(f.right, positive))
    if isinstance(f, Not):
        return Not(to_simple(f.operand, not positive))
    if isinstance(f, ExtConstraint):
        # hole polarities are unknown until the body arrives; arguments are
        # converted when the instantiated body is solved
        return f
    raise PreconditionError(f"not a formula: {f!r}")


def to_partial(f: Formula) -> Formula:
    """Collapse additive conjunction back to overlapping conjunction; the
    partial and classical semantics do not distinguish them."""
    if isinstance(f, (TrueF, SyncAtom, Pred, ExtPred)):
        return f
    if isinstance(f, (Overlap, Additive)):
        return Overlap(to_partial(f.left), to_partial(f.right))
    if isinstance(f, Not):
        return Not(to_partial(f.operand))
    if isinstance(f, ExtConstraint):
        return ExtConstraint(
            f.name,
            tuple(to_partial(g) for g in f.formula_args),
            f.term_args,
            f.arg_order,
        )
    raise PreconditionError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Firing guards


def sfa(vars: Iterable[Var]) -> Formula:
    """Per sync variable, the additive disjunction of the five admissible
    local flow shapes: absent, flowing, silent, flowing with a datum, or a
    datum alone (its twin left to a neighbouring constraint)."""
    pieces = []
    for v in sorted({v for v in vars if v.kind is VarKind.SYNC}, key=Var.sort_key):
        twin = VarT(v.pair)
        pieces.append(
            adisj(
                TRUE,
                SyncAtom(v),
                Not(SyncAtom(v)),
                Overlap(SyncAtom(v), eq(twin, twin)),
                eq(twin, twin),
            )
        )
    return conj(*pieces)


def firing_guard(vars: Iterable[Var]) -> Formula:
    """The full guard over a variable pool: the sync flow axiom for the
    paired part plus, for every other term variable, an unconstrained
    "absent or bound" disjunct (state and communication variables carry no
    flow discipline of their own)."""
    pool = sorted(pair_closure(vars), key=Var.sort_key)
    pieces = []
    for v in pool:
        if v.kind is VarKind.SYNC:
            twin = VarT(v.pair)
            pieces.append(
                adisj(
                    TRUE,
                    SyncAtom(v),
                    Not(SyncAtom(v)),
                    Overlap(SyncAtom(v), eq(twin, twin)),
                    eq(twin, twin),
                )
            )
        elif v.kind is not VarKind.DATAFLOW:
            t = VarT(v)
            pieces.append(adisj(TRUE, eq(t, t)))
    return conj(*pieces)


def guard_ok(sigma: Assignment) -> bool:
    """Equivalent membership test for the firing guard's solutions: no
    datum may sit at a port whose sync variable is false."""
    for v in sigma:
        if v.kind is VarKind.DATAFLOW and sigma.get(v.pair) is False:
            return False
    return True


# ---------------------------------------------------------------------------
# Generation of solution and dissolution sets


class _Gen:
    """One traversal context: memoises per formula node, shares the
    interpretation, and enumerates atom instances over declared ranges."""

    def __init__(self, interp: Interpretation):
        self.interp = interp
        self._sols: dict = {}
        self._dis: dict = {}

    def sols(self, f: Formula) -> frozenset:
        got = self._sols.get(f)
        if got is not None:
            return got
        out = self._sols_raw(f)
        self._sols[f] = out
        return out

    def dis(self, f: Formula) -> frozenset:
        got = self._dis.get(f)
        if got is not None:
            return got
        out = self._dis_raw(f)
        self._dis[f] = out
        return out

    def _sols_raw(self, f: Formula) -> frozenset:
        if isinstance(f, TrueF):
            return frozenset((EMPTY,))
        if isinstance(f, SyncAtom):
            return frozenset((Assignment({f.var: True}),))
        if isinstance(f, Overlap):
            left = self.sols(f.left)
            right = self.sols(f.right)
            out = set()
            for a in left:
                for b in right:
                    if a.compatible(b):
                        out.add(a.union(b))
            return frozenset(out)
        if isinstance(f, Additive):
            return self.sols(f.left) & self.sols(f.right)
        if isinstance(f, Not):
            return self.dis(f.operand)
        if isinstance(f, (Pred, ExtPred)):
            return self._atom(f, want=True)
        if isinstance(f, ExtConstraint):
            inst = self._constraint_instance(f)
            if inst is None:
                return frozenset()
            return self.sols(to_simple(inst, positive=True))
        raise PreconditionError(f"not a formula: {f!r}")

    def _dis_raw(self, f: Formula) -> frozenset:
        if isinstance(f, TrueF):
            return frozenset()
        if isinstance(f, SyncAtom):
            return frozenset((Assignment({f.var: False}),))
        if isinstance(f, Overlap):
            # a dissolution of the conjunction dissolves a side under the
            # identity split, so the sides' dissolutions exhaust the
            # candidates; each must then survive every split
            cands = self.dis(f.left) | self.dis(f.right)
            left = self.dis(f.left)
            right = self.dis(f.right)
            return frozenset(
                s for s in cands if self._dissolves_all_splits(s, left, right)
            )
        if isinstance(f, Additive):
            return self.dis(f.left) | self.dis(f.right)
        if isinstance(f, Not):
            return self.sols(f.operand)
        if isinstance(f, (Pred, ExtPred)):
            return self._atom(f, want=False)
        if isinstance(f, ExtConstraint):
            inst = self._constraint_instance(f)
            if inst is None:
                return frozenset()
            return self.dis(to_simple(inst, positive=False))
        raise PreconditionError(f"not a formula: {f!r}")

    @staticmethod
    def _dissolves_all_splits(sigma: Assignment, left: frozenset, right: frozenset) -> bool:
        dom = sorted(sigma.domain, key=Var.sort_key)
        for shape in itertools.product((0, 1, 2), repeat=len(dom)):
            l = {}
            r = {}
            for v, side in zip(dom, shape):
                if side != 1:
                    l[v] = sigma.get(v)
                if side != 0:
                    r[v] = sigma.get(v)
            if Assignment(l) not in left and Assignment(r) not in right:
                return False
        return True

    def _constraint_instance(self, f: ExtConstraint) -> Optional[Formula]:
        body = self.interp.constraint_body(f.name)
        if body is None:
            return None
        return instantiate(body, f.formula_args, f.term_args)

    def _atom(self, f, want: bool) -> frozenset:
        vars = sorted(free_vars(f), key=Var.sort_key)
        ranges = [self.interp.range_of(v) for v in vars]
        out = set()
        external = isinstance(f, ExtPred)
        for combo in itertools.product(*ranges):
            sigma = Assignment(dict(zip(vars, combo)))
            vals = []
            for t in f.args:
                v = eval_term(sigma, self.interp, t)
                if v is None:
                    break
                vals.append(v)
            else:
                if external:
                    val = self.interp.ext_pred_value(f.name, tuple(vals))
                else:
                    val = self.interp.pred_value(f.name, tuple(vals))
                if val is want:
                    out.add(sigma)
        return frozenset(out)


# ---------------------------------------------------------------------------
# Public entry points


def simple_solutions(f: Formula, interp: Interpretation) -> tuple:
    """The satisfying assignments of ``f``, exactly as written (callers
    convert with to_simple when they start from an overlap-form source)."""
    return sorted_solutions(_Gen(interp).sols(f))


def simple_dissolutions(f: Formula, interp: Interpretation) -> tuple:
    """The dissolving assignments of ``f``."""
    return sorted_solutions(_Gen(interp).dis(f))


def simple_firings(f: Formula, interp: Interpretation) -> tuple:
    """Solutions of the simple form of ``f`` under the firing guard over
    its variable pool."""
    fs = to_simple(f)
    return tuple(s for s in simple_solutions(fs, interp) if guard_ok(s))


def is_simple_firing(sigma: Assignment, f: Formula, interp: Interpretation) -> bool:
    return sigma in set(simple_firings(f, interp))
