"""Partial (three-valued) semantics: silent ports simply stay unassigned.

An assignment may leave variables out; a formula is then satisfied,
dissatisfied, or neither.  NOFLOW never appears here.  Firings are the
satisfying partial assignments that also respect mandatory flow: a bound
dataflow variable forces its sync twin to true.
"""

from __future__ import annotations

import itertools
from enum import Enum
from typing import Iterable, Optional

from .core import (
    Additive,
    Assignment,
    ExtConstraint,
    ExtPred,
    Formula,
    Interpretation,
    Not,
    Overlap,
    Pred,
    SyncAtom,
    TrueF,
    Var,
    VarKind,
    assignment_has_noflow,
    eval_term,
    free_vars,
    instantiate,
    pair_closure,
)
from .errors import PreconditionError, UnresolvedExternalError


class Truth3(Enum):
    SAT = 1
    UNDEF = 0
    DISSAT = -1


def partial_eval(sigma: Assignment, interp: Interpretation, f: Formula) -> Truth3:
    """Three-valued evaluation; anything touching an unbound variable or an
    unresolved external symbol comes out UNDEF."""
    if assignment_has_noflow(sigma):
        raise PreconditionError("NOFLOW has no place outside the classical semantics")
    return _eval(sigma, interp, f)


def _eval(sigma: Assignment, interp: Interpretation, f: Formula) -> Truth3:
    if isinstance(f, TrueF):
        return Truth3.SAT
    if isinstance(f, SyncAtom):
        val = sigma.get(f.var)
        if val is None:
            return Truth3.UNDEF
        return Truth3.SAT if val else Truth3.DISSAT
    if isinstance(f, (Overlap, Additive)):
        # the conjunctions coincide under the partial semantics
        l = _eval(sigma, interp, f.left)
        r = _eval(sigma, interp, f.right)
        if l is Truth3.DISSAT or r is Truth3.DISSAT:
            return Truth3.DISSAT
        if l is Truth3.SAT and r is Truth3.SAT:
            return Truth3.SAT
        return Truth3.UNDEF
    if isinstance(f, Not):
        inner = _eval(sigma, interp, f.operand)
        if inner is Truth3.SAT:
            return Truth3.DISSAT
        if inner is Truth3.DISSAT:
            return Truth3.SAT
        return Truth3.UNDEF
    if isinstance(f, (Pred, ExtPred)):
        vals = []
        for t in f.args:
            v = _eval_term(sigma, interp, t)
            if v is None:
                return Truth3.UNDEF
            vals.append(v)
        if isinstance(f, Pred):
            val = interp.pred_value(f.name, tuple(vals))
        else:
            try:
                val = interp.ext_pred_value(f.name, tuple(vals))
            except UnresolvedExternalError:
                val = None
        if val is None:
            return Truth3.UNDEF
        return Truth3.SAT if val else Truth3.DISSAT
    if isinstance(f, ExtConstraint):
        try:
            body = interp.constraint_body(f.name)
        except UnresolvedExternalError:
            body = None
        if body is None:
            return Truth3.UNDEF
        return _eval(sigma, interp, instantiate(body, f.formula_args, f.term_args))
    raise PreconditionError(f"not a formula: {f!r}")


def _eval_term(sigma, interp, t):
    try:
        return eval_term(sigma, interp, t)
    except UnresolvedExternalError:
        return None


def mfa_check(sigma: Assignment) -> bool:
    """A bound dataflow variable forces its sync twin to true."""
    for v in sigma:
        if v.kind is VarKind.DATAFLOW and sigma.get(v.pair) is not True:
            return False
    return True


def enumerate_partial_firings(
    f: Formula,
    interp: Interpretation,
    vars: Optional[Iterable[Var]] = None,
) -> tuple:
    """All partial assignments over the pair closure that satisfy ``f`` and
    respect mandatory flow.  Deterministic enumeration: variables by name,
    unbound first, then values (false before true, data in universe order)."""
    pool = sorted(pair_closure(vars if vars is not None else free_vars(f)), key=Var.sort_key)
    options = []
    for v in pool:
        if v.kind is VarKind.SYNC:
            options.append((None, False, True))
        else:
            options.append((None,) + tuple(interp.range_of(v)))
    out = []
    for combo in itertools.product(*options):
        sigma = Assignment({v: x for v, x in zip(pool, combo) if x is not None})
        if mfa_check(sigma) and _eval(sigma, interp, f) is Truth3.SAT:
            out.append(sigma)
    return tuple(out)


def is_partial_firing(sigma: Assignment, f: Formula, interp: Interpretation) -> bool:
    if assignment_has_noflow(sigma):
        raise PreconditionError("NOFLOW has no place outside the classical semantics")
    return mfa_check(sigma) and partial_eval(sigma, interp, f) is Truth3.SAT
