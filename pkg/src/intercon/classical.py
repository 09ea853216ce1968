"""Classical (total, two-valued) semantics over a NOFLOW-extended universe.

Every variable in scope gets a value; "no data at port x" is expressed by
the distinguished datum NOFLOW together with the flow axiom
``!x <-> ^x = NOFLOW`` for every sync/dataflow pair.  Firings are the
total solutions of a constraint conjoined with the flow axiom over its
variable closure.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Optional

from .core import (
    NOFLOW,
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
    VarT,
    conj,
    contains_noflow,
    eq,
    eval_term,
    free_vars,
    iff,
    pair_closure,
)
from .errors import PreconditionError


def flow_axiom(vars: Iterable[Var]) -> Formula:
    """``!x <-> ^x = NOFLOW`` for each sync variable, conjoined."""
    pieces = []
    for v in sorted({v for v in vars if v.kind is VarKind.SYNC}, key=Var.sort_key):
        pieces.append(iff(Not(SyncAtom(v)), eq(VarT(v.pair), NOFLOW)))
    return conj(*pieces)


def _pred_value(interp: Interpretation, name: str, args: tuple) -> bool:
    # NOFLOW reaches ordinary predicates through enumeration; tables are
    # declared over proper data only, so such instances are false (equality
    # remains structural, NOFLOW = NOFLOW holds).
    if name != "=" and any(contains_noflow(a) for a in args):
        return False
    val = interp.pred_value(name, args)
    if val is None:
        raise PreconditionError(
            f"classical interpretation is partial: {name} undefined on "
            f"({', '.join(a.display() for a in args)})"
        )
    return val


def classical_sat(sigma: Assignment, interp: Interpretation, f: Formula) -> bool:
    """Two-valued satisfaction; requires sigma total on the free variables."""
    if isinstance(f, TrueF):
        return True
    if isinstance(f, SyncAtom):
        val = sigma.get(f.var)
        if val is None:
            raise PreconditionError(f"{f.var.display()} unassigned under a total semantics")
        return bool(val)
    if isinstance(f, (Overlap, Additive)):
        # the two conjunctions coincide classically
        return classical_sat(sigma, interp, f.left) and classical_sat(sigma, interp, f.right)
    if isinstance(f, Not):
        return not classical_sat(sigma, interp, f.operand)
    if isinstance(f, Pred):
        vals = []
        for t in f.args:
            v = eval_term(sigma, interp, t)
            if v is None:
                raise PreconditionError(
                    f"term {t.display()} undefined under a total semantics"
                )
            vals.append(v)
        return _pred_value(interp, f.name, tuple(vals))
    if isinstance(f, (ExtPred, ExtConstraint)):
        raise PreconditionError(
            "classical satisfaction is defined for internal vocabulary only"
        )
    raise PreconditionError(f"not a formula: {f!r}")


def enumerate_classical_firings(
    f: Formula,
    interp: Interpretation,
    vars: Optional[Iterable[Var]] = None,
) -> tuple:
    """All total assignments over the pair closure satisfying ``f`` plus the
    flow axiom.  Deterministic: variables by name, data in universe order
    with NOFLOW last, false before true."""
    if not interp.universe.noflow_enabled:
        raise PreconditionError("classical enumeration needs a classical-mode universe")
    pool = sorted(pair_closure(vars if vars is not None else free_vars(f)), key=Var.sort_key)
    goal = conj(f, flow_axiom(pool))
    out = []
    ranges = [_var_range(interp, v) for v in pool]
    for combo in itertools.product(*ranges):
        sigma = Assignment(dict(zip(pool, combo)))
        if classical_sat(sigma, interp, goal):
            out.append(sigma)
    return tuple(out)


def _var_range(interp: Interpretation, v: Var) -> tuple:
    if v.kind is VarKind.SYNC:
        return (False, True)
    return interp.range_of(v)


def is_classical_firing(
    sigma: Assignment,
    f: Formula,
    interp: Interpretation,
    vars: Optional[Iterable[Var]] = None,
) -> bool:
    """Total over the pair closure and satisfying ``f`` plus the flow axiom."""
    if not interp.universe.noflow_enabled:
        raise PreconditionError("classical firings need a classical-mode universe")
    pool = pair_closure(vars if vars is not None else free_vars(f))
    if not sigma.is_total_over(pool):
        return False
    return classical_sat(sigma, interp, conj(f, flow_axiom(pool)))
