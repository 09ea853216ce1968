"""Recodings between the classical and partial views of the same behaviour.

A classical firing says "no data at x" with ``^x = NOFLOW``; a partial
firing says it by leaving ``^x`` out.  The maps here translate
assignments and interpretations between the two conventions; the formula
conversions (`to_simple`, `to_partial`) live with the simple semantics.
"""

from __future__ import annotations

from typing import Iterable

from .core import (
    NOFLOW,
    Assignment,
    Formula,
    Interpretation,
    Term,
    Universe,
    Var,
    VarKind,
    contains_noflow,
    pair_closure,
)
from .errors import PreconditionError


def classical_to_partial(sigma: Assignment) -> Assignment:
    """Drop NOFLOW bindings; everything else carries over unchanged."""
    return Assignment(
        {v: x for v, x in sigma.items() if not (isinstance(x, Term) and contains_noflow(x))}
    )


def partial_to_classical(
    sigma: Assignment,
    vars: Iterable[Var],
    universe: Universe,
    default: Term | None = None,
) -> Assignment:
    """Complete a partial assignment over a variable pool: unbound sync
    variables become false; an unbound dataflow variable becomes NOFLOW,
    unless its sync twin is true, in which case it takes the default datum
    (flow with an unconstrained payload has to carry something).  Other
    kinds carry over as they are."""
    if default is None:
        default = universe.default_datum
    if default not in universe:
        raise PreconditionError(f"default datum {default.display()} not in universe")
    out = dict(sigma.items())
    for v in pair_closure(vars):
        if v in out:
            continue
        if v.kind is VarKind.SYNC:
            out[v] = False
        elif v.kind is VarKind.DATAFLOW:
            out[v] = default if out.get(v.pair) is True else NOFLOW
    return Assignment(out)


def extend_p(sigma: Assignment) -> Assignment:
    """The mandatory-flow view of a partial assignment: a bound dataflow
    variable forces its sync twin to true.  Used when asking whether a
    partial assignment communicates flow at a port."""
    out = dict(sigma.items())
    for v in sigma:
        if v.kind is VarKind.DATAFLOW:
            twin = v.pair
            if sigma.get(twin) is False:
                raise PreconditionError(
                    f"{v.display()} bound while {twin.display()} is false"
                )
            out[twin] = True
    return Assignment(out)


def minimize_to_simple(
    sigma: Assignment, f: Formula, interp: Interpretation
) -> Assignment | None:
    """The smallest subset of a partial firing that is a simple firing of
    the same formula, or None when no subset qualifies (for genuine
    partial firings one always exists)."""
    from .simple import simple_firings

    inside = [s for s in simple_firings(f, interp) if s.subset_of(sigma)]
    if not inside:
        return None
    return min(inside, key=lambda s: (len(s), s.sort_key()))


def interpretation_to_partial(interp: Interpretation) -> Interpretation:
    """Forget the NOFLOW rows of every internal predicate table and switch
    the universe out of classical mode."""
    tables = {}
    for name, table in interp.internal_preds.items():
        tables[name] = {
            args: val
            for args, val in table.items()
            if not any(contains_noflow(a) for a in args)
        }
    uni = Universe(interp.universe.data, False, interp.universe.default)
    return Interpretation(uni, tables, interp.ranges)


def interpretation_to_classical(interp: Interpretation) -> Interpretation:
    """Totalise every internal predicate table over the NOFLOW-extended
    universe: instances mentioning NOFLOW become false, instances over
    proper data must already be present."""
    uni = interp.universe.classical()
    values = tuple(uni.data) + (NOFLOW,)
    tables = {}
    for name, table in interp.internal_preds.items():
        if not table:
            raise PreconditionError(f"cannot infer the arity of empty table {name!r}")
        arity = len(next(iter(table)))
        full = dict(table)
        _complete(full, name, arity, values)
        tables[name] = full
    return Interpretation(uni, tables, interp.ranges)


def _complete(table: dict, name: str, arity: int, values: tuple) -> None:
    import itertools

    for args in itertools.product(values, repeat=arity):
        if args in table:
            continue
        if any(contains_noflow(a) for a in args):
            table[args] = False
        else:
            raise PreconditionError(
                f"partial table {name!r} undefined on "
                f"({', '.join(a.display() for a in args)})"
            )
