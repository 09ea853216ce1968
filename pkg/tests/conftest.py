"""Shared helpers for the test suite.

Small builders keep the test bodies close to the notation used in the
design discussions: ``asg({"a": True, "^a": "d1"})`` builds an assignment,
``universe("d1", "d2")`` a data universe, ``rand_formula`` a random formula
inside the supported fragment (no disjunction in positive position, no
NOFLOW literals).
"""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from intercon.core import (
    Additive,
    Assignment,
    Fun,
    Interpretation,
    Not,
    Overlap,
    Pred,
    TrueF,
    Universe,
    Var,
    VarT,
    adisj,
    const,
    disj,
    dvar,
    eq,
    implies,
    sync,
)
from intercon.netdsl import parse_term

HERE = Path(__file__).resolve().parent
NETS = HERE.parent / "nets"
GOLDEN = HERE / "golden"
MOCK_PLUGIN = HERE / "mock_plugin.py"


def var_of(key: str) -> Var:
    """Build a variable from its display syntax: a, ^a, state.p, state'.p, $k."""
    if key.startswith("^"):
        return Var.dataflow(key[1:])
    if key.startswith("state'."):
        return Var.state_next(key[len("state'.") :])
    if key.startswith("state."):
        return Var.state(key[len("state.") :])
    if key.startswith("$"):
        return Var.comm(key[1:])
    return Var.sync(key)


def asg(entries: dict) -> Assignment:
    """Assignment from display-syntax keys and bool/term-source values."""
    out = {}
    for key, val in entries.items():
        v = var_of(key)
        out[v] = val if isinstance(val, bool) else parse_term(val)
    return Assignment(out)


def universe(*names: str, default: str | None = None) -> Universe:
    return Universe(
        tuple(const(n) for n in names),
        default=const(default) if default else None,
    )


def interp(u: Universe, preds: dict | None = None) -> Interpretation:
    """Interpretation with string-keyed predicate tables:
    ``{"p": {"d1": True, "d2": False}}`` (unary) or tuple keys for wider."""
    tables = {}
    for name, rows in (preds or {}).items():
        table = {}
        for args, val in rows.items():
            if isinstance(args, str):
                args = (args,)
            table[tuple(const(a) for a in args)] = val
        tables[name] = table
    return Interpretation(u, internal_preds=tables)


# ---------------------------------------------------------------------------
# Random instances for the property suites


def rand_universe(rng: random.Random, max_data: int = 2) -> Universe:
    n = rng.randint(1, max_data)
    return universe(*[f"d{i+1}" for i in range(n)])


def rand_interp(rng: random.Random, u: Universe, pred_names=("p",)) -> Interpretation:
    tables = {}
    for name in pred_names:
        tables[name] = {(d,): rng.random() < 0.5 for d in u.data}
    inner = Interpretation(u, internal_preds=tables)
    return inner


def rand_formula(
    rng: random.Random,
    u: Universe,
    port_names=("x", "y"),
    pred_names=("p",),
    depth: int = 3,
):
    """A random formula in the supported fragment over the given ports.

    Disjunction appears only under negation; additive disjunction and both
    conjunctions appear anywhere.  Atoms mention sync variables, equalities
    between dataflow variables and data, and unary predicate applications.
    """

    def atom():
        pick = rng.randrange(6)
        x = rng.choice(port_names)
        y = rng.choice(port_names)
        if pick == 0:
            return TrueF()
        if pick == 1:
            return sync(x)
        if pick == 2:
            return eq(VarT(Var.dataflow(x)), rng.choice(list(u.data)))
        if pick == 3:
            return eq(VarT(Var.dataflow(x)), VarT(Var.dataflow(y)))
        if pick == 4:
            return Pred(rng.choice(pred_names), (VarT(Var.dataflow(x)),))
        return Not(sync(x))

    def build(d: int):
        if d <= 0:
            return atom()
        pick = rng.randrange(7)
        if pick == 0:
            return atom()
        if pick == 1:
            return Not(build(d - 1))
        if pick == 2:
            return Overlap(build(d - 1), build(d - 1))
        if pick == 3:
            return Additive(build(d - 1), build(d - 1))
        if pick == 4:
            return adisj(build(d - 1), build(d - 1))
        if pick == 5:
            return implies(build(d - 1), build(d - 1))
        return Not(disj(build(d - 1), build(d - 1)))

    return build(depth)


def rand_surface_formula(
    rng: random.Random,
    u: Universe,
    port_names=("x", "y"),
    pred_names=("p",),
):
    """A random connector-style constraint: an overlap-conjunction of
    clauses, each either a pure synchronisation shape or a payload clause
    guarded by the sync variables of every port it mentions.  Dataflow
    terms never appear unguarded, and the additive connectives occur only
    under negation — the shape every fixture constraint has, and the class
    the embedding lemmas quantify over.
    """
    ports = list(port_names)

    def sync_atom():
        x = rng.choice(ports)
        return sync(x) if rng.random() < 0.7 else Not(sync(x))

    def sync_shape(d=2, positive=True):
        # polarity discipline of the simple fragment: ⩔ only at positive
        # positions, ∨ only at negative ones; ∧ and atoms anywhere
        if d <= 0 or rng.random() < 0.4:
            return sync_atom()
        pick = rng.randrange(4)
        if pick == 0:
            return Overlap(sync_shape(d - 1, positive), sync_shape(d - 1, positive))
        if pick == 1:
            return implies(sync_shape(d - 1, not positive), sync_shape(d - 1, positive))
        if pick == 2 and positive:
            return Not(disj(sync_shape(d - 1, False), sync_shape(d - 1, False)))
        if positive:
            return adisj(sync_shape(d - 1, True), sync_shape(d - 1, True))
        return sync_atom()

    def payload_atom(x, y):
        pick = rng.randrange(3)
        if pick == 0:
            return eq(VarT(Var.dataflow(x)), rng.choice(list(u.data)))
        if pick == 1:
            return Pred(rng.choice(pred_names), (VarT(Var.dataflow(x)),))
        return eq(VarT(Var.dataflow(x)), VarT(Var.dataflow(y)))

    def payload(x, y):
        a = payload_atom(x, y)
        if rng.random() < 0.3:
            a = Not(a)
        if rng.random() < 0.4:
            b = payload_atom(x, y)
            return Overlap(a, b) if rng.random() < 0.5 else adisj(a, b)
        return a

    def clause():
        pick = rng.randrange(3)
        if pick == 0:
            return sync_shape()
        x, y = rng.choice(ports), rng.choice(ports)
        guard = sync(x) if x == y else Overlap(sync(x), sync(y))
        return implies(guard, payload(x, y))

    f = clause()
    for _ in range(rng.randrange(3)):
        f = Overlap(f, clause())
    return f


@pytest.fixture
def rng():
    return random.Random(20260814)
