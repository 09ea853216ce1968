"""Total-assignment semantics: satisfaction, flow axiom, firing enumeration."""

import pytest

from conftest import asg, interp, universe
from intercon.classical import (
    classical_sat,
    enumerate_classical_firings,
    flow_axiom,
    is_classical_firing,
)
from intercon.core import NOFLOW, Assignment, Interpretation, TrueF, Var, const
from intercon.errors import PreconditionError
from intercon.netdsl import format_formula, parse_formula
from intercon.oracle import oracle_classical_firings

U2 = universe("d1", "d2").classical()
I2 = interp(universe("d1", "d2"))
I2 = Interpretation(U2, I2.internal_preds)
U3 = universe("d1", "d2", "d3").classical()
P_TABLE = {"p": {"d1": True, "d2": False, "d3": True}}
_I3 = interp(universe("d1", "d2", "d3"), P_TABLE)
I3 = Interpretation(U3, _I3.internal_preds)
FILTER = parse_formula("(c -> a) & (c -> p(^c) & ^a = ^c) & (a & p(^a) -> c)")


def noflow(entries: dict) -> Assignment:
    """asg() plus NOFLOW values spelled as None."""
    out = dict(asg({k: v for k, v in entries.items() if v is not None}).items())
    for k, v in entries.items():
        if v is None:
            out[Var.dataflow(k[1:])] = NOFLOW
    return Assignment(out)


# ---------------------------------------------------------------------------
# Satisfaction


def test_sat_sync_atom():
    assert classical_sat(asg({"x": True, "^x": "d1"}), I2, parse_formula("x"))


def test_sat_negation():
    assert not classical_sat(asg({"x": True, "^x": "d1"}), I2, parse_formula("!x"))


def test_sat_filter_flow():
    sigma = asg({"a": True, "c": True, "^a": "d1", "^c": "d1"})
    assert classical_sat(sigma, I3, FILTER)


def test_sat_requires_total_assignment():
    # totality is judged against the free variables of the formula
    assert classical_sat(asg({"x": True}), I2, parse_formula("x"))
    with pytest.raises(PreconditionError):
        classical_sat(asg({"x": True}), I2, parse_formula("x & ^x = d1"))


def test_sat_requires_total_predicate_tables():
    partial_p = interp(U2, {"p": {"d1": True}})  # d2 unmapped
    sigma = asg({"x": True, "^x": "d2"})
    with pytest.raises(PreconditionError):
        classical_sat(sigma, partial_p, parse_formula("x -> p(^x)"))


def test_both_conjunctions_coincide_classically():
    over = parse_formula("x & !y")
    add = parse_formula("x && !y")
    for sx in (False, True):
        for sy in (False, True):
            sigma = noflow(
                {
                    "x": sx,
                    "^x": "d1" if sx else None,
                    "y": sy,
                    "^y": "d1" if sy else None,
                }
            )
            assert classical_sat(sigma, I2, over) == classical_sat(sigma, I2, add)


# ---------------------------------------------------------------------------
# Flow axiom


def test_flow_axiom_empty():
    assert isinstance(flow_axiom([]), TrueF)


def test_flow_axiom_single_port():
    f = flow_axiom([Var.sync("a")])
    assert format_formula(f) == "!(!a & !^a = NOFLOW) & !(^a = NOFLOW & !!a)"


def test_flow_axiom_truth_table():
    f = flow_axiom([Var.sync("x")])
    table = {
        (True, "d1"): True,
        (False, None): True,
        (True, None): False,
        (False, "d1"): False,
    }
    for (s, d), expect in table.items():
        sigma = noflow({"x": s, "^x": d})
        assert classical_sat(sigma, I2, f) == expect, (s, d)


# ---------------------------------------------------------------------------
# Firing enumeration (expected sets frozen from the brute-force oracle)


def test_firings_of_true_over_one_port():
    pool = [Var.sync("x"), Var.dataflow("x")]
    got = enumerate_classical_firings(TrueF(), I2, pool)
    assert got == (
        noflow({"x": False, "^x": None}),
        noflow({"x": True, "^x": "d1"}),
        noflow({"x": True, "^x": "d2"}),
    )


def test_firings_of_contradiction():
    assert enumerate_classical_firings(parse_formula("x && !x"), I2) == ()


def test_filter_firings_match_frozen_oracle_set():
    got = enumerate_classical_firings(FILTER, I3)
    assert tuple(s.render() for s in got) == (
        "{a=false,^a=NOFLOW,c=false,^c=NOFLOW}",
        "{a=true,^a=d1,c=true,^c=d1}",
        "{a=true,^a=d2,c=false,^c=NOFLOW}",
        "{a=true,^a=d3,c=true,^c=d3}",
    )


def test_partial_map_with_noflow_is_not_a_firing():
    # the paper's counterexample: flow on c with the NOFLOW datum
    sigma = noflow({"c": True, "^c": None})
    assert not is_classical_firing(sigma, FILTER, I3)


def test_every_firing_satisfies_flow_axiom_pointwise():
    for sigma in enumerate_classical_firings(FILTER, I3):
        for v, val in sigma.items():
            if v.kind is not v.kind.SYNC:
                continue
            datum = sigma.get(v.pair)
            assert (val is True) == (datum != NOFLOW)


def test_enumeration_is_deterministic_and_total():
    a, b = (
        enumerate_classical_firings(FILTER, I3),
        enumerate_classical_firings(FILTER, I3),
    )
    assert a == b
    pool = frozenset({Var.sync("a"), Var.dataflow("a"), Var.sync("c"), Var.dataflow("c")})
    for sigma in a:
        assert sigma.domain == pool


def test_matches_oracle_on_fixture():
    assert enumerate_classical_firings(FILTER, I3) == oracle_classical_firings(FILTER, I3)
