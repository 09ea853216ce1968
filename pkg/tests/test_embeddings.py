"""Moving assignments and interpretations between the three semantics:
NOFLOW stripping, totalisation with a default datum, the mandatory-flow
extension, and minimisation of partial firings to simple ones.
"""

from __future__ import annotations

import pytest

from conftest import (
    asg,
    interp,
    rand_formula,
    rand_interp,
    rand_surface_formula,
    rand_universe,
    universe,
)

from intercon.classical import enumerate_classical_firings, is_classical_firing
from intercon.core import NOFLOW, Assignment, Var, const, free_vars, pair_closure
from intercon.embeddings import (
    classical_to_partial,
    extend_p,
    interpretation_to_classical,
    interpretation_to_partial,
    minimize_to_simple,
    partial_to_classical,
)
from intercon.errors import PreconditionError
from intercon.netdsl import parse_formula
from intercon.partial import enumerate_partial_firings, is_partial_firing
from intercon.simple import is_simple_firing, simple_firings, to_partial

P = parse_formula

U2 = universe("d1", "d2")
I2 = interp(U2, {"p": {"d1": True, "d2": False}})
U3 = universe("d1", "d2", "d3")
I3 = interp(U3, {"p": {"d1": True, "d2": False, "d3": True}})

FILTER = P("(c -> a) & (c -> p(^c) & ^a = ^c) & (a & p(^a) -> c)")
LOSSY = P("(b -> a) & (b -> ^a = ^b)")

XPOOL = [Var.sync("x"), Var.dataflow("x")]


def noflow_asg(entries: dict, *flowless: str) -> Assignment:
    base = dict(asg(entries).items())
    for name in flowless:
        base[Var.dataflow(name)] = NOFLOW
    return Assignment(base)


# ---------------------------------------------------------------------------
# Classical -> partial


def test_stripping_drops_noflow_bindings_only():
    src = noflow_asg({"x": False}, "x")
    assert classical_to_partial(src) == asg({"x": False})
    kept = asg({"x": True, "^x": "d1"})
    assert classical_to_partial(kept) == kept


def test_stripping_the_idle_assignment():
    src = noflow_asg({"a": False, "c": False}, "a", "c")
    assert classical_to_partial(src) == asg({"a": False, "c": False})


# ---------------------------------------------------------------------------
# Partial -> classical


def test_totalisation_examples():
    assert partial_to_classical(asg({"x": True}), XPOOL, U2).render() == "{x=true,^x=d1}"
    assert partial_to_classical(asg({}), XPOOL, U2).render() == "{x=false,^x=NOFLOW}"
    assert partial_to_classical(asg({"x": False}), XPOOL, U2).render() == "{x=false,^x=NOFLOW}"


def test_totalisation_keeps_existing_data():
    got = partial_to_classical(asg({"x": True, "^x": "d2"}), XPOOL, U2)
    assert got.render() == "{x=true,^x=d2}"


def test_totalisation_default_datum():
    picky = universe("d1", "d2", default="d2")
    assert partial_to_classical(asg({"x": True}), XPOOL, picky).render() == "{x=true,^x=d2}"
    explicit = partial_to_classical(asg({"x": True}), XPOOL, U2, default=const("d2"))
    assert explicit.render() == "{x=true,^x=d2}"
    with pytest.raises(PreconditionError, match="not in universe"):
        partial_to_classical(asg({}), XPOOL, U2, default=const("d9"))


# ---------------------------------------------------------------------------
# Mandatory-flow extension


def test_extension_adds_the_sync_twin():
    assert extend_p(asg({"^a": "d1"})).render() == "{a=true,^a=d1}"


@pytest.mark.parametrize("entries", [{"a": True}, {"b": False}, {}])
def test_extension_leaves_flowless_assignments_alone(entries):
    assert extend_p(asg(entries)) == asg(entries)


def test_extension_refuses_a_datum_at_a_silent_port():
    with pytest.raises(PreconditionError, match="bound while"):
        extend_p(asg({"b": False, "^b": "d1"}))


# ---------------------------------------------------------------------------
# Minimisation


def test_minimize_drops_foreign_and_redundant_bindings():
    big = asg({"z": True, "a": True, "c": False, "^a": "d2"})
    got = minimize_to_simple(big, FILTER, I3)
    assert got.render() == "{^a=d2,c=false}"
    assert got.subset_of(big)
    assert is_simple_firing(got, FILTER, I3)


def test_minimize_the_empty_firing():
    assert minimize_to_simple(asg({}), P("true"), I3) == asg({})


def test_minimize_returns_none_when_nothing_qualifies():
    assert minimize_to_simple(asg({"c": True}), P("c -> a"), I2) is None


# ---------------------------------------------------------------------------
# Interpretation recodings


def test_classical_recoding_totalises_over_noflow():
    ic = interpretation_to_classical(I3)
    assert ic.universe.noflow_enabled
    assert ic.pred_value("p", (const("d1"),)) is True
    assert ic.pred_value("p", (NOFLOW,)) is False
    assert ic.pred_value("=", (NOFLOW, NOFLOW)) is True


def test_classical_recoding_refuses_partial_tables():
    with pytest.raises(PreconditionError, match="undefined"):
        interpretation_to_classical(interp(U3, {"p": {"d1": True}}))


def test_partial_recoding_inverts_the_classical_one():
    ic = interpretation_to_classical(I3)
    ip = interpretation_to_partial(ic)
    assert not ip.universe.noflow_enabled
    assert ip.internal_preds == I3.internal_preds


# ---------------------------------------------------------------------------
# Round trips (fixture formulas, then random ones)

FIXTURES = [
    (FILTER, I3),
    (LOSSY, I3),
    (P("c -> a"), I2),
    (P("^a = ^a"), I2),
    (P("x <-> y"), I2),
    (P("true"), I2),
]

# the strip direction needs every dataflow atom guarded by its sync
# variable: an atom like ^a = ^a is classically settled by NOFLOW = NOFLOW
# in an idle round, but stripping leaves it undefined
GUARDED = [
    (FILTER, I3),
    (LOSSY, I3),
    (P("c -> a"), I2),
    (P("a -> ^a = ^a"), I2),
    (P("x <-> y"), I2),
    (P("true"), I2),
]


@pytest.mark.parametrize("f, i", GUARDED, ids=["filter", "lossy", "impl", "eq", "iff", "true"])
def test_classical_firings_strip_to_partial_firings(f, i):
    ic = interpretation_to_classical(i)
    hits = 0
    for sigma in enumerate_classical_firings(f, ic):
        assert is_partial_firing(classical_to_partial(sigma), f, i)
        hits += 1
    assert hits > 0


def test_stripping_needs_the_flow_guard():
    # the unguarded atom: its idle classical firing has no partial image
    f = P("^a = ^a")
    ic = interpretation_to_classical(I2)
    idle = [s for s in enumerate_classical_firings(f, ic) if s.get(Var.sync("a")) is False]
    assert len(idle) == 1
    assert not is_partial_firing(classical_to_partial(idle[0]), f, I2)


@pytest.mark.parametrize("f, i", FIXTURES, ids=["filter", "lossy", "impl", "eq", "iff", "true"])
def test_partial_firings_totalise_to_classical_firings(f, i):
    ic = interpretation_to_classical(i)
    pool = pair_closure(free_vars(f))
    hits = 0
    for sigma in enumerate_partial_firings(f, i):
        back = partial_to_classical(sigma, pool, ic.universe)
        assert is_classical_firing(back, f, ic)
        hits += 1
    assert hits > 0


@pytest.mark.parametrize("f, i", FIXTURES, ids=["filter", "lossy", "impl", "eq", "iff", "true"])
def test_partial_firings_contain_simple_firings(f, i):
    for sigma in enumerate_partial_firings(f, i):
        small = minimize_to_simple(sigma, f, i)
        assert small is not None
        assert small.subset_of(sigma)
        assert is_simple_firing(small, f, i)


@pytest.mark.parametrize("f, i", FIXTURES, ids=["filter", "lossy", "impl", "eq", "iff", "true"])
def test_simple_firings_extend_to_partial_firings(f, i):
    fp = to_partial(f)
    for sigma in simple_firings(f, i):
        assert is_partial_firing(extend_p(sigma), fp, i)


def test_round_trips_on_random_formulas(rng):
    for _ in range(150):
        u = rand_universe(rng)
        i = rand_interp(rng, u)
        f = rand_surface_formula(rng, u)
        ic = interpretation_to_classical(i)
        pool = pair_closure(free_vars(f))
        for sigma in enumerate_classical_firings(f, ic):
            assert is_partial_firing(classical_to_partial(sigma), f, i)
        for sigma in enumerate_partial_firings(f, i):
            back = partial_to_classical(sigma, pool, ic.universe)
            assert is_classical_firing(back, f, ic)
            small = minimize_to_simple(sigma, f, i)
            assert small is not None and small.subset_of(sigma)
            assert is_simple_firing(small, f, i)


def test_totalisation_alone_works_outside_the_guarded_class(rng):
    # σ† needs no guard discipline: any partial firing totalises, even for
    # formulas with unguarded dataflow atoms or positive additives
    for _ in range(80):
        u = rand_universe(rng)
        i = rand_interp(rng, u)
        f = rand_formula(rng, u, depth=2)
        ic = interpretation_to_classical(i)
        pool = pair_closure(free_vars(f))
        for sigma in enumerate_partial_firings(f, i):
            back = partial_to_classical(sigma, pool, ic.universe)
            assert is_classical_firing(back, f, ic)
