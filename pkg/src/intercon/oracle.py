"""Slow, independent re-derivations of every firing notion, for testing.

Everything here decides satisfaction recursively from the definitions
(existential/universal splits for the two conjunctions, truth tables for
the classical and three-valued readings) and enumerates candidate
assignments exhaustively.  None of the generation machinery in
`simple`/`classical`/`partial`/`locality` is reused; agreement between
the two routes is what the test suite checks.

Exhaustive enumeration is exponential, so the entry points refuse pools
beyond a small bound rather than degrade silently.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Optional

from .core import (
    NOFLOW,
    TRUE,
    Additive,
    Assignment,
    EMPTY,
    ExtConstraint,
    ExtPred,
    Formula,
    Fun,
    ExtFun,
    Interpretation,
    Not,
    Overlap,
    Pred,
    SyncAtom,
    Term,
    TrueF,
    Var,
    VarKind,
    VarT,
    _NoFlow,
    contains_noflow,
    eq,
    free_vars,
    instantiate,
    pair_closure,
    sorted_solutions,
    term_vars,
)
from .errors import PreconditionError

MAX_POOL = 6
MAX_DATA = 3
MAX_BLOCKS = 4


def _check_pool(pool: Iterable[Var], interp: Interpretation) -> list:
    pool = sorted(set(pool), key=Var.sort_key)
    if len(pool) > MAX_POOL:
        raise PreconditionError(
            f"oracle refuses {len(pool)} variables (cap {MAX_POOL}); "
            "use a smaller fragment"
        )
    if len(interp.universe.data) > MAX_DATA:
        raise PreconditionError(
            f"oracle refuses {len(interp.universe.data)} data values (cap {MAX_DATA})"
        )
    return pool


# ---------------------------------------------------------------------------
# Classical


def _c_term(sigma: Assignment, t: Term) -> Term:
    if isinstance(t, _NoFlow):
        return t
    if isinstance(t, VarT):
        val = sigma.get(t.var)
        if not isinstance(val, Term):
            raise PreconditionError(f"{t.var.display()} unassigned")
        return val
    if isinstance(t, Fun):
        args = tuple(_c_term(sigma, a) for a in t.args)
        if any(contains_noflow(a) for a in args):
            return NOFLOW
        return Fun(t.name, args)
    raise PreconditionError("classical oracle handles internal vocabulary only")


def _c_eval(sigma: Assignment, interp: Interpretation, f: Formula) -> bool:
    if isinstance(f, TrueF):
        return True
    if isinstance(f, SyncAtom):
        val = sigma.get(f.var)
        if val is None:
            raise PreconditionError(f"{f.var.display()} unassigned")
        return bool(val)
    if isinstance(f, (Overlap, Additive)):
        return _c_eval(sigma, interp, f.left) and _c_eval(sigma, interp, f.right)
    if isinstance(f, Not):
        return not _c_eval(sigma, interp, f.operand)
    if isinstance(f, Pred):
        args = tuple(_c_term(sigma, a) for a in f.args)
        if f.name == "=":
            return args[0] == args[1]
        if any(contains_noflow(a) for a in args):
            return False
        val = interp.pred_value(f.name, args)
        if val is None:
            raise PreconditionError(f"{f.name} undefined on {args!r}")
        return val
    raise PreconditionError("classical oracle handles internal vocabulary only")


def _c_flow_ok(sigma: Assignment) -> bool:
    for v in sigma:
        if v.kind is VarKind.SYNC:
            silent = sigma.get(v) is False
            noflow = sigma.get(v.pair) == NOFLOW
            if silent != noflow:
                return False
    return True


def oracle_classical_firings(
    f: Formula, interp: Interpretation, vars: Optional[Iterable[Var]] = None
) -> tuple:
    pool = _check_pool(pair_closure(vars if vars is not None else free_vars(f)), interp)
    data = tuple(interp.universe.data)
    out = []
    ranges = []
    for v in pool:
        if v.kind is VarKind.SYNC:
            ranges.append((False, True))
        elif v.kind is VarKind.DATAFLOW:
            ranges.append(data + (NOFLOW,))
        else:
            ranges.append(tuple(interp.range_of(v)))
    for combo in itertools.product(*ranges):
        sigma = Assignment(dict(zip(pool, combo)))
        if _c_flow_ok(sigma) and _c_eval(sigma, interp, f):
            out.append(sigma)
    return sorted_solutions(out)


# ---------------------------------------------------------------------------
# Partial (three-valued: 1 sat, -1 dissat, 0 neither)


def _p_term(sigma: Assignment, interp: Interpretation, t: Term) -> Optional[Term]:
    if isinstance(t, VarT):
        val = sigma.get(t.var)
        return val if isinstance(val, Term) else None
    if isinstance(t, Fun):
        args = []
        for a in t.args:
            v = _p_term(sigma, interp, a)
            if v is None:
                return None
            args.append(v)
        return Fun(t.name, tuple(args))
    if isinstance(t, ExtFun):
        args = []
        for a in t.args:
            v = _p_term(sigma, interp, a)
            if v is None:
                return None
            args.append(v)
        return interp.ext_fun_value(t.name, tuple(args))
    raise PreconditionError(f"not a partial-mode term: {t!r}")


def _p_eval(sigma: Assignment, interp: Interpretation, f: Formula) -> int:
    if isinstance(f, TrueF):
        return 1
    if isinstance(f, SyncAtom):
        val = sigma.get(f.var)
        if val is None:
            return 0
        return 1 if val else -1
    if isinstance(f, (Overlap, Additive)):
        l = _p_eval(sigma, interp, f.left)
        r = _p_eval(sigma, interp, f.right)
        return min(l, r) if (l > -1 and r > -1) else -1
    if isinstance(f, Not):
        return -_p_eval(sigma, interp, f.operand)
    if isinstance(f, (Pred, ExtPred)):
        args = []
        for t in f.args:
            v = _p_term(sigma, interp, t)
            if v is None:
                return 0
            args.append(v)
        if isinstance(f, Pred):
            val = interp.pred_value(f.name, tuple(args))
        else:
            val = interp.ext_pred_value(f.name, tuple(args))
        if val is None:
            return 0
        return 1 if val else -1
    if isinstance(f, ExtConstraint):
        body = interp.constraint_body(f.name)
        if body is None:
            return 0
        return _p_eval(sigma, interp, instantiate(body, f.formula_args, f.term_args))
    raise PreconditionError(f"not a formula: {f!r}")


def _p_mandatory(sigma: Assignment) -> bool:
    return all(
        sigma.get(v.pair) is True
        for v in sigma
        if v.kind is VarKind.DATAFLOW
    )


def _partial_options(pool: list, interp: Interpretation) -> list:
    options = []
    for v in pool:
        if v.kind is VarKind.SYNC:
            options.append((None, False, True))
        else:
            options.append((None,) + tuple(interp.range_of(v)))
    return options


def oracle_partial_firings(
    f: Formula, interp: Interpretation, vars: Optional[Iterable[Var]] = None
) -> tuple:
    pool = _check_pool(pair_closure(vars if vars is not None else free_vars(f)), interp)
    out = []
    for combo in itertools.product(*_partial_options(pool, interp)):
        sigma = Assignment({v: x for v, x in zip(pool, combo) if x is not None})
        if _p_mandatory(sigma) and _p_eval(sigma, interp, f) == 1:
            out.append(sigma)
    return sorted_solutions(out)


# ---------------------------------------------------------------------------
# Simple


def _o_convert(f: Formula, positive: bool) -> Formula:
    """The oracle's own overlap-to-additive rewrite at negative positions."""
    if isinstance(f, (TrueF, SyncAtom, Pred, ExtPred, ExtConstraint)):
        return f
    if isinstance(f, Overlap):
        l = _o_convert(f.left, positive)
        r = _o_convert(f.right, positive)
        return Overlap(l, r) if positive else Additive(l, r)
    if isinstance(f, Additive):
        return Additive(_o_convert(f.left, positive), _o_convert(f.right, positive))
    if isinstance(f, Not):
        return Not(_o_convert(f.operand, not positive))
    raise PreconditionError(f"not a formula: {f!r}")


def _o_or(a: Formula, b: Formula) -> Formula:
    return Not(Additive(Not(a), Not(b)))


def _o_guard(pool: Iterable[Var]) -> Formula:
    """The oracle's own firing guard over a variable pool."""
    guard: Formula = TRUE
    first = True
    for v in sorted(pair_closure(pool), key=Var.sort_key):
        if v.kind is VarKind.SYNC:
            twin = VarT(v.pair)
            piece = _o_or(
                _o_or(_o_or(_o_or(TRUE, SyncAtom(v)), Not(SyncAtom(v))), Overlap(SyncAtom(v), eq(twin, twin))),
                eq(twin, twin),
            )
        elif v.kind is VarKind.DATAFLOW:
            continue
        else:
            t = VarT(v)
            piece = _o_or(TRUE, eq(t, t))
        guard = piece if first else Overlap(guard, piece)
        first = False
    return guard


class _SimpleDecider:
    """Decides the satisfaction/dissolution judgements recursively; splits
    for the overlapping conjunction are memoised on (formula, assignment)."""

    def __init__(self, interp: Interpretation):
        self.interp = interp
        self._sat: dict = {}
        self._dis: dict = {}
        self._efv: dict = {}

    # effective free variables: None when unknown (unresolved constraint)
    def efv(self, f: Formula) -> Optional[frozenset]:
        got = self._efv.get(f, "miss")
        if got != "miss":
            return got
        out: Optional[frozenset]
        if isinstance(f, ExtConstraint):
            body = self.interp.constraint_body(f.name)
            if body is None:
                out = None
            else:
                out = self.efv(instantiate(body, f.formula_args, f.term_args))
        elif isinstance(f, (Overlap, Additive)):
            l = self.efv(f.left)
            r = self.efv(f.right)
            out = None if l is None or r is None else l | r
        elif isinstance(f, Not):
            out = self.efv(f.operand)
        else:
            out = free_vars(f)
        self._efv[f] = out
        return out

    def sat(self, sigma: Assignment, f: Formula) -> bool:
        key = (f, sigma)
        got = self._sat.get(key)
        if got is None:
            got = self._sat_raw(sigma, f)
            self._sat[key] = got
        return got

    def dis(self, sigma: Assignment, f: Formula) -> bool:
        key = (f, sigma)
        got = self._dis.get(key)
        if got is None:
            got = self._dis_raw(sigma, f)
            self._dis[key] = got
        return got

    def _sat_raw(self, sigma: Assignment, f: Formula) -> bool:
        if isinstance(f, TrueF):
            return len(sigma) == 0
        if isinstance(f, SyncAtom):
            return len(sigma) == 1 and sigma.get(f.var) is True
        if isinstance(f, Overlap):
            return self._exists_split(sigma, f.left, f.right)
        if isinstance(f, Additive):
            return self.sat(sigma, f.left) and self.sat(sigma, f.right)
        if isinstance(f, Not):
            return self.dis(sigma, f.operand)
        if isinstance(f, (Pred, ExtPred)):
            return self._atom(sigma, f, want=True)
        if isinstance(f, ExtConstraint):
            body = self.interp.constraint_body(f.name)
            if body is None:
                return False
            inst = instantiate(body, f.formula_args, f.term_args)
            return self.sat(sigma, _o_convert(inst, True))
        raise PreconditionError(f"not a formula: {f!r}")

    def _dis_raw(self, sigma: Assignment, f: Formula) -> bool:
        if isinstance(f, TrueF):
            return False
        if isinstance(f, SyncAtom):
            return len(sigma) == 1 and sigma.get(f.var) is False
        if isinstance(f, Overlap):
            return self._all_splits_dissolve(sigma, f.left, f.right)
        if isinstance(f, Additive):
            return self.dis(sigma, f.left) or self.dis(sigma, f.right)
        if isinstance(f, Not):
            return self.sat(sigma, f.operand)
        if isinstance(f, (Pred, ExtPred)):
            return self._atom(sigma, f, want=False)
        if isinstance(f, ExtConstraint):
            body = self.interp.constraint_body(f.name)
            if body is None:
                return False
            inst = instantiate(body, f.formula_args, f.term_args)
            return self.dis(sigma, _o_convert(inst, False))
        raise PreconditionError(f"not a formula: {f!r}")

    def _exists_split(self, sigma: Assignment, l: Formula, r: Formula) -> bool:
        dom = sorted(sigma.domain, key=Var.sort_key)
        fl = self.efv(l)
        fr = self.efv(r)
        if fl is not None and fr is not None:
            if any(v not in fl and v not in fr for v in dom):
                return False
            shared = [v for v in dom if v in fl and v in fr]
            base_l = {v: sigma.get(v) for v in dom if v in fl and v not in fr}
            base_r = {v: sigma.get(v) for v in dom if v in fr and v not in fl}
        else:
            shared = dom
            base_l = {}
            base_r = {}
        for shape in itertools.product((0, 1, 2), repeat=len(shared)):
            lm = dict(base_l)
            rm = dict(base_r)
            for v, side in zip(shared, shape):
                if side != 1:
                    lm[v] = sigma.get(v)
                if side != 0:
                    rm[v] = sigma.get(v)
            if self.sat(Assignment(lm), l) and self.sat(Assignment(rm), r):
                return True
        return False

    def _all_splits_dissolve(self, sigma: Assignment, l: Formula, r: Formula) -> bool:
        dom = sorted(sigma.domain, key=Var.sort_key)
        for shape in itertools.product((0, 1, 2), repeat=len(dom)):
            lm = {}
            rm = {}
            for v, side in zip(dom, shape):
                if side != 1:
                    lm[v] = sigma.get(v)
                if side != 0:
                    rm[v] = sigma.get(v)
            if not self.dis(Assignment(lm), l) and not self.dis(Assignment(rm), r):
                return False
        return True

    def _atom(self, sigma: Assignment, f, want: bool) -> bool:
        if sigma.domain != free_vars(f):
            return False
        args = []
        for t in f.args:
            v = _p_term(sigma, self.interp, t)
            if v is None:
                return False
            args.append(v)
        if isinstance(f, ExtPred):
            val = self.interp.ext_pred_value(f.name, tuple(args))
        else:
            val = self.interp.pred_value(f.name, tuple(args))
        return val is want


def oracle_simple_solutions(
    f: Formula, interp: Interpretation, vars: Optional[Iterable[Var]] = None
) -> tuple:
    d = _SimpleDecider(interp)
    scope = d.efv(f)
    if scope is None:
        raise PreconditionError("cannot scope a formula with unresolved constraints")
    pool = _check_pool(vars if vars is not None else scope, interp)
    out = []
    for combo in itertools.product(*_partial_options(pool, interp)):
        sigma = Assignment({v: x for v, x in zip(pool, combo) if x is not None})
        if d.sat(sigma, f):
            out.append(sigma)
    return sorted_solutions(out)


def oracle_simple_firings(
    f: Formula, interp: Interpretation, vars: Optional[Iterable[Var]] = None
) -> tuple:
    d = _SimpleDecider(interp)
    scope = d.efv(f)
    if scope is None:
        raise PreconditionError("cannot scope a formula with unresolved constraints")
    pool = _check_pool(vars if vars is not None else scope, interp)
    target = Additive(_o_convert(f, True), _o_guard(pool))
    out = []
    for combo in itertools.product(*_partial_options(pool, interp)):
        sigma = Assignment({v: x for v, x in zip(pool, combo) if x is not None})
        if d.sat(sigma, target):
            out.append(sigma)
    return sorted_solutions(out)


def oracle_is_simple_firing(sigma: Assignment, f: Formula, interp: Interpretation) -> bool:
    """Single decision, no enumeration: usable beyond the pool cap."""
    d = _SimpleDecider(interp)
    scope = d.efv(f)
    pool = scope if scope is not None else sigma.domain
    target = Additive(_o_convert(f, True), _o_guard(pool))
    return d.sat(sigma, target)


# ---------------------------------------------------------------------------
# Local


def oracle_local_firings(config, interp: Interpretation) -> tuple:
    blocks = list(config)
    if len(blocks) > MAX_BLOCKS:
        raise PreconditionError(
            f"oracle refuses {len(blocks)} blocks (cap {MAX_BLOCKS})"
        )
    d = _SimpleDecider(interp)
    fvs = []
    for b in blocks:
        s = d.efv(b.formula)
        if s is None:
            raise PreconditionError("cannot scope blocks with unresolved constraints")
        fvs.append(s)
    pool = _check_pool(frozenset().union(*fvs) if fvs else frozenset(), interp)

    def border(region: frozenset) -> frozenset:
        inside: frozenset = frozenset()
        outside: frozenset = frozenset()
        for j, s in enumerate(fvs):
            if j in region:
                inside |= s
            else:
                outside |= s
        return inside & outside

    def flow_at(sigma: Assignment, v: Var) -> bool:
        return sigma.get(v) is True or v.pair in sigma

    def region_ok(tau: Assignment, region: frozenset) -> bool:
        fs = [blocks[j].formula for j in sorted(region)]
        goal = fs[0]
        for g in fs[1:]:
            goal = Overlap(goal, g)
        scope = frozenset().union(*(fvs[j] for j in region))
        target = Additive(_o_convert(goal, True), _o_guard(scope))
        if not d.sat(tau, target):
            return False
        return not any(
            flow_at(tau, v) for v in border(region) if v.kind is VarKind.SYNC
        )

    def sub_assignments(sigma: Assignment, scope: frozenset) -> list:
        dom = [v for v in sorted(sigma.domain, key=Var.sort_key) if v in scope]
        out = []
        for mask in range(1 << len(dom)):
            out.append(
                Assignment(
                    {v: sigma.get(v) for k, v in enumerate(dom) if mask >> k & 1}
                )
            )
        return out

    def is_local(sigma: Assignment) -> bool:
        if len(sigma) == 0:
            return True
        idxs = list(range(len(blocks)))
        for parts in _partitions_of_subsets(idxs):
            options = []
            feasible = True
            for region in parts:
                scope = frozenset().union(*(fvs[j] for j in region))
                cands = [
                    t for t in sub_assignments(sigma, scope) if region_ok(t, region)
                ]
                if not cands:
                    feasible = False
                    break
                options.append(cands)
            if feasible and _covers(sigma, options):
                return True
        return False

    out = []
    for combo in itertools.product(*_partial_options(pool, interp)):
        sigma = Assignment({v: x for v, x in zip(pool, combo) if x is not None})
        if is_local(sigma):
            out.append(sigma)
    return sorted_solutions(out)


def _partitions_of_subsets(items: list):
    """Every partition of every non-empty subset of ``items``."""
    for mask in range(1, 1 << len(items)):
        chosen = [x for k, x in enumerate(items) if mask >> k & 1]
        yield from _partitions(chosen)


def _partitions(items: list):
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for sub in _partitions(rest):
        yield [frozenset((head,))] + sub
        for k in range(len(sub)):
            yield sub[:k] + [sub[k] | {head}] + sub[k + 1 :]


def _covers(sigma: Assignment, options: list) -> bool:
    def walk(k: int, acc: Assignment) -> bool:
        if k == len(options):
            return acc == sigma
        for tau in options[k]:
            if acc.compatible(tau) and tau.subset_of(sigma):
                if walk(k + 1, acc.union(tau)):
                    return True
        return False

    return walk(0, EMPTY)


# ---------------------------------------------------------------------------
# Dispatcher


def oracle_firings(mode: str, target, interp: Interpretation, vars=None) -> tuple:
    if mode == "classical":
        return oracle_classical_firings(target, interp, vars)
    if mode == "partial":
        return oracle_partial_firings(target, interp, vars)
    if mode == "simple":
        return oracle_simple_firings(target, interp, vars)
    if mode == "local":
        return oracle_local_firings(target, interp)
    raise PreconditionError(f"unknown mode {mode!r}")
