"""Syntax and value plumbing for interaction constraints.

A connector is described by constraints over paired variables: a sync
variable ``x`` (boolean: does data flow at port x this round?) and its
dataflow twin ``^x`` carrying the datum.  State, next-state and
communication variables extend the vocabulary for stateful and external
primitives.  Everything here is immutable and hashable so that solution
sets can be deduplicated and memoised.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from .errors import PreconditionError, UnresolvedExternalError


class VarKind(Enum):
    SYNC = "sync"
    DATAFLOW = "dataflow"
    STATE = "state"
    STATE_NEXT = "state_next"
    COMM = "comm"


# rendering/sort rank: sync port before its dataflow twin, states, comms
_KIND_RANK = {
    VarKind.SYNC: 0,
    VarKind.DATAFLOW: 1,
    VarKind.STATE: 2,
    VarKind.STATE_NEXT: 3,
    VarKind.COMM: 4,
}


@dataclass(frozen=True, slots=True)
class Var:
    """A variable, interned by (kind, name)."""

    kind: VarKind
    name: str

    @staticmethod
    def sync(name: str) -> "Var":
        return Var(VarKind.SYNC, name)

    @staticmethod
    def dataflow(name: str) -> "Var":
        return Var(VarKind.DATAFLOW, name)

    @staticmethod
    def state(name: str) -> "Var":
        return Var(VarKind.STATE, name)

    @staticmethod
    def state_next(name: str) -> "Var":
        return Var(VarKind.STATE_NEXT, name)

    @staticmethod
    def comm(name: str) -> "Var":
        return Var(VarKind.COMM, name)

    @property
    def pair(self) -> Optional["Var"]:
        """The dataflow twin of a sync variable and vice versa."""
        if self.kind is VarKind.SYNC:
            return Var(VarKind.DATAFLOW, self.name)
        if self.kind is VarKind.DATAFLOW:
            return Var(VarKind.SYNC, self.name)
        return None

    def sort_key(self) -> tuple:
        return (self.name, _KIND_RANK[self.kind])

    def display(self) -> str:
        if self.kind is VarKind.SYNC:
            return self.name
        if self.kind is VarKind.DATAFLOW:
            return f"^{self.name}"
        if self.kind is VarKind.STATE:
            return f"state.{self.name}"
        if self.kind is VarKind.STATE_NEXT:
            return f"state'.{self.name}"
        return f"${self.name}"

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return self.display()


# ---------------------------------------------------------------------------
# Terms


class Term:
    """Base class for terms; all concrete terms are frozen dataclasses."""

    __slots__ = ()

    def display(self) -> str:
        raise NotImplementedError

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return self.display()


@dataclass(frozen=True, slots=True, repr=False)
class VarT(Term):
    """A variable in term position (dataflow, state, next-state or comm)."""

    var: Var

    def __post_init__(self) -> None:
        if self.var.kind is VarKind.SYNC:
            raise PreconditionError("sync variables cannot appear in terms")

    def display(self) -> str:
        return self.var.display()


@dataclass(frozen=True, slots=True, repr=False)
class Fun(Term):
    """An internal constructor application; data constants are nullary."""

    name: str
    args: tuple = ()

    def display(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(a.display() for a in self.args)})"


@dataclass(frozen=True, slots=True, repr=False)
class ExtFun(Term):
    """An application of an externally owned function symbol."""

    name: str
    args: tuple = ()

    def display(self) -> str:
        return f"@{self.name}({', '.join(a.display() for a in self.args)})"


class _NoFlow(Term):
    """The distinguished no-flow datum of the classical semantics."""

    __slots__ = ()
    _instance: Optional["_NoFlow"] = None

    def __new__(cls) -> "_NoFlow":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def display(self) -> str:
        return "NOFLOW"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, _NoFlow)

    def __hash__(self) -> int:
        return hash("NOFLOW-term")


NOFLOW = _NoFlow()


def const(name: str) -> Fun:
    """A nullary internal constructor, i.e. a data constant."""
    return Fun(name, ())


def term_vars(t: Term) -> frozenset:
    if isinstance(t, VarT):
        return frozenset((t.var,))
    if isinstance(t, (Fun, ExtFun)):
        out: frozenset = frozenset()
        for a in t.args:
            out |= term_vars(a)
        return out
    return frozenset()


def is_ground(t: Term) -> bool:
    return not term_vars(t)


def contains_noflow(t: Term) -> bool:
    if isinstance(t, _NoFlow):
        return True
    if isinstance(t, (Fun, ExtFun)):
        return any(contains_noflow(a) for a in t.args)
    return False


def term_key(t: Term) -> tuple:
    """A deterministic sort key for ground terms (data first, in no order
    beyond structure; universes impose their own order where it matters)."""
    if isinstance(t, _NoFlow):
        return (2, "NOFLOW")
    if isinstance(t, VarT):
        return (0, t.var.sort_key())
    if isinstance(t, Fun):
        return (1, t.name, tuple(term_key(a) for a in t.args))
    if isinstance(t, ExtFun):
        return (3, t.name, tuple(term_key(a) for a in t.args))
    raise PreconditionError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Formulas


class Formula:
    """Base class for formulas; concrete nodes are frozen dataclasses."""

    __slots__ = ()

    def display(self) -> str:
        from .netdsl import format_formula

        return format_formula(self)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return self.display()


@dataclass(frozen=True, slots=True, repr=False)
class TrueF(Formula):
    pass


TRUE = TrueF()


@dataclass(frozen=True, slots=True, repr=False)
class SyncAtom(Formula):
    """A sync variable used as an atom: data flows at this port."""

    var: Var

    def __post_init__(self) -> None:
        if self.var.kind is not VarKind.SYNC:
            raise PreconditionError("atom variables must be sync variables")


@dataclass(frozen=True, slots=True, repr=False)
class Overlap(Formula):
    """Overlapping conjunction: joins compatible partial solutions."""

    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True, repr=False)
class Additive(Formula):
    """Additive conjunction: both sides must hold of the same assignment."""

    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True, repr=False)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True, slots=True, repr=False)
class Pred(Formula):
    """An internal predicate atom; "=" is the built-in equality."""

    name: str
    args: tuple = ()


@dataclass(frozen=True, slots=True, repr=False)
class ExtPred(Formula):
    """An externally owned predicate atom, resolved through the owner."""

    name: str
    args: tuple = ()


@dataclass(frozen=True, slots=True, repr=False)
class ExtConstraint(Formula):
    """An externally owned constraint: a named formula with holes, applied
    to formula and term arguments and fetched from its owner on demand.

    ``arg_order`` preserves the surface interleaving of the two argument
    kinds; it defaults to all formulas first.
    """

    name: str
    formula_args: tuple = ()
    term_args: tuple = ()
    arg_order: tuple = ()

    def __post_init__(self) -> None:
        if not self.arg_order:
            order = ("formula",) * len(self.formula_args) + ("term",) * len(self.term_args)
            object.__setattr__(self, "arg_order", order)
        if self.arg_order.count("formula") != len(self.formula_args) or self.arg_order.count(
            "term"
        ) != len(self.term_args):
            raise PreconditionError("arg_order must match the argument tuples")


def sync(name: str) -> SyncAtom:
    return SyncAtom(Var.sync(name))


def dvar(name: str) -> VarT:
    return VarT(Var.dataflow(name))


def eq(left: Term, right: Term) -> Pred:
    return Pred("=", (left, right))


def neg(f: Formula) -> Not:
    return Not(f)


def conj(*fs: Formula) -> Formula:
    """Overlapping conjunction of zero or more formulas (left fold)."""
    out: Optional[Formula] = None
    for f in fs:
        out = f if out is None else Overlap(out, f)
    return TRUE if out is None else out


def aconj(*fs: Formula) -> Formula:
    """Additive conjunction of one or more formulas (left fold)."""
    out: Optional[Formula] = None
    for f in fs:
        out = f if out is None else Additive(out, f)
    if out is None:
        raise PreconditionError("additive conjunction needs at least one operand")
    return out


def disj(left: Formula, right: Formula) -> Formula:
    """Overlapping disjunction, encoded through negation."""
    return Not(Overlap(Not(left), Not(right)))


def adisj(*fs: Formula) -> Formula:
    """Additive disjunction, encoded through negation (left fold)."""
    out: Optional[Formula] = None
    for f in fs:
        out = f if out is None else Not(Additive(Not(out), Not(f)))
    if out is None:
        raise PreconditionError("additive disjunction needs at least one operand")
    return out


def implies(ante: Formula, cons: Formula) -> Formula:
    return Not(Overlap(ante, Not(cons)))


def iff(left: Formula, right: Formula) -> Formula:
    return Overlap(implies(left, right), implies(right, left))


FALSE = Not(TRUE)


def free_vars(f: Formula) -> frozenset:
    """Free variables of a formula, including those inside the arguments of
    external constraints (whose bodies are not known until resolved)."""
    if isinstance(f, TrueF):
        return frozenset()
    if isinstance(f, SyncAtom):
        return frozenset((f.var,))
    if isinstance(f, (Overlap, Additive)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, Not):
        return free_vars(f.operand)
    if isinstance(f, (Pred, ExtPred)):
        out: frozenset = frozenset()
        for t in f.args:
            out |= term_vars(t)
        return out
    if isinstance(f, ExtConstraint):
        out = frozenset()
        for g in f.formula_args:
            out |= free_vars(g)
        for t in f.term_args:
            out |= term_vars(t)
        return out
    raise PreconditionError(f"not a formula: {f!r}")


def pair_closure(vars: Iterable[Var]) -> frozenset:
    """Close a variable set under the sync/dataflow pairing."""
    out = set()
    for v in vars:
        out.add(v)
        p = v.pair
        if p is not None:
            out.add(p)
    return frozenset(out)


def sync_vars(vars: Iterable[Var]) -> frozenset:
    return frozenset(v for v in vars if v.kind is VarKind.SYNC)


# ---------------------------------------------------------------------------
# Assignments

Value = Union[bool, Term]


class Assignment:
    """An immutable partial map from variables to values.

    Sync variables map to booleans, every other kind maps to ground terms.
    """

    __slots__ = ("_map", "_hash")

    def __init__(self, entries: Optional[Mapping[Var, Value]] = None) -> None:
        m: dict = {}
        if entries:
            for v, val in entries.items():
                if v.kind is VarKind.SYNC:
                    if not isinstance(val, bool):
                        raise PreconditionError(
                            f"sync variable {v.display()} must map to a bool"
                        )
                else:
                    if not isinstance(val, Term) or not is_ground(val):
                        raise PreconditionError(
                            f"{v.display()} must map to a ground term"
                        )
                m[v] = val
        object.__setattr__(self, "_map", m)
        object.__setattr__(self, "_hash", None)

    # -- mapping surface ----------------------------------------------------

    def get(self, var: Var) -> Optional[Value]:
        return self._map.get(var)

    def __contains__(self, var: Var) -> bool:
        return var in self._map

    def __len__(self) -> int:
        return len(self._map)

    def __iter__(self) -> Iterator[Var]:
        return iter(self._map)

    @property
    def domain(self) -> frozenset:
        return frozenset(self._map)

    def items(self) -> Iterable[tuple]:
        return self._map.items()

    def items_sorted(self) -> list:
        return sorted(self._map.items(), key=lambda kv: kv[0].sort_key())

    @property
    def sync_part(self) -> dict:
        return {v: x for v, x in self._map.items() if v.kind is VarKind.SYNC}

    @property
    def data_part(self) -> dict:
        return {v: x for v, x in self._map.items() if v.kind is not VarKind.SYNC}

    # -- algebra --------------------------------------------------------------

    def compatible(self, other: "Assignment") -> bool:
        small, big = (self, other) if len(self) <= len(other) else (other, self)
        for v, val in small.items():
            o = big.get(v)
            if o is not None and o != val:
                return False
            if o is None and v in big:  # pragma: no cover - values are never None
                return False
        return True

    def union(self, other: "Assignment") -> "Assignment":
        if not self.compatible(other):
            raise PreconditionError("union of incompatible assignments")
        m = dict(self._map)
        m.update(other._map)
        return Assignment(m)

    def restrict(self, vars: Iterable[Var]) -> "Assignment":
        keep = set(vars)
        return Assignment({v: x for v, x in self._map.items() if v in keep})

    def bind(self, var: Var, value: Value) -> "Assignment":
        m = dict(self._map)
        m[var] = value
        return Assignment(m)

    def is_total_over(self, vars: Iterable[Var]) -> bool:
        return all(v in self._map for v in vars)

    def subset_of(self, other: "Assignment") -> bool:
        return all(other.get(v) == x for v, x in self._map.items())

    # -- identity -------------------------------------------------------------

    def _key(self) -> tuple:
        return tuple(
            (v.sort_key(), _value_key(x)) for v, x in self.items_sorted()
        )

    def sort_key(self) -> tuple:
        return (len(self._map), self._key())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Assignment) and self._map == other._map

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash(self._key())
            object.__setattr__(self, "_hash", h)
        return h

    def render(self) -> str:
        """Canonical one-line rendering, variables sorted by name."""
        parts = []
        for v, x in self.items_sorted():
            val = ("true" if x else "false") if isinstance(x, bool) else x.display()
            parts.append(f"{v.display()}={val}")
        return "{" + ",".join(parts) + "}"

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return self.render()


def _value_key(x: Value) -> tuple:
    if isinstance(x, bool):
        return (0, x)
    return (1, term_key(x))


EMPTY = Assignment()


def compatible(a: Assignment, b: Assignment) -> bool:
    """Do the two assignments agree on their shared domain?"""
    return a.compatible(b)


def union(a: Assignment, b: Assignment) -> Assignment:
    """Union of compatible assignments; raises if they conflict."""
    return a.union(b)


def sorted_solutions(sols: Iterable[Assignment]) -> tuple:
    """Deduplicate and deterministically order a set of assignments."""
    return tuple(sorted(set(sols), key=Assignment.sort_key))


# ---------------------------------------------------------------------------
# Universe and interpretation


@dataclass(frozen=True)
class Universe:
    """The finite, ordered set of ground data terms a network ranges over.

    NOFLOW is representable only when built in classical mode.
    """

    data: tuple
    noflow_enabled: bool = False
    default: Optional[Term] = None

    def __post_init__(self) -> None:
        if not self.data:
            raise PreconditionError("universe must be non-empty")
        if len(set(self.data)) != len(self.data):
            raise PreconditionError("universe data must be distinct")
        for t in self.data:
            if not isinstance(t, Term) or not is_ground(t) or contains_noflow(t):
                raise PreconditionError("universe members must be ground, NOFLOW-free terms")
        if self.default is not None and self.default not in self.data:
            raise PreconditionError("default datum must be a universe member")

    def classical(self) -> "Universe":
        return Universe(self.data, True, self.default)

    @property
    def default_datum(self) -> Term:
        return self.default if self.default is not None else self.data[0]

    def __contains__(self, t: Term) -> bool:
        return t in self.data


@dataclass(frozen=True, slots=True)
class ConstraintBody:
    """A parameterised formula owned by an external primitive.

    ``kinds[i]`` says how ``params[i]`` is used in the body: a "formula"
    hole appears as a sync atom, a "term" hole as a dataflow variable.
    """

    params: tuple
    kinds: tuple
    body: Formula

    def __post_init__(self) -> None:
        if len(self.params) != len(self.kinds):
            raise PreconditionError("one kind per parameter")
        if any(k not in ("formula", "term") for k in self.kinds):
            raise PreconditionError("parameter kinds are 'formula' or 'term'")

    @property
    def n_formula(self) -> int:
        return sum(1 for k in self.kinds if k == "formula")


def instantiate(body: ConstraintBody, formula_args: Sequence[Formula], term_args: Sequence[Term]) -> Formula:
    """Substitute actual arguments for a constraint body's holes, in order."""
    n_term = len(body.params) - body.n_formula
    if len(formula_args) != body.n_formula or len(term_args) != n_term:
        raise PreconditionError(
            f"constraint body takes {body.n_formula} formula and "
            f"{n_term} term arguments"
        )
    fargs = list(formula_args)
    targs = list(term_args)
    fsub: dict = {}
    tsub: dict = {}
    for name, kind in zip(body.params, body.kinds):
        if kind == "formula":
            fsub[name] = fargs.pop(0)
        else:
            tsub[name] = targs.pop(0)
    return _subst_formula(body.body, fsub, tsub)


def _subst_formula(f: Formula, fsub: Mapping[str, Formula], tsub: Mapping[str, Term]) -> Formula:
    if isinstance(f, TrueF):
        return f
    if isinstance(f, SyncAtom):
        return fsub.get(f.var.name, f)
    if isinstance(f, Overlap):
        return Overlap(_subst_formula(f.left, fsub, tsub), _subst_formula(f.right, fsub, tsub))
    if isinstance(f, Additive):
        return Additive(_subst_formula(f.left, fsub, tsub), _subst_formula(f.right, fsub, tsub))
    if isinstance(f, Not):
        return Not(_subst_formula(f.operand, fsub, tsub))
    if isinstance(f, Pred):
        return Pred(f.name, tuple(_subst_term(t, tsub) for t in f.args))
    if isinstance(f, ExtPred):
        return ExtPred(f.name, tuple(_subst_term(t, tsub) for t in f.args))
    if isinstance(f, ExtConstraint):
        return ExtConstraint(
            f.name,
            tuple(_subst_formula(g, fsub, tsub) for g in f.formula_args),
            tuple(_subst_term(t, tsub) for t in f.term_args),
            f.arg_order,
        )
    raise PreconditionError(f"not a formula: {f!r}")


def _subst_term(t: Term, tsub: Mapping[str, Term]) -> Term:
    if isinstance(t, VarT):
        if t.var.kind is VarKind.DATAFLOW and t.var.name in tsub:
            return tsub[t.var.name]
        return t
    if isinstance(t, Fun):
        return Fun(t.name, tuple(_subst_term(a, tsub) for a in t.args))
    if isinstance(t, ExtFun):
        return ExtFun(t.name, tuple(_subst_term(a, tsub) for a in t.args))
    return t


class Interpretation:
    """Predicate/function/constraint meanings, internal and external.

    Internal predicates are explicit finite tables; equality is built in as
    the diagonal over ground terms.  External entries start empty and are
    populated on demand through the optional resolver; the engine resets
    them after every update phase.
    """

    def __init__(
        self,
        universe: Universe,
        internal_preds: Optional[Mapping[str, Mapping[tuple, bool]]] = None,
        ranges: Optional[Mapping[Var, tuple]] = None,
        resolver: Optional[object] = None,
    ) -> None:
        self.universe = universe
        self.internal_preds = {
            name: dict(table) for name, table in (internal_preds or {}).items()
        }
        self.external_preds: dict = {}
        self.external_funs: dict = {}
        self.external_constraints: dict = {}
        self.ranges = dict(ranges or {})
        self.resolver = resolver
        self.on_missing = "raise"  # or "skip": unresolved externals count unknown
        self.missing_log: set = set()  # symbols skipped while on_missing == "skip"
        self.lock = threading.Lock()

    # -- grounding ranges ----------------------------------------------------

    def range_of(self, var: Var) -> tuple:
        if var.kind in (VarKind.DATAFLOW, VarKind.COMM):
            base = self.universe.data
            if self.universe.noflow_enabled and var.kind is VarKind.DATAFLOW:
                return tuple(base) + (NOFLOW,)
            return tuple(base)
        if var.kind in (VarKind.STATE, VarKind.STATE_NEXT):
            key = Var.state(var.name)
            if key not in self.ranges:
                raise PreconditionError(
                    f"no declared state range for {var.display()}"
                )
            return self.ranges[key]
        raise PreconditionError(f"{var.display()} has no term range")

    # -- internal predicates ---------------------------------------------------

    def pred_value(self, name: str, args: tuple) -> Optional[bool]:
        if name == "=":
            if len(args) != 2:
                raise PreconditionError("equality is binary")
            return args[0] == args[1]
        table = self.internal_preds.get(name)
        if table is None:
            return None
        return table.get(tuple(args))

    def has_pred(self, name: str) -> bool:
        return name == "=" or name in self.internal_preds

    # -- external symbols -------------------------------------------------------

    def ext_pred_value(self, name: str, args: tuple) -> Optional[bool]:
        key = (name, tuple(args))
        with self.lock:
            if key in self.external_preds:
                return self.external_preds[key]
        if self.resolver is not None:
            val = self.resolver.resolve_predicate(name, tuple(args))
            if val is not None:
                with self.lock:
                    self.external_preds[key] = val
            return val
        if self.on_missing == "skip":
            self.missing_log.add(name)
            return None
        raise UnresolvedExternalError(name, f"predicate over {args!r}")

    def ext_fun_value(self, name: str, args: tuple) -> Optional[Term]:
        key = (name, tuple(args))
        with self.lock:
            if key in self.external_funs:
                return self.external_funs[key]
        if self.resolver is not None:
            val = self.resolver.resolve_function(name, tuple(args))
            if val is not None:
                with self.lock:
                    self.external_funs[key] = val
            return val
        if self.on_missing == "skip":
            self.missing_log.add(name)
            return None
        raise UnresolvedExternalError(name, f"function over {args!r}")

    def constraint_body(self, name: str) -> Optional[ConstraintBody]:
        with self.lock:
            if name in self.external_constraints:
                return self.external_constraints[name]
        if self.resolver is not None:
            body = self.resolver.resolve_constraint(name)
            if body is not None:
                with self.lock:
                    self.external_constraints[name] = body
            return body
        if self.on_missing == "skip":
            self.missing_log.add(name)
            return None
        raise UnresolvedExternalError(name, "constraint body")

    # -- lifecycle ----------------------------------------------------------------

    def reset_external(self) -> None:
        """Forget everything the external world said; back to the initial I."""
        with self.lock:
            self.external_preds.clear()
            self.external_funs.clear()
            self.external_constraints.clear()

    def external_snapshot(self) -> dict:
        with self.lock:
            return {
                "preds": dict(self.external_preds),
                "funs": dict(self.external_funs),
                "constraints": dict(self.external_constraints),
            }


def eval_term(sigma: Assignment, interp: Interpretation, t: Term) -> Optional[Term]:
    """Evaluate a term under a (possibly partial) assignment.

    Returns None when undefined: an unbound variable, or an external
    function nobody has resolved.  NOFLOW absorbs constructor application.
    """
    if isinstance(t, _NoFlow):
        return t
    if isinstance(t, VarT):
        val = sigma.get(t.var)
        return val if isinstance(val, Term) else None
    if isinstance(t, Fun):
        vals = []
        for a in t.args:
            v = eval_term(sigma, interp, a)
            if v is None:
                return None
            vals.append(v)
        if any(isinstance(v, _NoFlow) for v in vals):
            return NOFLOW
        return Fun(t.name, tuple(vals))
    if isinstance(t, ExtFun):
        vals = []
        for a in t.args:
            v = eval_term(sigma, interp, a)
            if v is None:
                return None
            vals.append(v)
        if any(isinstance(v, _NoFlow) for v in vals):
            return NOFLOW
        return interp.ext_fun_value(t.name, tuple(vals))
    raise PreconditionError(f"not a term: {t!r}")


def has_external_symbols(f: Formula) -> bool:
    if isinstance(f, (ExtPred, ExtConstraint)):
        return True
    if isinstance(f, (Overlap, Additive)):
        return has_external_symbols(f.left) or has_external_symbols(f.right)
    if isinstance(f, Not):
        return has_external_symbols(f.operand)
    if isinstance(f, Pred):
        return any(_term_has_extfun(t) for t in f.args)
    return False


def _term_has_extfun(t: Term) -> bool:
    if isinstance(t, ExtFun):
        return True
    if isinstance(t, Fun):
        return any(_term_has_extfun(a) for a in t.args)
    return False


def assignment_has_noflow(sigma: Assignment) -> bool:
    return any(
        isinstance(x, Term) and contains_noflow(x) for x in sigma.data_part.values()
    )


def formula_has_noflow(f: Formula) -> bool:
    if isinstance(f, (Overlap, Additive)):
        return formula_has_noflow(f.left) or formula_has_noflow(f.right)
    if isinstance(f, Not):
        return formula_has_noflow(f.operand)
    if isinstance(f, (Pred, ExtPred)):
        return any(contains_noflow(t) for t in f.args)
    if isinstance(f, ExtConstraint):
        return any(formula_has_noflow(g) for g in f.formula_args) or any(
            contains_noflow(t) for t in f.term_args
        )
    return False
