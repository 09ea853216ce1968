"""Local semantics: blocks deciding firings region by region.

A configuration is an ordered list of blocks, one per primitive, each
holding one interaction constraint.  A local firing is a union of
simple firings of disjoint block regions such that no region commits
flow on a variable it shares with a block outside itself; blocks in no
fired region stay untouched and contribute nothing.

The search used by the engine starts from singleton regions and merges
eagerly: whenever a region's flowing candidates die only on the
boundary condition, the undecided neighbours sharing the violated
variables are absorbed (in configuration order) and the region is
re-solved, up to an optional size cap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .core import (
    EMPTY,
    Assignment,
    Formula,
    Interpretation,
    Var,
    VarKind,
    conj,
    free_vars,
    sorted_solutions,
)
from .errors import EngineError, PreconditionError
from .simple import simple_firings, simple_solutions, to_simple

_MAX_BLOCKS_ENUMERATED = 10


@dataclass(frozen=True, slots=True)
class Block:
    """One primitive's constraint for the current round."""

    id: str
    formula: Formula


@dataclass(frozen=True, slots=True)
class Configuration:
    blocks: tuple

    def __post_init__(self) -> None:
        ids = [b.id for b in self.blocks]
        if len(set(ids)) != len(ids):
            raise PreconditionError("duplicate block ids in configuration")

    def ids(self) -> tuple:
        return tuple(b.id for b in self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True, slots=True)
class MergePolicy:
    """How regions grow and which candidate a fired region commits.

    ``prefer`` picks among a region's flowing candidates: "max" takes the
    one with the most flowing ports (ties broken by the canonical
    assignment order), "first" the canonically first.  ``max_region``
    caps how many blocks a region may absorb; None leaves it unbounded.
    """

    prefer: str = "max"
    max_region: Optional[int] = None

    def __post_init__(self) -> None:
        if self.prefer not in ("max", "first"):
            raise PreconditionError("prefer is 'max' or 'first'")


@dataclass(frozen=True, slots=True)
class LocalFiring:
    """A committed round: the union assignment, the fired regions (block
    ids, configuration order) and the flattened touched list."""

    assignment: Assignment
    regions: tuple
    touched: tuple

    @property
    def is_stall(self) -> bool:
        return not self.regions


def is_no_flow(sigma: Assignment) -> bool:
    """Strictly silent: only sync variables, all false."""
    return all(v.kind is VarKind.SYNC and x is False for v, x in sigma.items())


def is_idle(sigma: Assignment) -> bool:
    """Silent modulo state: no flowing port, no datum, no communication,
    no next-state commitment.  Current-state bindings are allowed, since
    a stateful block cannot say anything without naming its state."""
    for v, x in sigma.items():
        if v.kind is VarKind.SYNC:
            if x is not False:
                return False
        elif v.kind is not VarKind.STATE:
            return False
    return True


def check_no_flow_axiom(block, interp: Interpretation) -> bool:
    """Does this block admit a do-nothing solution?  True when some simple
    solution binds sync variables only to false (a stateful block may pin
    its state variables alongside).  Unresolved external symbols surface
    through the interpretation's usual missing-symbol handling."""
    f = block.formula if isinstance(block, Block) else block
    return any(is_idle(s) for s in simple_solutions(to_simple(f), interp))


def no_flow_status(f: Formula, interp: Interpretation) -> str:
    """Can this block do nothing?  Returns "ok" when an idle solution
    exists, "unknown" when deciding needs external symbols nobody has
    resolved yet, and "violation" otherwise.  Never talks to a resolver."""
    saved_resolver, saved_mode = interp.resolver, interp.on_missing
    interp.resolver = None
    interp.on_missing = "skip"
    interp.missing_log.clear()
    try:
        if check_no_flow_axiom(f, interp):
            return "ok"
        return "unknown" if interp.missing_log else "violation"
    finally:
        interp.resolver, interp.on_missing = saved_resolver, saved_mode
        interp.missing_log.clear()


def boundary(config: Configuration, region_ids: Iterable[str]) -> frozenset:
    """Variables a region shares with the rest of the configuration."""
    region = set(region_ids)
    inside: frozenset = frozenset()
    outside: frozenset = frozenset()
    for b in config:
        if b.id in region:
            inside |= free_vars(b.formula)
        else:
            outside |= free_vars(b.formula)
    return inside & outside


def _commits_flow_at(sigma: Assignment, v: Var) -> bool:
    """Does the assignment communicate flow at sync variable v, either
    directly or by binding the datum at its port?"""
    return sigma.get(v) is True or v.pair in sigma


def respects_boundary(sigma: Assignment, border: frozenset) -> bool:
    return not any(
        _commits_flow_at(sigma, v) for v in border if v.kind is VarKind.SYNC
    )


def local_firings_block(
    config: Configuration, region_ids: Iterable[str], interp: Interpretation
) -> tuple:
    """Simple firings of one region's conjunction that keep all flow away
    from the region's boundary."""
    wanted = set(region_ids)
    unknown = wanted - set(config.ids())
    if unknown:
        raise PreconditionError(f"unknown block ids: {sorted(unknown)}")
    formulas = [b.formula for b in config if b.id in wanted]
    border = boundary(config, wanted)
    return tuple(
        s
        for s in simple_firings(conj(*formulas), interp)
        if respects_boundary(s, border)
    )


def local_firings(config: Configuration, interp: Interpretation) -> tuple:
    """Every local firing of the configuration: unions of boundary-respecting
    region firings over disjoint regions, untouched blocks contributing
    nothing (the empty assignment is the all-untouched round)."""
    n = len(config)
    if n > _MAX_BLOCKS_ENUMERATED:
        raise PreconditionError(
            f"refusing to enumerate local firings of {n} blocks (cap "
            f"{_MAX_BLOCKS_ENUMERATED})"
        )
    ids = config.ids()
    memo: dict = {}

    def region_firings(region: frozenset) -> tuple:
        got = memo.get(region)
        if got is None:
            got = local_firings_block(config, region, interp)
            memo[region] = got
        return got

    results = set()

    def walk(i: int, used: frozenset, acc: Assignment) -> None:
        if i == n:
            results.add(acc)
            return
        if i in used:
            walk(i + 1, used, acc)
            return
        walk(i + 1, used, acc)  # block i untouched
        rest = [j for j in range(i + 1, n) if j not in used]
        for mask in range(1 << len(rest)):
            region = frozenset(
                (i,) + tuple(rest[k] for k in range(len(rest)) if mask >> k & 1)
            )
            for sigma in region_firings(frozenset(ids[j] for j in region)):
                if acc.compatible(sigma):
                    walk(i + 1, used | region, acc.union(sigma))

    walk(0, frozenset(), EMPTY)
    return sorted_solutions(results)


# ---------------------------------------------------------------------------
# The engine's search: eager merging


def find_local_firing(
    config: Configuration,
    interp: Interpretation,
    policy: MergePolicy = MergePolicy(),
) -> LocalFiring:
    """Decide the round region by region.

    Seeds a region at the first undecided block, merges in undecided
    neighbours blamed by boundary-killed candidates until none are left
    (or the cap bites), then commits the preferred flowing candidate, or
    leaves the region untouched when every candidate is silent."""
    blocks = tuple(config)
    n = len(blocks)
    undecided = set(range(n))
    fired: list = []

    while undecided:
        region = {min(undecided)}
        while True:
            candidates, blamed = _region_candidates(config, region, interp)
            grow = sorted(j for j in blamed if j in undecided and j not in region)
            if policy.max_region is not None:
                grow = grow[: max(policy.max_region - len(region), 0)]
            if not grow:
                break
            region |= set(grow)
        choice = _pick(candidates, policy)
        if choice is not None:
            fired.append((sorted(region), choice))
        undecided -= region

    assignment = EMPTY
    regions = []
    touched = []
    for idxs, sigma in fired:
        assignment = assignment.union(sigma)  # regions cannot conflict: shared flow is boundary-filtered
        regions.append(tuple(blocks[j].id for j in idxs))
        touched.extend(blocks[j].id for j in idxs)
    return LocalFiring(assignment, tuple(regions), tuple(touched))


def _region_candidates(
    config: Configuration, region: set, interp: Interpretation
) -> tuple:
    blocks = tuple(config)
    formulas = [blocks[j].formula for j in sorted(region)]
    region_ids = {blocks[j].id for j in region}
    border = boundary(config, region_ids)
    all_sols = simple_firings(conj(*formulas), interp)
    if not all_sols:
        names = ", ".join(blocks[j].id for j in sorted(region))
        raise EngineError(f"region [{names}] admits no solution this round")
    valid = []
    blamed: set = set()
    for sigma in all_sols:
        bad = [
            v
            for v in border
            if v.kind is VarKind.SYNC and _commits_flow_at(sigma, v)
        ]
        if not bad:
            valid.append(sigma)
            continue
        for v in bad:
            for j, b in enumerate(blocks):
                if j in region:
                    continue
                fv = free_vars(b.formula)
                if v in fv or v.pair in fv:
                    blamed.add(j)
    return tuple(valid), blamed


def _flow_count(sigma: Assignment) -> int:
    """Ports with committed flow: sync true, or the datum bound (which
    entails flow even when the sync twin stays unbound)."""
    committed = set()
    for v, x in sigma.items():
        if v.kind is VarKind.SYNC and x is True:
            committed.add(v)
        elif v.kind is VarKind.DATAFLOW:
            committed.add(v.pair)
    return len(committed)


def _pick(candidates: tuple, policy: MergePolicy) -> Optional[Assignment]:
    flowing = [s for s in candidates if _flow_count(s) > 0]
    if not flowing:
        return None
    if policy.prefer == "first":
        return flowing[0]
    return min(flowing, key=lambda s: (-_flow_count(s), s.sort_key()))


def idle_extension(
    config: Configuration, firing: LocalFiring, interp: Interpretation
) -> Assignment:
    """Extend a local firing over the untouched blocks with their idle
    solutions; the result solves the whole configuration's conjunction."""
    touched = set(firing.touched)
    sigma = firing.assignment
    for b in config:
        if b.id in touched:
            continue
        idles = [
            s
            for s in simple_solutions(to_simple(b.formula), interp)
            if is_idle(s) and s.compatible(sigma)
        ]
        if not idles:
            raise EngineError(f"block {b.id} has no compatible idle solution")
        sigma = sigma.union(idles[0])
    return sigma
