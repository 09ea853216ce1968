"""The round-based coordination engine.

Each primitive contributes one block per round: a persistent constraint
(ports for a stateless channel, an encoded state machine for a stateful
one, nothing for an external party) overlapped with its current
ephemeral constraint, the whole thing under the firing guard for the
primitive's variable pool.  A round solves the configuration for a
local firing, then updates: fired state machines pin their new state,
fired or addressed external primitives are offered an exchange that may
replace their ephemeral constraint, and everything learned about
external symbols this round is forgotten.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .core import (
    TRUE,
    Additive,
    Assignment,
    Formula,
    Interpretation,
    Overlap,
    Term,
    TrueF,
    Var,
    VarKind,
    VarT,
    conj,
    eq,
    implies,
    pair_closure,
)
from .errors import EngineError
from .locality import (
    Block,
    Configuration,
    LocalFiring,
    MergePolicy,
    find_local_firing,
    no_flow_status,
)
from .simple import firing_guard

log = logging.getLogger("intercon.engine")


class PrimitiveKind(Enum):
    STATELESS = "stateless"
    STATEFUL = "stateful"
    EXTERNAL = "external"


def encode_state_machine(name: str, transitions: Sequence[tuple]) -> Formula:
    """One implication per reachable state: being in the state entails the
    state's behaviour.  ``transitions`` pairs each ground state term with
    its formula (next states appear inside as ``state'.<name> = ..``)."""
    state = VarT(Var.state(name))
    return conj(*(implies(eq(state, q), body) for q, body in transitions))


@dataclass
class Primitive:
    """One primitive of a network.  ``rho`` and ``eps`` are stored in
    simple form (overlap rewritten at negative positions); ``eps`` is the
    part that changes between rounds."""

    id: str
    kind: PrimitiveKind
    vars: frozenset
    rho: Formula = TRUE
    eps: Formula = TRUE
    comm_vars: tuple = ()
    owns: tuple = ()
    endpoint: Optional[str] = None
    init_state: Optional[Term] = None

    @property
    def state_var(self) -> Optional[Var]:
        return Var.state(self.id) if self.kind is PrimitiveKind.STATEFUL else None

    @property
    def pool(self) -> frozenset:
        extra = set(self.comm_vars)
        if self.kind is PrimitiveKind.STATEFUL:
            extra |= {Var.state(self.id), Var.state_next(self.id)}
        return pair_closure(self.vars) | frozenset(extra)

    def block(self) -> Block:
        if isinstance(self.eps, TrueF):
            core = self.rho
        elif isinstance(self.rho, TrueF):
            core = self.eps
        else:
            core = Overlap(self.rho, self.eps)
        guard = firing_guard(self.pool)
        if isinstance(core, TrueF):
            return Block(self.id, guard)
        return Block(self.id, Additive(core, guard))


@dataclass
class Engine:
    """Drives a network round by round.  ``router`` (when present) is
    asked to resolve external symbols during the solve phase and offered
    update exchanges afterwards; without one, unresolved externals
    surface as errors."""

    primitives: list
    interp: Interpretation
    policy: MergePolicy = field(default_factory=MergePolicy)
    router: Optional[object] = None
    round_no: int = 1
    trace: list = field(default_factory=list)

    def __post_init__(self) -> None:
        ids = [p.id for p in self.primitives]
        if len(set(ids)) != len(ids):
            raise EngineError("duplicate primitive ids")
        self.interp.resolver = self.router

    def configuration(self) -> Configuration:
        return Configuration(tuple(p.block() for p in self.primitives))

    def solve_phase(self) -> LocalFiring:
        return find_local_firing(self.configuration(), self.interp, self.policy)

    def update_phase(self, firing: LocalFiring) -> list:
        """Advance state machines, run external exchanges, reset what the
        round learned.  Returns the installed (primitive id, formula)
        replacements."""
        sigma = firing.assignment
        installed = []
        for p in self.primitives:
            if p.kind is PrimitiveKind.STATEFUL:
                nxt = sigma.get(Var.state_next(p.id))
                if nxt is not None:
                    p.eps = eq(VarT(Var.state(p.id)), nxt)
                    installed.append((p.id, p.eps))
            elif p.kind is PrimitiveKind.EXTERNAL and self.router is not None:
                if self._wants_exchange(p, sigma):
                    comm = {
                        v.name: sigma.get(v) for v in p.comm_vars if v in sigma
                    }
                    new_eps = self.router.update_exchange(p, comm)
                    if new_eps is not None:
                        p.eps = new_eps
                        installed.append((p.id, new_eps))
        self.interp.reset_external()
        if self.router is not None:
            self.router.reset_round()
        # the next round must still be allowed to do nothing; judged against
        # the reset interpretation, so unresolved externals give the benefit
        # of the doubt rather than a veto
        for p in self.primitives:
            status = no_flow_status(p.block().formula, self.interp)
            if status == "violation":
                raise EngineError(
                    f"primitive {p.id}: updated constraints forbid doing nothing"
                )
        self.round_no += 1
        return installed

    @staticmethod
    def _wants_exchange(p: Primitive, sigma: Assignment) -> bool:
        if any(v in sigma for v in p.comm_vars):
            return True
        for v in pair_closure(p.vars):
            val = sigma.get(v)
            if v.kind is VarKind.SYNC and val is True:
                return True
            if v.kind is VarKind.DATAFLOW and val is not None:
                return True
        return False

    def step(self) -> LocalFiring:
        round_no = self.round_no
        firing = self.solve_phase()
        installed = self.update_phase(firing)
        events = self.router.drain_events() if self.router is not None else []
        self.trace.append(render_trace_line(round_no, firing, installed, events))
        return firing

    def run(self, rounds: int) -> list:
        for _ in range(rounds):
            self.step()
        return list(self.trace)


def render_trace_line(
    round_no: int, firing: LocalFiring, installed: list, events: list
) -> str:
    eps = ",".join(f"{pid}:{f.display()}" for pid, f in installed)
    ext = ",".join(events)
    return (
        f"round={round_no} firing={firing.assignment.render()} "
        f"touched=[{','.join(firing.touched)}] "
        f"eps_updates=[{eps}] ext=[{ext}]"
    )
