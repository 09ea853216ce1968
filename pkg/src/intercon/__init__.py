"""Coordination connectors as blocks of interaction constraints.

A network is a set of primitives, each contributing one block: a
persistent constraint over its ports plus an ephemeral one that changes
between rounds.  The same block formulas can be read under four
semantics — classical (total assignments, NOFLOW sentinel), partial
(three-valued), simple (minimal solutions) and local (per-region
decisions) — and driven round by round with external symbols resolved
over a line-delimited JSON protocol.

    >>> from intercon import load_network_text, simple_firings, conj
    >>> net = load_network_text('''
    ... [universe]
    ... data = d1 d2
    ... [primitive copy]
    ... kind = stateless
    ... vars = a b
    ... rho = a <-> b
    ... ''')
    >>> for s in simple_firings(net.primitive("copy").block().formula, net.interp):
    ...     print(s.render())
    {a=false,b=false}
    {a=true,b=true}
"""

from __future__ import annotations

from .classical import (
    enumerate_classical_firings,
    flow_axiom,
    is_classical_firing,
)
from .core import (
    EMPTY,
    NOFLOW,
    TRUE,
    Additive,
    Assignment,
    ExtConstraint,
    ExtFun,
    ExtPred,
    Formula,
    Fun,
    Interpretation,
    Not,
    Overlap,
    Pred,
    SyncAtom,
    Term,
    TrueF,
    Universe,
    Var,
    VarKind,
    VarT,
    aconj,
    adisj,
    conj,
    disj,
    dvar,
    eq,
    free_vars,
    iff,
    implies,
    neg,
    pair_closure,
    sync,
)
from .embeddings import (
    classical_to_partial,
    extend_p,
    interpretation_to_classical,
    interpretation_to_partial,
    minimize_to_simple,
    partial_to_classical,
)
from .engine import Engine, Primitive, PrimitiveKind, encode_state_machine
from .errors import (
    EngineError,
    InterconError,
    LoadError,
    PreconditionError,
    ProtocolError,
    UnresolvedExternalError,
)
from .locality import (
    Block,
    Configuration,
    LocalFiring,
    MergePolicy,
    boundary,
    check_no_flow_axiom,
    find_local_firing,
    idle_extension,
    is_idle,
    is_no_flow,
    local_firings,
    local_firings_block,
    no_flow_status,
    respects_boundary,
)
from .netdsl import (
    Network,
    format_formula,
    load_network,
    load_network_text,
    parse_formula,
    parse_term,
)
from .partial import (
    Truth3,
    enumerate_partial_firings,
    is_partial_firing,
    mfa_check,
    partial_eval,
)
from .protocol import OwnershipMap, Router, ScriptedEndpoint, scripted
from .simple import (
    firing_guard,
    is_simple_firing,
    simple_dissolutions,
    simple_firings,
    simple_solutions,
    sfa,
    to_partial,
    to_simple,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
