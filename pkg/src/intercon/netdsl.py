"""Surface syntax for interaction constraints and network files.

The formula language is the textual form used everywhere a constraint
travels: network files, wire-protocol payloads, CLI arguments and trace
output.  Connectives::

    !f           negation
    f & g        overlapping conjunction
    f && g       additive conjunction
    f | g        overlapping disjunction   (negative positions only)
    f || g       additive disjunction
    f -> g       sugar for !(f & !g), right associative
    f <-> g      sugar for (f -> g) & (g -> f)

Precedence: ``!`` binds tightest, then ``&``/``&&``, then ``|``/``||``,
then ``->``, then ``<->``.  Mixing ``&`` with ``&&`` (or ``|`` with
``||``) in one unparenthesised chain is rejected rather than silently
resolved.  Terms: ``^a`` dataflow variable, ``$k`` communication
variable, ``state.p`` / ``state'.p`` current / next state, ``f(t, ..)``
constructor application, ``@f(t, ..)`` external function, bare
identifiers are constants.  ``true``, ``state`` and ``NOFLOW`` are
reserved words.

Parsing desugars ``|``, ``||``, ``->`` and ``<->`` into the core
connectives.  ``|`` denotes the dual of ``&``, which collapses to a
solution-free constraint whenever it is required to hold positively, so
a ``|`` at positive (or mixed, e.g. under ``<->``) position is a parse
error; authors restructure or use ``||``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .core import (
    NOFLOW,
    TRUE,
    Additive,
    ExtConstraint,
    ExtFun,
    ExtPred,
    Formula,
    Fun,
    Not,
    Overlap,
    Pred,
    SyncAtom,
    Term,
    TrueF,
    Var,
    VarT,
    conj,
    eq,
    implies,
)
from .errors import LoadError

RESERVED = frozenset({"true", "state", "NOFLOW"})

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>\#[^\n]*)
      | (?P<iff><->)
      | (?P<imp>->)
      | (?P<aand>&&)
      | (?P<aor>\|\|)
      | (?P<and>&)
      | (?P<or>\|)
      | (?P<not>!)
      | (?P<eq>=)
      | (?P<lp>\()
      | (?P<rp>\))
      | (?P<comma>,)
      | (?P<hat>\^)
      | (?P<dollar>\$)
      | (?P<at>@)
      | (?P<dot>\.)
      | (?P<apos>')
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True, slots=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _lex(src: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise LoadError(f"unexpected character {src[pos]!r} at offset {pos} in {src!r}")
        kind = m.lastgroup or ""
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(src)))
    return toks


# Relative polarity tracking for the surface `|` ban: each parse method
# returns (formula, signs) where signs records at which relative
# polarities a surface `|` occurs inside the subtree.
_FLIP = {1: -1, -1: 1}


def _flip(signs: frozenset) -> frozenset:
    return frozenset(_FLIP[s] for s in signs)


_NO_OR: frozenset = frozenset()


class _Parser:
    def __init__(self, src: str, ext_kinds: Optional[Mapping[str, str]]):
        self.src = src
        self.toks = _lex(src)
        self.i = 0
        self.ext_kinds = ext_kinds

    # -- token plumbing ------------------------------------------------

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def accept(self, kind: str) -> Optional[_Tok]:
        if self.toks[self.i].kind == kind:
            return self.next()
        return None

    def expect(self, kind: str, what: str) -> _Tok:
        t = self.next()
        if t.kind != kind:
            raise LoadError(f"expected {what} at offset {t.pos} in {self.src!r}, found {t.text or 'end of input'!r}")
        return t

    def fail(self, msg: str) -> LoadError:
        t = self.peek()
        return LoadError(f"{msg} at offset {t.pos} in {self.src!r}")

    # -- formulas ------------------------------------------------------

    def formula(self) -> Formula:
        f, signs = self.iff()
        if 1 in signs:
            raise LoadError(
                f"'|' at positive position in {self.src!r}; overlapping disjunction has no "
                "positive solutions - use '||' or restructure"
            )
        return f

    def iff(self):
        f, signs = self.imp()
        while self.accept("iff"):
            g, gsigns = self.imp()
            # both operands occur at both polarities
            signs = signs | _flip(signs) | gsigns | _flip(gsigns)
            f = Overlap(implies(f, g), implies(g, f))
        return f, signs

    def imp(self):
        f, signs = self.disj()
        if self.accept("imp"):
            g, gsigns = self.imp()
            return implies(f, g), _flip(signs) | gsigns
        return f, signs

    def disj(self):
        f, signs = self.conj()
        op = None
        while self.peek().kind in ("or", "aor"):
            t = self.next()
            if op is not None and t.kind != op:
                raise LoadError(f"mixing '|' and '||' needs parentheses in {self.src!r}")
            op = t.kind
            g, gsigns = self.conj()
            signs = signs | gsigns
            if op == "or":
                signs = signs | frozenset({1})
                f = Not(Overlap(Not(f), Not(g)))
            else:
                f = Not(Additive(Not(f), Not(g)))
        return f, signs

    def conj(self):
        f, signs = self.unary()
        op = None
        while self.peek().kind in ("and", "aand"):
            t = self.next()
            if op is not None and t.kind != op:
                raise LoadError(f"mixing '&' and '&&' needs parentheses in {self.src!r}")
            op = t.kind
            g, gsigns = self.unary()
            signs = signs | gsigns
            f = Overlap(f, g) if op == "and" else Additive(f, g)
        return f, signs

    def unary(self):
        if self.accept("not"):
            f, signs = self.unary()
            return Not(f), _flip(signs)
        return self.atom()

    def atom(self):
        t = self.peek()
        if t.kind == "lp":
            self.next()
            f, signs = self.iff()
            self.expect("rp", "')'")
            return f, signs
        if t.kind in ("hat", "dollar"):
            return self.equality_from_term()
        if t.kind == "at":
            return self.external_atom()
        if t.kind == "ident":
            if t.text == "true":
                self.next()
                if self.peek().kind == "eq":
                    raise self.fail("'true' is not a term")
                return TRUE, _NO_OR
            if t.text in ("state", "NOFLOW"):
                return self.equality_from_term()
            name = self.next().text
            if self.accept("lp"):
                args = self.term_list()
                self.expect("rp", "')'")
                if self.peek().kind == "eq":
                    self.next()
                    rhs = self.term()
                    return eq(Fun(name, args), rhs), _NO_OR
                return Pred(name, args), _NO_OR
            if self.peek().kind == "eq":
                self.next()
                rhs = self.term()
                return eq(Fun(name), rhs), _NO_OR
            return SyncAtom(Var.sync(name)), _NO_OR
        raise self.fail("expected a formula")

    def equality_from_term(self):
        lhs = self.term()
        self.expect("eq", "'=' after a term")
        rhs = self.term()
        return eq(lhs, rhs), _NO_OR

    def external_atom(self):
        self.next()  # '@'
        name = self.expect("ident", "external symbol name").text
        self.expect("lp", "'(' after external symbol")
        kind = self.ext_kinds.get(name) if self.ext_kinds is not None else None
        if self.ext_kinds is not None and kind is None:
            raise LoadError(f"unknown external symbol '@{name}' in {self.src!r}")
        fargs: list[Formula] = []
        targs: list[Term] = []
        order: list[str] = []  # interleaving for constraint instantiation
        if not self.accept("rp"):
            while True:
                arg = self.term_or_formula()
                if isinstance(arg, Term):
                    targs.append(arg)
                    order.append("term")
                else:
                    fargs.append(arg)
                    order.append("formula")
                if self.accept("comma"):
                    continue
                self.expect("rp", "')' or ','")
                break
        if self.peek().kind == "eq":
            # the whole @f(..) was a term on the left of an equality
            if kind not in (None, "fun"):
                raise LoadError(f"'@{name}' is a {kind}, not a function, in {self.src!r}")
            if fargs:
                raise LoadError(f"external function '@{name}' takes terms, in {self.src!r}")
            self.next()
            rhs = self.term()
            return eq(ExtFun(name, tuple(targs)), rhs), _NO_OR
        if kind == "constr":
            return ExtConstraint(name, tuple(fargs), tuple(targs), tuple(order)), _NO_OR
        if kind == "fun":
            raise LoadError(f"external function '@{name}' used as a formula in {self.src!r}")
        # declared predicate, or undeclared at formula position
        if fargs:
            raise LoadError(f"external predicate '@{name}' takes terms, in {self.src!r}")
        return ExtPred(name, tuple(targs)), _NO_OR

    def term_or_formula(self):
        """Constraint argument: try a term first, fall back to a formula.

        A bare formula argument therefore needs parentheses: in
        ``@c(a)`` the ``a`` is the constant term, in ``@c((a))`` the
        sync atom.
        """
        mark = self.i
        try:
            t = self.term()
            if self.peek().kind in ("comma", "rp"):
                return t
        except LoadError:
            pass
        self.i = mark
        f, signs = self.iff()
        if 1 in signs:
            raise LoadError(f"'|' at positive position in {self.src!r}")
        return f

    # -- terms ---------------------------------------------------------

    def term_list(self) -> tuple:
        if self.peek().kind == "rp":
            return ()
        args = [self.term()]
        while self.accept("comma"):
            args.append(self.term())
        return tuple(args)

    def term(self) -> Term:
        t = self.peek()
        if t.kind == "hat":
            self.next()
            name = self.expect("ident", "variable name after '^'").text
            self._check_name(name)
            return VarT(Var.dataflow(name))
        if t.kind == "dollar":
            self.next()
            name = self.expect("ident", "variable name after '$'").text
            self._check_name(name)
            return VarT(Var.comm(name))
        if t.kind == "at":
            self.next()
            name = self.expect("ident", "external symbol name").text
            kind = self.ext_kinds.get(name) if self.ext_kinds is not None else None
            if self.ext_kinds is not None and kind is None:
                raise LoadError(f"unknown external symbol '@{name}' in {self.src!r}")
            if kind not in (None, "fun"):
                raise LoadError(f"'@{name}' is a {kind}, not a function, in {self.src!r}")
            self.expect("lp", "'(' after external function")
            args = self.term_list()
            self.expect("rp", "')'")
            return ExtFun(name, args)
        if t.kind == "ident":
            if t.text == "state":
                self.next()
                nxt = self.accept("apos") is not None
                self.expect("dot", "'.' after state")
                name = self.expect("ident", "primitive name").text
                self._check_name(name)
                return VarT(Var.state_next(name) if nxt else Var.state(name))
            if t.text == "NOFLOW":
                self.next()
                return NOFLOW
            if t.text == "true":
                raise self.fail("'true' is not a term")
            name = self.next().text
            if self.accept("lp"):
                args = self.term_list()
                self.expect("rp", "')'")
                return Fun(name, args)
            return Fun(name)
        raise self.fail("expected a term")

    def _check_name(self, name: str) -> None:
        if name in RESERVED:
            raise LoadError(f"reserved word {name!r} cannot name a variable, in {self.src!r}")


def parse_formula(src: str, ext_kinds: Optional[Mapping[str, str]] = None) -> Formula:
    """Parse a constraint.

    ``ext_kinds`` maps external symbol names to ``"pred"``, ``"fun"`` or
    ``"constr"`` and makes unknown ``@`` symbols an error; without it,
    ``@f`` at formula position is read as an external predicate and at
    term position as an external function.
    """
    p = _Parser(src, ext_kinds)
    f = p.formula()
    p.expect("eof", "end of input")
    return f


def parse_term(src: str, ext_kinds: Optional[Mapping[str, str]] = None) -> Term:
    p = _Parser(src, ext_kinds)
    t = p.term()
    p.expect("eof", "end of input")
    return t


# -- printing ------------------------------------------------------------

_PREC_ATOM = 4
_PREC_NOT = 3
_PREC_AND = 2


def _fmt(f: Formula) -> tuple[str, int, type]:
    if isinstance(f, TrueF):
        return "true", _PREC_ATOM, TrueF
    if isinstance(f, SyncAtom):
        return f.var.name, _PREC_ATOM, SyncAtom
    if isinstance(f, Pred):
        if f.name == "=":
            l, r = f.args
            return f"{l.display()} = {r.display()}", _PREC_ATOM, Pred
        args = ", ".join(a.display() for a in f.args)
        return f"{f.name}({args})", _PREC_ATOM, Pred
    if isinstance(f, ExtPred):
        args = ", ".join(a.display() for a in f.args)
        return f"@{f.name}({args})", _PREC_ATOM, ExtPred
    if isinstance(f, ExtConstraint):
        fargs = list(f.formula_args)
        targs = list(f.term_args)
        parts = []
        for kind in f.arg_order:
            if kind == "formula":
                parts.append(f"({format_formula(fargs.pop(0))})")
            else:
                parts.append(targs.pop(0).display())
        return f"@{f.name}({', '.join(parts)})", _PREC_ATOM, ExtConstraint
    if isinstance(f, Not):
        s, prec, _ = _fmt(f.operand)
        if prec <= _PREC_AND:
            s = f"({s})"
        return f"!{s}", _PREC_NOT, Not
    if isinstance(f, (Overlap, Additive)):
        op = "&" if isinstance(f, Overlap) else "&&"
        kind = type(f)
        ls, lp, lk = _fmt(f.left)
        if lp < _PREC_AND or (lp == _PREC_AND and lk is not kind):
            ls = f"({ls})"
        rs, rp, _ = _fmt(f.right)
        if rp <= _PREC_AND:
            rs = f"({rs})"
        return f"{ls} {op} {rs}", _PREC_AND, kind
    raise TypeError(f"not a formula: {f!r}")


def format_formula(f: Formula) -> str:
    """Render a formula so that parsing the result rebuilds it exactly."""
    return _fmt(f)[0]


# ---------------------------------------------------------------------------
# Network files
#
# A network file is a sequence of sections:
#
#   [universe]                    # required, first
#   data = d1 d2                  # ground terms, whitespace separated
#   default = d1                  # optional
#
#   [pred p]                      # an internal predicate table
#   d1 = true                     # one row per line: args = true|false
#   d2 = false
#
#   [primitive cdg]               # one block of the configuration, in file order
#   kind = stateless              # stateless | stateful | external
#   vars = a ^a                   # sync and dataflow variables (pairs closed)
#   rho = a -> ^a = d1            # persistent constraint
#   init = empty                  # stateful: the initial state
#   trans empty = a -> state'.q = full(^a)    # stateful: per-state behaviour;
#                                 # capitalised-by-convention pattern arguments
#                                 # that are not universe data range over it
#   eps = a -> @more(^a)          # external: the initial ephemeral constraint
#   owns = more/constr $k/comm    # external: owned symbols as name/kind
#   endpoint = proc:cmd ...       # external: proc:CMD | tcp:HOST:PORT | console:
#
# '#' starts a comment.  Formulas must leave every block able to do
# nothing (the no-flow axiom); violations are load errors, and blocks
# whose idleness depends on unresolved external symbols load with a
# warning.


import itertools
import logging

from .core import (
    Interpretation,
    Universe,
    VarKind,
    contains_noflow,
    formula_has_noflow,
    free_vars,
    is_ground,
    pair_closure,
)
from .engine import Primitive, PrimitiveKind, encode_state_machine
from .errors import PreconditionError
from .locality import Configuration, no_flow_status
from .simple import to_simple

log = logging.getLogger("intercon.netdsl")

_OWN_KINDS = ("pred", "fun", "constr", "comm")


@dataclass(frozen=True)
class Network:
    """A loaded network: the universe, a fresh interpretation (internal
    tables and state ranges), the primitives in file order, and the
    ownership of external symbols."""

    universe: Universe
    interp: Interpretation
    primitives: tuple
    ownership: "OwnershipMap"
    ext_kinds: dict
    source: str = "<string>"

    def primitive(self, pid: str) -> Primitive:
        for p in self.primitives:
            if p.id == pid:
                return p
        raise LoadError(f"no primitive {pid!r} in {self.source}")

    def configuration(self) -> Configuration:
        return Configuration(tuple(p.block() for p in self.primitives))

    def endpoints_declared(self) -> dict:
        return {p.id: p.endpoint for p in self.primitives if p.endpoint}


def load_network(path: str) -> Network:
    with open(path, "r", encoding="utf-8") as fh:
        return load_network_text(fh.read(), source=path)


def load_network_text(text: str, source: str = "<string>") -> Network:
    sections = _split_sections(text, source)
    if not sections or sections[0][0] != "universe":
        raise LoadError(f"{source}: the first section must be [universe]")

    universe = _parse_universe(sections[0], source)

    # pass 1: collect names so formulas anywhere may reference anything
    prim_sections = []
    pred_sections = []
    ext_kinds: dict = {}
    owner: dict = {}
    own_kinds: dict = {}
    seen_prims = set()
    seen_preds = set()
    for header, lines in sections[1:]:
        kind, _, name = header.partition(" ")
        name = name.strip()
        if kind == "pred":
            if not name or name in RESERVED or name == "=":
                raise LoadError(f"{source}: bad predicate name {name!r}")
            if name in seen_preds:
                raise LoadError(f"{source}: duplicate [pred {name}]")
            seen_preds.add(name)
            pred_sections.append((name, lines))
        elif kind == "primitive":
            if not name or name in RESERVED:
                raise LoadError(f"{source}: bad primitive name {name!r}")
            if name in seen_prims:
                raise LoadError(f"{source}: duplicate [primitive {name}]")
            seen_prims.add(name)
            prim_sections.append((name, lines))
        elif kind == "universe":
            raise LoadError(f"{source}: [universe] must appear exactly once, first")
        else:
            raise LoadError(f"{source}: unknown section [{header}]")

    for pid, lines in prim_sections:
        for key, value, ln in lines:
            if key != "owns":
                continue
            for item in value.split():
                sym, sep, k = item.partition("/")
                sym = sym.lstrip("$")
                if not sep or k not in _OWN_KINDS or not sym:
                    raise LoadError(
                        f"{source}:{ln}: owns entries look like name/kind "
                        f"with kind one of {', '.join(_OWN_KINDS)}"
                    )
                if sym in owner:
                    raise LoadError(
                        f"{source}:{ln}: {sym!r} already owned by {owner[sym]!r}"
                    )
                owner[sym] = pid
                own_kinds[sym] = k
                if k != "comm":
                    ext_kinds[sym] = k

    tables = _parse_pred_tables(pred_sections, source)
    if any(name in ext_kinds for name in tables):
        clash = sorted(set(tables) & set(ext_kinds))
        raise LoadError(f"{source}: {clash[0]!r} is both a table and owned externally")

    # pass 2: build the primitives
    primitives = []
    ranges: dict = {}
    for pid, lines in prim_sections:
        primitives.append(
            _build_primitive(pid, lines, universe, ext_kinds, owner, own_kinds, ranges, source)
        )

    from .protocol import OwnershipMap

    interp = Interpretation(universe, tables, ranges)
    net = Network(
        universe=universe,
        interp=interp,
        primitives=tuple(primitives),
        ownership=OwnershipMap(dict(owner), dict(own_kinds)),
        ext_kinds=ext_kinds,
        source=source,
    )
    _check_networks_preds(net, tables, source)
    for p in net.primitives:
        status = no_flow_status(p.block().formula, interp)
        if status == "violation":
            raise LoadError(
                f"{source}: primitive {p.id} can never do nothing "
                "(no-flow axiom violated)"
            )
        if status == "unknown":
            log.warning(
                "%s: primitive %s: idleness depends on unresolved external symbols",
                source,
                p.id,
            )
    return net


def _split_sections(text: str, source: str) -> list:
    sections = []
    current = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise LoadError(f"{source}:{ln}: unterminated section header")
            header = line[1:-1].strip()
            current = (header, [])
            sections.append(current)
            continue
        if current is None:
            raise LoadError(f"{source}:{ln}: content before the first section")
        key, sep, value = line.partition("=")
        if not sep:
            raise LoadError(f"{source}:{ln}: expected key = value")
        current[1].append((key.strip(), value.strip(), ln))
    return sections


def _strip_comment(line: str) -> str:
    # '#' starts a comment at line start or after whitespace
    for i, ch in enumerate(line):
        if ch == "#" and (i == 0 or line[i - 1] in " \t"):
            return line[:i]
    return line


def _parse_terms_loose(src: str, ext_kinds, where: str) -> tuple:
    """Whitespace-separated terms (no commas between them)."""
    p = _Parser(src, ext_kinds)
    out = []
    while p.peek().kind != "eof":
        out.append(p.term())
    if not out:
        raise LoadError(f"{where}: expected at least one term")
    return tuple(out)


def _parse_universe(section, source: str) -> Universe:
    _, lines = section
    data = None
    default = None
    for key, value, ln in lines:
        if key == "data":
            data = _parse_terms_loose(value, None, f"{source}:{ln}")
        elif key == "default":
            default = parse_term(value, None)
        else:
            raise LoadError(f"{source}:{ln}: [universe] takes data and default")
    if data is None:
        raise LoadError(f"{source}: [universe] needs a data line")
    try:
        return Universe(tuple(data), False, default)
    except PreconditionError as e:
        raise LoadError(f"{source}: {e}")


def _parse_pred_tables(pred_sections, source: str) -> dict:
    tables: dict = {}
    for name, lines in pred_sections:
        table: dict = {}
        arity = None
        for key, value, ln in lines:
            args = _parse_terms_loose(key, None, f"{source}:{ln}")
            if any(not is_ground(t) or contains_noflow(t) for t in args):
                raise LoadError(
                    f"{source}:{ln}: table rows need ground, NOFLOW-free arguments"
                )
            if arity is None:
                arity = len(args)
            elif len(args) != arity:
                raise LoadError(f"{source}:{ln}: inconsistent arity for {name!r}")
            if value not in ("true", "false"):
                raise LoadError(f"{source}:{ln}: table values are true or false")
            if tuple(args) in table:
                raise LoadError(f"{source}:{ln}: duplicate row for {name!r}")
            table[tuple(args)] = value == "true"
        if not table:
            raise LoadError(f"{source}: [pred {name}] has no rows")
        tables[name] = table
    return tables


def _build_primitive(
    pid, lines, universe, ext_kinds, owner, own_kinds, ranges, source
) -> Primitive:
    kind = None
    vars_decl: set = set()
    rho_src = None
    eps_src = None
    init_src = None
    endpoint = None
    trans: list = []
    for key, value, ln in lines:
        where = f"{source}:{ln}"
        if key == "kind":
            if value not in ("stateless", "stateful", "external"):
                raise LoadError(f"{where}: kind is stateless, stateful or external")
            kind = PrimitiveKind(value)
        elif key == "vars":
            for tok in value.split():
                if tok.startswith("^"):
                    name = tok[1:]
                    k = VarKind.DATAFLOW
                else:
                    name = tok
                    k = VarKind.SYNC
                if not name.isidentifier() or name in RESERVED:
                    raise LoadError(f"{where}: bad variable {tok!r}")
                vars_decl.add(Var(k, name))
        elif key == "rho":
            rho_src = (value, where)
        elif key == "eps":
            eps_src = (value, where)
        elif key == "init":
            init_src = (value, where)
        elif key == "endpoint":
            endpoint = value
        elif key == "owns":
            pass  # handled in pass 1
        elif key.startswith("trans ") or key == "trans":
            pattern_src = key[len("trans") :].strip()
            if not pattern_src:
                raise LoadError(f"{where}: trans needs a state pattern")
            trans.append((pattern_src, value, where))
        else:
            raise LoadError(f"{where}: unknown key {key!r} in [primitive {pid}]")

    if kind is None:
        raise LoadError(f"{source}: [primitive {pid}] needs a kind")
    if kind is not PrimitiveKind.EXTERNAL:
        if eps_src is not None:
            raise LoadError(
                f"{source}: [primitive {pid}] is {kind.value}; only external "
                "primitives declare an initial eps"
            )
        if endpoint is not None:
            raise LoadError(f"{source}: [primitive {pid}] is {kind.value}; no endpoint")
        if any(p == pid for p in owner.values()):
            raise LoadError(
                f"{source}: [primitive {pid}] is {kind.value}; it cannot own symbols"
            )
    if kind is not PrimitiveKind.STATEFUL:
        if trans or init_src is not None:
            raise LoadError(
                f"{source}: [primitive {pid}] is {kind.value}; init/trans are for "
                "stateful primitives"
            )

    comm_vars = tuple(
        sorted(
            (Var.comm(sym) for sym, p in owner.items() if p == pid and own_kinds[sym] == "comm"),
            key=Var.sort_key,
        )
    )
    pool_extra = set(comm_vars)
    if kind is PrimitiveKind.STATEFUL:
        pool_extra |= {Var.state(pid), Var.state_next(pid)}
    pool = pair_closure(vars_decl) | pool_extra

    def parse_checked(src: str, where: str) -> Formula:
        try:
            f = parse_formula(src, ext_kinds)
        except LoadError as e:
            raise LoadError(f"{where}: {e}")
        if formula_has_noflow(f):
            raise LoadError(f"{where}: NOFLOW is internal to the classical mode")
        stray = free_vars(f) - pool
        if stray:
            shown = ", ".join(
                v.display() for v in sorted(stray, key=Var.sort_key)
            )
            raise LoadError(
                f"{where}: variables outside [primitive {pid}]'s declaration: {shown}"
            )
        return f

    rho: Formula = TRUE
    if kind is PrimitiveKind.STATEFUL:
        if not trans or init_src is None:
            raise LoadError(
                f"{source}: [primitive {pid}] needs init and at least one trans"
            )
        states: list = []
        grounded: list = []
        for pattern_src, body_src, where in trans:
            for state_term, binding in _ground_pattern(pattern_src, universe, ext_kinds, where):
                body = parse_checked(body_src, where)
                body = _subst_consts(body, binding)
                if state_term not in states:
                    states.append(state_term)
                grounded.append((state_term, body))
        ranges[Var.state(pid)] = tuple(states)
        init_term = parse_term(init_src[0], ext_kinds)
        if init_term not in states:
            raise LoadError(
                f"{init_src[1]}: init {init_term.display()} is not a reachable state"
            )
        machine = encode_state_machine(pid, grounded)
        if rho_src is not None:
            machine = Overlap(machine, parse_checked(*rho_src))
        rho = to_simple(machine)
        eps: Formula = eq(VarT(Var.state(pid)), init_term)
        return Primitive(
            id=pid,
            kind=kind,
            vars=frozenset(pair_closure(vars_decl)),
            rho=rho,
            eps=eps,
            init_state=init_term,
        )

    if rho_src is not None:
        rho = to_simple(parse_checked(*rho_src))
    eps = to_simple(parse_checked(*eps_src)) if eps_src is not None else TRUE
    owns = tuple(sorted(sym for sym, p in owner.items() if p == pid))
    return Primitive(
        id=pid,
        kind=kind,
        vars=frozenset(pair_closure(vars_decl)),
        rho=rho,
        eps=eps,
        comm_vars=comm_vars,
        owns=owns,
        endpoint=endpoint,
    )


def _ground_pattern(pattern_src: str, universe: Universe, ext_kinds, where: str) -> list:
    """Instances of a transition pattern: argument identifiers that are not
    universe data are parameters ranging over the universe."""
    try:
        pattern = parse_term(pattern_src, ext_kinds)
    except LoadError as e:
        raise LoadError(f"{where}: {e}")
    params: list = []

    def scan(t: Term) -> None:
        if not isinstance(t, Fun):
            raise LoadError(f"{where}: patterns are built from constructors only")
        if not t.args and t not in universe and t.name not in params:
            params.append(t.name)
        for a in t.args:
            scan(a)

    if not isinstance(pattern, Fun):
        raise LoadError(f"{where}: patterns are built from constructors only")
    for a in pattern.args:
        scan(a)

    out = []
    for combo in itertools.product(universe.data, repeat=len(params)):
        binding = dict(zip(params, combo))
        out.append((_subst_consts_term(pattern, binding), binding))
    return out


def _subst_consts(f: Formula, binding: dict) -> Formula:
    if not binding:
        return f
    if isinstance(f, (TrueF, SyncAtom)):
        return f
    if isinstance(f, Overlap):
        return Overlap(_subst_consts(f.left, binding), _subst_consts(f.right, binding))
    if isinstance(f, Additive):
        return Additive(_subst_consts(f.left, binding), _subst_consts(f.right, binding))
    if isinstance(f, Not):
        return Not(_subst_consts(f.operand, binding))
    if isinstance(f, Pred):
        return Pred(f.name, tuple(_subst_consts_term(t, binding) for t in f.args))
    if isinstance(f, ExtPred):
        return ExtPred(f.name, tuple(_subst_consts_term(t, binding) for t in f.args))
    if isinstance(f, ExtConstraint):
        return ExtConstraint(
            f.name,
            tuple(_subst_consts(g, binding) for g in f.formula_args),
            tuple(_subst_consts_term(t, binding) for t in f.term_args),
            f.arg_order,
        )
    raise LoadError(f"not a formula: {f!r}")


def _subst_consts_term(t: Term, binding: dict) -> Term:
    if isinstance(t, Fun):
        if not t.args and t.name in binding:
            return binding[t.name]
        return Fun(t.name, tuple(_subst_consts_term(a, binding) for a in t.args))
    if isinstance(t, ExtFun):
        return ExtFun(t.name, tuple(_subst_consts_term(a, binding) for a in t.args))
    return t


def _check_networks_preds(net: Network, tables: dict, source: str) -> None:
    """Every internal predicate a formula mentions must have a table."""

    def scan(f: Formula, where: str) -> None:
        if isinstance(f, (Overlap, Additive)):
            scan(f.left, where)
            scan(f.right, where)
        elif isinstance(f, Not):
            scan(f.operand, where)
        elif isinstance(f, Pred):
            if f.name != "=" and f.name not in tables:
                raise LoadError(
                    f"{source}: {where} mentions unknown predicate {f.name!r}"
                )
        elif isinstance(f, ExtConstraint):
            for g in f.formula_args:
                scan(g, where)

    for p in net.primitives:
        scan(p.rho, f"primitive {p.id}")
        scan(p.eps, f"primitive {p.id}")
