"""Talking to external primitives: line-delimited JSON over a transport.

Every request is one compact JSON object on its own line; every reply is
``{"ok": true, "value": ...}`` or ``{"ok": false, "reason": "..."}``.
Request shapes::

    {"op":"pred","sym":S,"args":[..]}      -> value: true/false
    {"op":"fun","sym":S,"args":[..]}       -> value: term source
    {"op":"constr","sym":S}                -> value: {"params":[..],"body":src}
    {"op":"update","prim":P,"comm":{..}}   -> value: new ephemeral constraint source

Terms and formulas travel as their surface syntax.  A negative or timed
out reply means "unknown": the symbol stays unresolved this round.  A
broken transport or a malformed reply is a protocol error and aborts
the round.  Each (operation, symbol, arguments) is asked at most once
per round.
"""

from __future__ import annotations

import json
import logging
import os
import queue
import shlex
import socket
import subprocess
import threading
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .core import (
    ConstraintBody,
    Formula,
    Term,
    Var,
    VarKind,
    contains_noflow,
    formula_has_noflow,
    free_vars,
    is_ground,
)
from .errors import LoadError, ProtocolError, UnresolvedExternalError
from .simple import to_simple

log = logging.getLogger("intercon.protocol")

DEFAULT_TIMEOUT_MS = 30_000


def configured_timeout_s() -> float:
    raw = os.environ.get("INTERCON_TIMEOUT_MS")
    if raw is None:
        return DEFAULT_TIMEOUT_MS / 1000.0
    try:
        ms = int(raw)
        if ms <= 0:
            raise ValueError
    except ValueError:
        raise LoadError(f"INTERCON_TIMEOUT_MS must be a positive integer, got {raw!r}")
    return ms / 1000.0


@dataclass(frozen=True, slots=True)
class OwnershipMap:
    """Which primitive owns each external symbol, and as what."""

    owner: Mapping[str, str]
    kinds: Mapping[str, str]  # pred | fun | constr | comm

    def owner_of(self, sym: str) -> str:
        pid = self.owner.get(sym)
        if pid is None:
            raise ProtocolError(f"no owner declared for external symbol {sym!r}")
        return pid

    def kind_of(self, sym: str) -> str:
        return self.kinds.get(sym, "")


def encode_request(payload: dict) -> str:
    return json.dumps(payload, separators=(",", ":"))


# ---------------------------------------------------------------------------
# Transports


class ScriptedEndpoint:
    """Test/library transport: a callable answers each payload with a reply
    dict (or None for a timeout).  Keeps the request log."""

    def __init__(self, handler):
        self.handler = handler
        self.requests: list = []

    def request(self, payload: dict) -> Optional[dict]:
        self.requests.append(payload)
        return self.handler(payload)

    def close(self) -> None:
        pass


class ProcEndpoint:
    """A subprocess speaking the protocol on stdin/stdout."""

    def __init__(self, command: str, timeout_s: float):
        if not command.strip():
            raise LoadError("empty proc: endpoint command")
        self.command = command
        self.timeout_s = timeout_s
        self.proc: Optional[subprocess.Popen] = None
        self._lines: Optional[queue.Queue] = None

    def _ensure(self) -> None:
        if self.proc is not None and self.proc.poll() is None:
            return
        try:
            self.proc = subprocess.Popen(
                shlex.split(self.command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as e:
            raise ProtocolError(f"cannot start endpoint {self.command!r}: {e}")
        self._lines = queue.Queue()

        def pump(proc, out):
            for line in proc.stdout:
                out.put(line)
            out.put(None)  # EOF marker

        threading.Thread(
            target=pump, args=(self.proc, self._lines), daemon=True
        ).start()

    def request(self, payload: dict) -> Optional[dict]:
        self._ensure()
        assert self.proc is not None and self.proc.stdin is not None
        try:
            self.proc.stdin.write(encode_request(payload) + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            raise ProtocolError(f"endpoint {self.command!r} is gone: {e}")
        try:
            line = self._lines.get(timeout=self.timeout_s)
        except queue.Empty:
            return None  # timeout: unknown
        if line is None:
            raise ProtocolError(f"endpoint {self.command!r} closed the stream")
        return _parse_reply(line, self.command)

    def close(self) -> None:
        if self.proc is not None and self.proc.poll() is None:
            self.proc.terminate()
            try:
                self.proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self.proc.kill()


class TcpEndpoint:
    """A TCP peer speaking the protocol, one JSON object per line."""

    def __init__(self, host: str, port: int, timeout_s: float):
        self.host = host
        self.port = port
        self.timeout_s = timeout_s
        self.sock: Optional[socket.socket] = None
        self._rfile = None
        self._wfile = None

    def _ensure(self) -> None:
        if self.sock is not None:
            return
        try:
            self.sock = socket.create_connection(
                (self.host, self.port), timeout=self.timeout_s
            )
        except OSError as e:
            raise ProtocolError(f"cannot connect to {self.host}:{self.port}: {e}")
        self._rfile = self.sock.makefile("r")
        self._wfile = self.sock.makefile("w")

    def request(self, payload: dict) -> Optional[dict]:
        self._ensure()
        try:
            self._wfile.write(encode_request(payload) + "\n")
            self._wfile.flush()
            line = self._rfile.readline()
        except socket.timeout:
            return None
        except OSError as e:
            raise ProtocolError(f"connection to {self.host}:{self.port} failed: {e}")
        if not line:
            raise ProtocolError(f"{self.host}:{self.port} closed the connection")
        return _parse_reply(line, f"{self.host}:{self.port}")

    def close(self) -> None:
        if self.sock is not None:
            self.sock.close()
            self.sock = None


class ConsoleEndpoint:
    """The operator answers on the terminal.  Each request is rendered as a
    short prompt: predicates take y/n, functions a term, constraints a
    ``lambda(p, ..).body`` line, updates a replacement constraint.  An empty
    line or "unknown" leaves the symbol unresolved this round."""

    @staticmethod
    def prompt_for(payload: dict) -> str:
        op = payload.get("op")
        sym = payload.get("sym", "")
        args = ", ".join(str(a) for a in payload.get("args", []))
        if op == "pred":
            return f"{sym}({args})? [y/n]"
        if op == "fun":
            return f"{sym}({args}) = ?"
        if op == "constr":
            return f"{sym} = ? [lambda(p, ..).body]"
        if op == "update":
            comm = payload.get("comm", {})
            shown = ",".join(f"{k}={v}" for k, v in sorted(comm.items()))
            return f"update {payload.get('prim', '?')} {{{shown}}} -> next constraint?"
        return encode_request(payload)

    def request(self, payload: dict) -> Optional[dict]:
        print(self.prompt_for(payload))
        try:
            raw = input("> ").strip()
        except EOFError:
            return None
        if raw in ("", "unknown"):
            return {"ok": False, "reason": "operator passed"}
        op = payload.get("op")
        if op == "pred":
            if raw in ("y", "yes", "true"):
                return {"ok": True, "value": True}
            if raw in ("n", "no", "false"):
                return {"ok": True, "value": False}
            return {"ok": False, "reason": f"unrecognised answer {raw!r}"}
        if op == "constr":
            lam = parse_lambda(raw)
            if lam is None:
                return {"ok": False, "reason": "expected lambda(p, ..).body"}
            params, body = lam
            return {"ok": True, "value": {"params": params, "body": body}}
        return {"ok": True, "value": raw}

    def close(self) -> None:
        pass


def parse_lambda(raw: str) -> Optional[tuple]:
    """Split ``lambda(a, b).body`` into (["a", "b"], "body")."""
    raw = raw.strip()
    if not raw.startswith("lambda"):
        return None
    rest = raw[len("lambda") :].lstrip()
    if not rest.startswith("("):
        return None
    depth = 0
    for i, ch in enumerate(rest):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                header = rest[1:i]
                tail = rest[i + 1 :].lstrip()
                if not tail.startswith("."):
                    return None
                params = [p.strip() for p in header.split(",") if p.strip()]
                return params, tail[1:].strip()
    return None


def _parse_reply(line: str, who: str) -> dict:
    try:
        reply = json.loads(line)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"malformed reply from {who}: {e}")
    if not isinstance(reply, dict) or "ok" not in reply:
        raise ProtocolError(f"malformed reply from {who}: missing 'ok'")
    return reply


def make_endpoint(spec: str, timeout_s: float):
    if spec.startswith("proc:"):
        return ProcEndpoint(spec[len("proc:") :], timeout_s)
    if spec.startswith("tcp:"):
        rest = spec[len("tcp:") :]
        host, sep, port = rest.rpartition(":")
        if not sep or not host:
            raise LoadError(f"tcp endpoint needs host:port, got {spec!r}")
        try:
            return TcpEndpoint(host, int(port), timeout_s)
        except ValueError:
            raise LoadError(f"bad tcp port in {spec!r}")
    if spec in ("console", "console:"):
        return ConsoleEndpoint()
    raise LoadError(f"unknown endpoint transport {spec!r}")


# ---------------------------------------------------------------------------
# Router


class Router:
    """Resolves external symbols through their owners' endpoints and runs
    update exchanges.  Validates everything that crosses the wire."""

    def __init__(
        self,
        network,
        handlers: Optional[Mapping[str, object]] = None,
        timeout_s: Optional[float] = None,
    ):
        self.network = network
        self.timeout_s = timeout_s if timeout_s is not None else configured_timeout_s()
        self._endpoints: dict = dict(handlers or {})
        self._asked: set = set()
        self.events: list = []

    # -- plumbing -------------------------------------------------------

    def _endpoint(self, pid: str):
        ep = self._endpoints.get(pid)
        if ep is not None:
            return ep
        prim = self.network.primitive(pid)
        if prim.endpoint is None:
            return None
        ep = make_endpoint(prim.endpoint, self.timeout_s)
        self._endpoints[pid] = ep
        return ep

    def _ask(self, sym: str, payload: dict):
        pid = self.network.ownership.owner_of(sym)
        ep = self._endpoint(pid)
        if ep is None:
            raise UnresolvedExternalError(
                sym, f"owner {pid!r} has no endpoint"
            )
        reply = ep.request(payload)
        if reply is None:
            log.warning("no reply for %s within %.1fs", sym, self.timeout_s)
            return None
        if not reply.get("ok"):
            log.info("%s declined: %s", sym, reply.get("reason", ""))
            return None
        return reply.get("value")

    def _once(self, key: tuple) -> bool:
        if key in self._asked:
            return False
        self._asked.add(key)
        return True

    def reset_round(self) -> None:
        self._asked.clear()

    def drain_events(self) -> list:
        out = list(self.events)
        self.events.clear()
        return out

    def close(self) -> None:
        for ep in self._endpoints.values():
            ep.close()

    # -- resolution -------------------------------------------------------

    def resolve_predicate(self, sym: str, args: tuple) -> Optional[bool]:
        self._expect_kind(sym, "pred")
        if not self._once(("pred", sym, args)):
            return None
        payload = {"op": "pred", "sym": sym, "args": [t.display() for t in args]}
        value = self._ask(sym, payload)
        if value is None:
            return None
        if not isinstance(value, bool):
            raise ProtocolError(f"predicate {sym!r} answered non-boolean {value!r}")
        shown = ",".join(t.display() for t in args)
        self.events.append(f"{sym}({shown}):{'true' if value else 'false'}")
        return value

    def resolve_function(self, sym: str, args: tuple) -> Optional[Term]:
        self._expect_kind(sym, "fun")
        if not self._once(("fun", sym, args)):
            return None
        payload = {"op": "fun", "sym": sym, "args": [t.display() for t in args]}
        value = self._ask(sym, payload)
        if value is None:
            return None
        if not isinstance(value, str):
            raise ProtocolError(f"function {sym!r} answered non-string {value!r}")
        term = self._parse_data_term(sym, value)
        shown = ",".join(t.display() for t in args)
        self.events.append(f"{sym}({shown}):{term.display()}")
        return term

    def resolve_constraint(self, sym: str) -> Optional[ConstraintBody]:
        self._expect_kind(sym, "constr")
        if not self._once(("constr", sym)):
            return None
        payload = {"op": "constr", "sym": sym}
        value = self._ask(sym, payload)
        if value is None:
            return None
        body = self._parse_constraint_body(sym, value)
        self.events.append(
            f"{sym}:lambda({','.join(body.params)}).{body.body.display()}"
        )
        return body

    def update_exchange(self, primitive, comm: Mapping[str, Term]) -> Optional[Formula]:
        ep = self._endpoint(primitive.id)
        if ep is None:
            return None
        payload = {
            "op": "update",
            "prim": primitive.id,
            "comm": {k: comm[k].display() for k in sorted(comm)},
        }
        value = self._ask_endpoint(ep, primitive.id, payload)
        if value is None:
            return None
        if not isinstance(value, str):
            raise ProtocolError(
                f"update for {primitive.id!r} answered non-string {value!r}"
            )
        if not value.strip():
            return None
        return self._parse_eps(primitive, value)

    def _ask_endpoint(self, ep, who: str, payload: dict):
        reply = ep.request(payload)
        if reply is None:
            log.warning("no reply for %s within %.1fs", who, self.timeout_s)
            return None
        if not reply.get("ok"):
            log.info("%s declined: %s", who, reply.get("reason", ""))
            return None
        return reply.get("value")

    # -- validation -------------------------------------------------------

    def _expect_kind(self, sym: str, kind: str) -> None:
        actual = self.network.ownership.kind_of(sym)
        if actual != kind:
            raise ProtocolError(
                f"{sym!r} is declared as {actual or 'nothing'}, used as {kind}"
            )

    def _parse_data_term(self, sym: str, src: str) -> Term:
        from .netdsl import parse_term

        try:
            term = parse_term(src, self.network.ext_kinds)
        except LoadError as e:
            raise ProtocolError(f"function {sym!r} answered unparsable term: {e}")
        if not is_ground(term) or contains_noflow(term):
            raise ProtocolError(
                f"function {sym!r} must answer a ground, NOFLOW-free term"
            )
        if term not in self.network.universe:
            raise ProtocolError(
                f"function {sym!r} answered {term.display()}, not a universe datum"
            )
        return term

    def _parse_constraint_body(self, sym: str, value) -> ConstraintBody:
        from .netdsl import parse_formula

        if (
            not isinstance(value, dict)
            or not isinstance(value.get("params"), list)
            or not isinstance(value.get("body"), str)
            or not all(isinstance(p, str) for p in value["params"])
        ):
            raise ProtocolError(
                f"constraint {sym!r} must answer {{'params': [..], 'body': src}}"
            )
        params = list(value["params"])
        if len(set(params)) != len(params):
            raise ProtocolError(f"constraint {sym!r} repeats a parameter name")
        try:
            body = parse_formula(value["body"], self.network.ext_kinds)
        except LoadError as e:
            raise ProtocolError(f"constraint {sym!r} body does not parse: {e}")
        if formula_has_noflow(body):
            raise ProtocolError(f"constraint {sym!r} body mentions NOFLOW")
        kinds = []
        fv = free_vars(body)
        for p in params:
            as_formula = Var.sync(p) in fv
            as_term = Var.dataflow(p) in fv
            if as_formula and as_term:
                raise ProtocolError(
                    f"constraint {sym!r} uses parameter {p} as both formula and term"
                )
            kinds.append("formula" if as_formula else "term")
        owner = self.network.primitive(self.network.ownership.owner_of(sym))
        allowed = owner.pool | frozenset(
            Var(kind, p)
            for p in params
            for kind in (VarKind.SYNC, VarKind.DATAFLOW)
        )
        stray = fv - allowed
        if stray:
            shown = ", ".join(v.display() for v in sorted(stray, key=Var.sort_key))
            raise ProtocolError(
                f"constraint {sym!r} body mentions foreign variables: {shown}"
            )
        # stored as written: the overlap/additive split happens where the
        # constraint occurs, once its polarity there is known
        return ConstraintBody(tuple(params), tuple(kinds), body)

    def _parse_eps(self, primitive, src: str) -> Optional[Formula]:
        from .netdsl import parse_formula

        try:
            f = parse_formula(src, self.network.ext_kinds)
        except LoadError as e:
            log.warning("update for %s does not parse, keeping old: %s", primitive.id, e)
            return None
        if formula_has_noflow(f):
            log.warning("update for %s mentions NOFLOW, keeping old", primitive.id)
            return None
        fv = free_vars(f)
        stray = fv - primitive.pool
        bad_kinds = [
            v for v in fv if v.kind in (VarKind.STATE, VarKind.STATE_NEXT)
        ]
        if stray or bad_kinds:
            log.warning(
                "update for %s mentions variables outside its pool, keeping old",
                primitive.id,
            )
            return None
        return to_simple(f)


def scripted(handler) -> ScriptedEndpoint:
    """Convenience for wiring a python callable as an endpoint."""
    return ScriptedEndpoint(handler)
