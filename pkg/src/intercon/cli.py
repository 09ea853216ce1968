"""Command-line interface.

    intercon check net.net
    intercon firings net.net --mode classical|partial|simple|local [--block ids]
    intercon solve net.net [--policy max|first] [--max-region N]
    intercon run net.net --rounds N [--policy max|first] [--trace out]
    intercon embed net.net --check
    intercon oracle-diff net.net [--block ids]

Endpoints declared in the network file are wired for ``firings``,
``solve`` and ``run``; unresolved external symbols count as unknown
rather than as errors there.  ``INTERCON_TIMEOUT_MS`` bounds each
resolution request.

Exit codes: 0 success, 1 load/validation failure or property violation,
2 protocol failure, 3 the solver found no firing.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .classical import enumerate_classical_firings, is_classical_firing
from .core import Interpretation, conj, free_vars, has_external_symbols, pair_closure
from .embeddings import (
    classical_to_partial,
    extend_p,
    interpretation_to_classical,
    minimize_to_simple,
    partial_to_classical,
)
from .engine import Engine, PrimitiveKind
from .errors import EngineError, LoadError, PreconditionError, ProtocolError
from .locality import Configuration, MergePolicy, local_firings
from .netdsl import Network, load_network
from .oracle import oracle_firings, oracle_local_firings
from .partial import enumerate_partial_firings, is_partial_firing
from .protocol import Router
from .simple import simple_firings


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LoadError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except PreconditionError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ProtocolError as e:
        print(f"protocol error: {e}", file=sys.stderr)
        return 2
    except EngineError as e:
        print(f"no firing: {e}", file=sys.stderr)
        return 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intercon", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="load a network and run all load-time validations")
    p.add_argument("net")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("firings", help="enumerate firings under one of the semantics")
    p.add_argument("net")
    p.add_argument(
        "--mode",
        required=True,
        choices=("classical", "partial", "simple", "local"),
    )
    p.add_argument(
        "--block",
        action="append",
        default=[],
        metavar="IDS",
        help="restrict to these primitives (comma separated, repeatable)",
    )
    p.set_defaults(func=_cmd_firings)

    p = sub.add_parser("solve", help="run one solve phase and print the firing")
    p.add_argument("net")
    _policy_flags(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("run", help="drive the engine for a number of rounds")
    p.add_argument("net")
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--trace", metavar="FILE", help="also write the trace to FILE")
    _policy_flags(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser(
        "embed", help="check the assignment recodings on the network's own blocks"
    )
    p.add_argument("net")
    p.add_argument("--check", action="store_true", help="run the property suites")
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser(
        "oracle-diff", help="compare the solver against the brute-force oracle"
    )
    p.add_argument("net")
    p.add_argument("--block", action="append", default=[], metavar="IDS")
    p.set_defaults(func=_cmd_oracle_diff)

    return parser


def _policy_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--policy", choices=("max", "first"), default="max")
    p.add_argument("--max-region", type=int, default=None)


def _select(net: Network, block_args: list) -> list:
    ids = [x for item in block_args for x in item.split(",") if x]
    if not ids:
        return list(net.primitives)
    known = {p.id for p in net.primitives}
    unknown = [i for i in ids if i not in known]
    if unknown:
        raise LoadError(f"{net.source}: no such primitive: {', '.join(unknown)}")
    wanted = set(ids)
    return [p for p in net.primitives if p.id in wanted]


def _wire(net: Network) -> Router:
    """Attach endpoints; exploration commands treat unresolved symbols as
    unknown instead of failing."""
    router = Router(net)
    net.interp.resolver = router
    net.interp.on_missing = "skip"
    return router


def _cmd_check(args) -> int:
    net = load_network(args.net)
    n_ext = sum(1 for p in net.primitives if p.kind is PrimitiveKind.EXTERNAL)
    print(
        f"{args.net}: ok — {len(net.primitives)} primitives "
        f"({n_ext} external), universe of {len(net.universe.data)}"
    )
    return 0


def _cmd_firings(args) -> int:
    net = load_network(args.net)
    selected = _select(net, args.block)
    router = _wire(net)
    try:
        if args.mode == "local":
            config = Configuration(tuple(p.block() for p in selected))
            found = local_firings(config, net.interp)
        else:
            formula = conj(*(p.block().formula for p in selected))
            if args.mode == "classical":
                interp_c = interpretation_to_classical(net.interp)
                found = enumerate_classical_firings(formula, interp_c)
            elif args.mode == "partial":
                found = enumerate_partial_firings(formula, net.interp)
            else:
                found = simple_firings(formula, net.interp)
    finally:
        router.close()
    for sigma in found:
        print(sigma.render())
    print(f"# {len(found)} firings ({args.mode})")
    return 0


def _cmd_solve(args) -> int:
    net = load_network(args.net)
    router = _wire(net)
    engine = Engine(
        primitives=list(net.primitives),
        interp=net.interp,
        policy=MergePolicy(prefer=args.policy, max_region=args.max_region),
        router=router,
    )
    try:
        firing = engine.solve_phase()
    finally:
        router.close()
    print(f"firing={firing.assignment.render()} touched=[{','.join(firing.touched)}]")
    return 0


def _cmd_run(args) -> int:
    net = load_network(args.net)
    router = _wire(net)
    engine = Engine(
        primitives=list(net.primitives),
        interp=net.interp,
        policy=MergePolicy(prefer=args.policy, max_region=args.max_region),
        router=router,
    )
    try:
        engine.run(args.rounds)
    finally:
        for line in engine.trace:
            print(line)
        if args.trace:
            with open(args.trace, "w", encoding="utf-8") as fh:
                fh.writelines(line + "\n" for line in engine.trace)
        router.close()
    return 0


def _cmd_embed(args) -> int:
    net = load_network(args.net)
    failures = 0
    checked = 0
    for p in net.primitives:
        formula = p.block().formula
        if p.kind is not PrimitiveKind.STATELESS or has_external_symbols(formula):
            print(f"{p.id}: skipped (recodings cover stateless internal blocks)")
            continue
        pool = sorted(pair_closure(free_vars(formula)), key=lambda v: v.sort_key())
        if len(pool) > 6:
            print(f"{p.id}: skipped (pool of {len(pool)} variables)")
            continue
        n, bad = _embed_suite(formula, pool, net.interp)
        checked += n
        failures += len(bad)
        status = "ok" if not bad else "FAIL"
        print(f"{p.id}: {status} ({n} checks)")
        for msg in bad:
            print(f"  {msg}")
    print(f"# {checked} checks, {failures} failures")
    return 0 if failures == 0 else 1


def _embed_suite(formula, pool, interp: Interpretation):
    """Every classical firing recodes to a partial one; every partial firing
    (the tables are total) recodes back and contains a simple firing; every
    simple firing's flow closure is a partial firing."""
    bad = []
    n = 0
    interp_c = interpretation_to_classical(interp)
    for sigma in enumerate_classical_firings(formula, interp_c, pool):
        n += 1
        if not is_partial_firing(classical_to_partial(sigma), formula, interp):
            bad.append(f"classical {sigma.render()} does not recode to partial")
    for sigma in enumerate_partial_firings(formula, interp, pool):
        n += 2
        back = partial_to_classical(sigma, pool, interp_c.universe)
        if not is_classical_firing(back, formula, interp_c, pool):
            bad.append(f"partial {sigma.render()} does not recode to classical")
        if minimize_to_simple(sigma, formula, interp) is None:
            bad.append(f"partial {sigma.render()} contains no simple firing")
    for sigma in simple_firings(formula, interp):
        n += 1
        if not is_partial_firing(extend_p(sigma), formula, interp):
            bad.append(f"simple {sigma.render()} does not close to partial")
    return n, bad


def _cmd_oracle_diff(args) -> int:
    net = load_network(args.net)
    selected = _select(net, args.block)
    diffs = 0
    for p in selected:
        formula = p.block().formula
        pool = sorted(pair_closure(free_vars(formula)), key=lambda v: v.sort_key())
        for mode in ("classical", "partial", "simple"):
            if mode == "classical" and has_external_symbols(formula):
                print(f"{p.id} {mode}: skipped (external symbols)")
                continue
            try:
                if mode == "classical":
                    interp_c = interpretation_to_classical(net.interp)
                    main = enumerate_classical_firings(formula, interp_c, pool)
                    ours = oracle_firings(mode, formula, interp_c, pool)
                elif mode == "partial":
                    main = enumerate_partial_firings(formula, net.interp, pool)
                    ours = oracle_firings(mode, formula, net.interp, pool)
                else:
                    main = simple_firings(formula, net.interp)
                    ours = oracle_firings(mode, formula, net.interp, pool)
            except PreconditionError as e:
                print(f"{p.id} {mode}: skipped ({e})")
                continue
            diffs += _report(f"{p.id} {mode}", main, ours)
    try:
        config = Configuration(tuple(p.block() for p in selected))
        main = local_firings(config, net.interp)
        ours = oracle_local_firings(config, net.interp)
    except PreconditionError as e:
        print(f"local: skipped ({e})")
    else:
        diffs += _report("local", main, ours)
    return 0 if diffs == 0 else 1


def _report(label: str, main, ours) -> int:
    main_set, ours_set = set(main), set(ours)
    if main_set == ours_set:
        print(f"{label}: OK ({len(main_set)} firings)")
        return 0
    print(f"{label}: DIFF")
    for sigma in sorted(main_set - ours_set, key=lambda s: s.sort_key()):
        print(f"  only solver: {sigma.render()}")
    for sigma in sorted(ours_set - main_set, key=lambda s: s.sort_key()):
        print(f"  only oracle: {sigma.render()}")
    return 1


if __name__ == "__main__":
    sys.exit(main())
