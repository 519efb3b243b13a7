"""Command-line driver.

Exit codes: 0 for success (and YES verdicts), 1 for NO verdicts, 2 for
parse, semantic, or limit errors.  Output is deterministic for a fixed
seed.  Set WAITNET_COLOR=0|1 to force diagnostics styling off or on.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import oracle, scta, semantics, stateclass, textio
from .errors import WaitnetError
from .model import WaitingNet
from .stateclass import ExplorationLimits

EXIT_OK = 0
EXIT_NO = 1
EXIT_ERROR = 2


def _use_color() -> bool:
    env = os.environ.get("WAITNET_COLOR")
    if env in ("0", "1"):
        return env == "1"
    return sys.stderr.isatty()


def _fail(message: str) -> int:
    if _use_color():
        message = f"\x1b[31m{message}\x1b[0m"
    print(f"waitnet: {message}", file=sys.stderr)
    return EXIT_ERROR


def _limits(args) -> ExplorationLimits:
    return ExplorationLimits(
        max_tokens_per_place=args.max_tokens, max_classes=args.max_classes
    )


def _parse_marking_spec(net: WaitingNet, spec: str):
    tokens = {}
    if spec.strip():
        for part in spec.split(","):
            if "=" not in part:
                raise WaitnetError(f"bad marking item {part!r}, expected place=count")
            place, _, count = part.partition("=")
            place = place.strip()
            if not count.strip().isdigit():
                raise WaitnetError(f"bad count in {part!r}")
            tokens[place] = tokens.get(place, 0) + int(count)
    return net.make_marking(tokens)


def _add_limit_flags(parser):
    parser.add_argument("--max-classes", type=int, default=100000, metavar="K")
    parser.add_argument("--max-tokens", type=int, default=16, metavar="B")


def _add_format_flags(parser):
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--dot", action="store_true", help="emit DOT text")
    group.add_argument("--json", action="store_true", help="emit JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="waitnet", description="analysis toolkit for waiting nets"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="print a random legal run and its timed word")
    p.add_argument("net")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=None, help="default 10 * |T|")

    p = sub.add_parser("scg", help="build the state class graph")
    p.add_argument("net")
    _add_format_flags(p)
    _add_limit_flags(p)

    for name, help_text in (
        ("reach", "is the given marking reachable?"),
        ("cover", "is the given marking coverable?"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("net")
        p.add_argument("--marking", required=True, metavar="SPEC", help="comma list place=count")
        _add_limit_flags(p)

    p = sub.add_parser("export-ta", help="export the state class timed automaton")
    p.add_argument("net")
    _add_format_flags(p)
    _add_limit_flags(p)

    p = sub.add_parser("check", help="run the invariant suite on a net (and optionally fuzz)")
    p.add_argument("net", nargs="?")
    p.add_argument("--fuzz", type=int, default=0, metavar="TRIALS")
    p.add_argument("--fuzz-seed", type=int, default=0)
    _add_limit_flags(p)

    return parser


def _cmd_simulate(args) -> int:
    net = textio.parse_net_file(args.net)
    steps = args.steps if args.steps is not None else 10 * len(net.transitions)
    run = semantics.random_run(net, seed=args.seed, max_steps=steps)
    print(f"run of {net.name} (seed {args.seed}, {len(run.steps)} steps)")
    now = Fraction(0)
    for step in run.steps:
        now += step.delay
        print(
            f"  +{step.delay} fire {step.transition} at {now}"
            f" -> {net.marking_str(step.config.marking)}"
        )
    word = semantics.timed_word_of(net, run)
    rendered = " ".join(f"({label},{date})" for label, date in word) or "(empty)"
    print(f"timed word: {rendered}")
    return EXIT_OK


def _cmd_scg(args) -> int:
    net = textio.parse_net_file(args.net)
    scg = stateclass.build_scg(net, _limits(args))
    if args.dot:
        sys.stdout.write(stateclass.scg_dot(scg))
        return EXIT_OK
    if args.json:
        json.dump(stateclass.scg_json(scg), sys.stdout, indent=2)
        sys.stdout.write("\n")
        return EXIT_OK
    stats = stateclass.domain_stats(scg)
    print(f"{stats.class_count} classes")
    print(f"{stats.edge_count} edges")
    print(f"{stats.distinct_domains} distinct domains")
    print(f"max constant {stats.max_constant}")
    for cid, cls in enumerate(scg.classes):
        extra = (
            " timeout:" + ",".join(sorted(cls.timed_out)) if cls.timed_out else ""
        )
        print(f"  Cl{cid} {net.marking_str(cls.marking)} {cls.domain}{extra}")
    for edge in scg.edges:
        label = "|".join(stateclass.interval_str(iv) for iv in edge.intervals)
        print(f"  Cl{edge.source} --{edge.transition} {label}--> Cl{edge.target}")
    return EXIT_OK


def _cmd_query(args, cover: bool) -> int:
    net = textio.parse_net_file(args.net)
    target = _parse_marking_spec(net, args.marking)
    query = stateclass.coverable if cover else stateclass.reachable
    verdict = query(net, target, _limits(args))
    if verdict.found:
        print("YES")
        print(f"witness: {verdict.witness.describe(verdict.scg)}")
        return EXIT_OK
    print("NO")
    return EXIT_NO


def _cmd_export_ta(args) -> int:
    net = textio.parse_net_file(args.net)
    automaton = scta.build_scta(net, _limits(args))
    if args.dot:
        sys.stdout.write(scta.ta_dot(automaton))
    else:
        json.dump(scta.ta_json(automaton), sys.stdout, indent=2)
        sys.stdout.write("\n")
    return EXIT_OK


def _cmd_check(args) -> int:
    problems = 0
    if args.net is None and not args.fuzz:
        return _fail("check needs a net file, --fuzz TRIALS, or both")
    if args.net is not None:
        net = textio.parse_net_file(args.net)
        scg = stateclass.build_scg(net, _limits(args))
        stats = stateclass.domain_stats(scg)
        print(f"{stats.class_count} classes, {stats.edge_count} edges")
        if stats.violations:
            problems += len(stats.violations)
            for violation in stats.violations:
                print(f"FAIL bounds: {violation}")
        else:
            print("PASS domain constants within static interval bounds")
        dedup = {cls.key() for cls in scg.classes}
        if len(dedup) == len(scg.classes):
            print("PASS class store is duplicate-free")
        else:
            problems += 1
            print("FAIL duplicate state classes in the store")
        hollow = 0
        for cls in scg.classes:
            for tid in net.transition_ids():
                if stateclass.firable(net, cls, tid) and not stateclass.post_set(
                    net, cls, tid
                ):
                    hollow += 1
        if hollow:
            problems += hollow
            print(f"FAIL {hollow} firable transitions without successors")
        else:
            print("PASS every firable transition has a successor class")
    if args.fuzz:
        spec = oracle.RandomNetSpec(seed=args.fuzz_seed)
        summary = oracle.fuzz(spec, trials=args.fuzz)
        print(
            f"fuzz: {summary.trials} trials, {summary.built} built,"
            f" {summary.skipped} skipped, {len(summary.failures)} failures"
        )
        if summary.failures:
            problems += len(summary.failures)
            print(json.dumps(summary.to_json(), indent=2))
    return EXIT_OK if problems == 0 else EXIT_ERROR


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "scg":
            return _cmd_scg(args)
        if args.command == "reach":
            return _cmd_query(args, cover=False)
        if args.command == "cover":
            return _cmd_query(args, cover=True)
        if args.command == "export-ta":
            return _cmd_export_ta(args)
        if args.command == "check":
            return _cmd_check(args)
    except WaitnetError as exc:
        return _fail(str(exc))
    except OSError as exc:
        return _fail(str(exc))
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
