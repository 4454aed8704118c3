"""Command-line front end.

Exit status of ``query``: 0 reachable, 1 not found, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import fixtures
from .boolnet import DEFAULT_MAX_CONJUNCTS, bn_to_aban, parse_bn
from .model import AbanError, format_aban, parse_aban, parse_local_state, validate_trajectory
from .oracle import (
    DEFAULT_STATE_BUDGET, GeneratorSpec, Query, StateBudgetExceeded, brute_force_reach,
    random_queries, random_walk_calibration, survey,
)
from .slcg import (
    build_slcg, detect_conflicts, eval_reach_prime, extract_trajectory, format_dot,
    or_gates, preprocess_cycles,
)
from .solver import ReachReport, SolverConfig, Verdict, _new_stats, perm_reach

EXIT_REACHABLE, EXIT_NOT_FOUND, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _bound(x):
    if x is None:
        return None
    return float(x) if isinstance(x, Fraction) else x


def _assignments(items) -> dict:
    out = {}
    for item in items or ():
        try:
            ls = parse_local_state(item)
        except AbanError as exc:
            raise UsageError(str(exc)) from None
        out[ls.automaton] = ls.value
    return out


def load_model(path: str, kind: str, max_conjuncts: int = DEFAULT_MAX_CONJUNCTS):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    if kind == "bn":
        return bn_to_aban(parse_bn(text), max_conjuncts=max_conjuncts)
    return parse_aban(text)


def _config(args) -> SolverConfig:
    return SolverConfig(
        seed=args.seed, trials_per_restart=args.trials, restarts=args.restarts,
        or_exhaustive_threshold=args.or_threshold, deterministic=args.deterministic)


def _static_only(net, init, goal, cfg: SolverConfig) -> ReachReport:
    # graph analysis without any search: conclusive only where the theory is
    stats = _new_stats()
    g = preprocess_cycles(build_slcg(net, init, goal))
    reach = eval_reach_prime(g)
    stats["d_or_gates"] = len(or_gates(g))
    if not reach[goal]:
        return ReachReport(Verdict.NOT_FOUND, None, Fraction(0), stats, "static")
    if not detect_conflicts(g):
        traj = extract_trajectory(g, net, init, goal, reach=reach)
        if validate_trajectory(net, init, traj, goal):
            return ReachReport(Verdict.REACHABLE, tuple(traj), Fraction(0), stats, "direct")
        stats["extraction_rejected"] += 1
    return ReachReport(Verdict.NOT_FOUND, None, None, stats, "static", quasi=True)


def _oracle(net, init, goal) -> ReachReport:
    stats = _new_stats()
    stats["d_or_gates"] = len(or_gates(preprocess_cycles(build_slcg(net, init, goal))))
    found, witness = brute_force_reach(net, init, goal, DEFAULT_STATE_BUDGET)
    if found:
        return ReachReport(Verdict.REACHABLE, tuple(witness), Fraction(0), stats, "oracle")
    return ReachReport(Verdict.NOT_FOUND, None, Fraction(0), stats, "oracle")


def report_document(net, report: ReachReport, seed: int, deterministic: bool) -> dict:
    stats = dict(report.stats)
    if deterministic:
        stats.pop("wall_time", None)
    return {
        "verdict": report.verdict.value,
        "witness": ["tr: " + net.format_transition(tr) for tr in report.witness or ()],
        "d_or_gates": stats.get("d_or_gates", 0),
        "stats": stats,
        "false_negative_bound": _bound(report.false_negative_bound),
        "conclusive": report.conclusive,
        "path": report.path,
        "seed": seed,
    }


def _emit(doc: dict, fmt: str, text_lines) -> None:
    if fmt == "machine":
        sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write("\n".join(text_lines) + "\n")


def cmd_query(args) -> int:
    net = load_model(args.model, args.kind)
    goal = parse_local_state(args.goal)
    net.local_state(goal.automaton, goal.value)
    init = net.state(_assignments(args.init))
    cfg = _config(args)
    if args.dump_slcg:
        g = preprocess_cycles(build_slcg(net, init, goal))
        Path(args.dump_slcg).write_text(format_dot(g))
    if args.method == "oracle":
        report = _oracle(net, init, goal)
    elif args.method == "slcg":
        report = _static_only(net, init, goal, cfg)
    else:
        report = perm_reach(net, init, goal, cfg)
    doc = report_document(net, report, args.seed, args.deterministic)
    lines = [f"verdict: {doc['verdict']} ({report.path})",
             f"OR gates: {doc['d_or_gates']}",
             f"false-negative bound: {doc['false_negative_bound']}"]
    if doc["witness"]:
        lines.append(f"witness ({len(doc['witness'])} steps):")
        lines.extend("  " + w for w in doc["witness"])
    lines.append("stats: " + " ".join(f"{k}={v}" for k, v in sorted(doc["stats"].items())))
    _emit(doc, args.format, lines)
    return EXIT_REACHABLE if report.reachable else EXIT_NOT_FOUND


def _fixture_queries() -> list:
    out = []
    for name, text, goal, _ in fixtures.REFERENCE:
        net = parse_aban(text)
        out.append(Query(net, net.initial, parse_local_state(goal), name))
    return out


def cmd_survey(args) -> int:
    cfg = _config(args)
    if args.fixtures:
        queries = _fixture_queries()
    else:
        spec = GeneratorSpec(args.automata, args.in_degree, 2, args.density, args.seed)
        queries = random_queries(spec, args.queries, args.per_instance) if args.queries else []
    report = survey(queries, cfg, use_oracle=not args.no_oracle)
    doc = report.as_dict(args.deterministic)
    doc["seed"] = args.seed
    lines = [f"{'result':<16}{'count':>8}{'%':>8}"]
    lines += [f"{label:<16}{count:>8}{pct:>8.1f}" for label, count, pct in report.rows()]
    lines.append(f"total {report.total} queries, {report.oracle_checked} checked by the oracle")
    if not args.deterministic:
        lines.append(f"time {report.wall_time:.2f} s")
    _emit(doc, args.format, lines)
    return EXIT_REACHABLE if not report.false_positive else EXIT_NOT_FOUND


def cmd_convert(args) -> int:
    net = load_model(args.model, "bn", args.max_conjuncts)
    text = format_aban(net)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_calibrate(args) -> int:
    mean = random_walk_calibration(args.n, args.runs, args.seed)
    doc = {"n": args.n, "runs": args.runs, "seed": args.seed, "mean_steps": mean,
           "expected": args.n * args.n, "relative_error": abs(mean - args.n ** 2) / args.n ** 2}
    _emit(doc, args.format, [f"n={args.n} runs={args.runs}: mean {mean:.3f} steps, n^2 = {args.n ** 2}"])
    return 0


def _add_solver_flags(p) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=None, help="trials per restart (default 2*D^2)")
    p.add_argument("--restarts", type=int, default=None, help="restarts (default ceil(log2 D))")
    p.add_argument("--or-threshold", type=int, default=20,
                   help="enumerate OR assignments exhaustively up to this many OR gates")
    p.add_argument("--deterministic", action="store_true",
                   help="first-choice extraction and no wall-clock fields")
    p.add_argument("--format", choices=("text", "machine"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permreach", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("query", help="decide reachability of one local state")
    q.add_argument("model")
    q.add_argument("--goal", required=True, metavar="ID=BIT")
    q.add_argument("--init", action="append", metavar="ID=BIT", help="initial-state override")
    q.add_argument("--kind", choices=("aban", "bn"), default="aban")
    q.add_argument("--method", choices=("permreach", "slcg", "oracle"), default="permreach")
    q.add_argument("--dump-slcg", metavar="PATH", help="write the preprocessed graph as a digraph")
    _add_solver_flags(q)
    q.set_defaults(func=cmd_query)

    s = sub.add_parser("survey", help="compare the solver with the exhaustive oracle")
    s.add_argument("--fixtures", action="store_true", help="survey the bundled reference networks")
    s.add_argument("--automata", type=int, default=6)
    s.add_argument("--in-degree", type=int, default=3)
    s.add_argument("--density", type=float, default=0.5)
    s.add_argument("--queries", type=int, default=100)
    s.add_argument("--per-instance", type=int, default=1)
    s.add_argument("--no-oracle", action="store_true")
    _add_solver_flags(s)
    s.set_defaults(func=cmd_survey)

    c = sub.add_parser("convert", help="translate a Boolean network into an automata network")
    c.add_argument("model")
    c.add_argument("--max-conjuncts", type=int, default=DEFAULT_MAX_CONJUNCTS)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_convert)

    k = sub.add_parser("calibrate", help="mean hitting time of the reflecting walk")
    k.add_argument("--n", type=int, default=10)
    k.add_argument("--runs", type=int, default=10000)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--format", choices=("text", "machine"), default="text")
    k.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else 0
    try:
        return args.func(args)
    except (UsageError, AbanError, StateBudgetExceeded, ValueError) as exc:
        print(f"permreach: error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
