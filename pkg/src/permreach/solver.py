"""PermReach: permutation search over AND gates, random walk over OR gates."""
from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .model import Aban, GlobalState, LocalState, Transition, validate_trajectory
from .slcg import (
    Slcg, SolutionNode, build_slcg, detect_conflicts, eval_reach_prime,
    extract_trajectory, or_gates, preprocess_cycles,
)

__all__ = [
    "Verdict", "SolverConfig", "ReachReport", "PrefixFailCache",
    "sequential_reach", "solve_and_gate", "find_simple_and_gates", "solve_and_layer",
    "or_exhaustive", "or_heuristic", "perm_reach", "effective_or_gates",
]

# how many times a lost initial local state may be re-derived from a fresh graph
_MAX_REBUILD_DEPTH = 2


class Verdict(str, Enum):
    REACHABLE = "reachable"
    NOT_FOUND = "not_found"


@dataclass(frozen=True)
class SolverConfig:
    in_degree_bound: int = 4
    max_clauses_per_state: int = 2
    trials_per_restart: int | None = None
    restarts: int | None = None
    or_exhaustive_threshold: int = 20
    seed: int = 0
    deterministic: bool = False
    prune: bool = True
    walk: str = "focused"

    def __post_init__(self):
        if self.in_degree_bound < 1:
            raise ValueError("in_degree_bound must be positive")
        if self.trials_per_restart is not None and self.trials_per_restart < 1:
            raise ValueError("trials_per_restart must be positive")
        if self.restarts is not None and self.restarts < 1:
            raise ValueError("restarts must be positive")
        if self.or_exhaustive_threshold < 0:
            raise ValueError("or_exhaustive_threshold must be non-negative")
        if self.walk not in ("focused", "uniform"):
            raise ValueError("walk must be 'focused' or 'uniform'")

    def trial_budget(self, d: int) -> int:
        return self.trials_per_restart if self.trials_per_restart is not None else 2 * d * d

    def restart_budget(self, d: int) -> int:
        if self.restarts is not None:
            return self.restarts
        return max(1, math.ceil(math.log2(max(d, 2))))


@dataclass
class ReachReport:
    verdict: Verdict
    witness: tuple | None = None
    false_negative_bound: Fraction | None = None
    stats: dict = field(default_factory=dict)
    path: str = ""
    quasi: bool = False

    @property
    def reachable(self) -> bool:
        return self.verdict is Verdict.REACHABLE

    @property
    def conclusive(self) -> bool:
        return self.reachable or (self.false_negative_bound == 0 and not self.quasi)


def _new_stats() -> dict:
    return {
        "d_or_gates": 0, "and_gates_solved": 0, "permutations_tested": 0,
        "prefixes_pruned": 0, "restarts_used": 0, "trials": 0,
        "assignments_tried": 0, "extraction_rejected": 0, "wall_time": 0.0,
    }


class PrefixFailCache:
    """Orders known to fail, keyed by the global state they were tried from.

    A failed prefix ``p :: m`` is stored as the pair ``(state, m)`` where
    ``state`` is what ``p`` left behind. Any later permutation that arrives
    in the same state and tries ``m`` next fails the same way, whatever came
    before; that covers prefix extension and intervening steps that leave the
    state untouched.
    """

    def __init__(self):
        self.failed_steps: set = set()
        self.failed_prefixes: dict = {}

    def record(self, start: GlobalState, prefix: Sequence[LocalState], state: GlobalState) -> None:
        self.failed_steps.add((state, prefix[-1]))
        self.failed_prefixes.setdefault(start, set()).add(tuple(prefix))

    def prunes(self, state: GlobalState, member: LocalState) -> bool:
        return (state, member) in self.failed_steps

    def __len__(self) -> int:
        return len(self.failed_steps)


class _Stuck(Exception):
    def __init__(self, node):
        super().__init__(node)
        self.node = node


def _can_fire(s: GlobalState, tr: Transition) -> bool:
    return s[tr.target] == 1 - tr.value and s.holds_all(tr.condition)


class _Engine:
    """Realises local states on a fixed-choice working graph by simulation."""

    def __init__(self, net: Aban, g: Slcg, *, choices: dict | None = None,
                 reach: dict | None = None, cfg: SolverConfig | None = None,
                 stats: dict | None = None, cache: PrefixFailCache | None = None,
                 prefer: dict | None = None, depth: int = 0):
        self.net = net
        self.g = g
        self.choices = choices or {}
        self.reach = eval_reach_prime(g) if reach is None else reach
        self.cfg = cfg or SolverConfig()
        self.stats = _new_stats() if stats is None else stats
        self.cache = PrefixFailCache() if cache is None else cache
        self.prefer = dict(prefer or {})
        for ls, sol in self.choices.items():
            self.prefer[ls] = sol.transition
        self.depth = depth
        self._done: dict = {}

    def solution(self, ls: LocalState) -> SolutionNode | None:
        node = self.g.states.get(ls)
        if node is None:
            return None
        if ls in self.choices:
            return self.choices[ls]
        positive = [sol for sol in node.solutions if self.reach[sol]]
        if not positive:
            return None
        want = self.prefer.get(ls)
        for sol in positive:
            if want is not None and sol.transition == want:
                return sol
        return positive[0]

    def follow(self, ls: LocalState) -> list:
        sol = self.solution(ls)
        return [] if sol is None else [sol]

    def realize(self, s: GlobalState, ls: LocalState) -> tuple:
        if s.holds(ls):
            return s, []
        key = (s, ls)
        hit = self._done.get(key)
        if hit is not None:
            return hit
        sol = self.solution(ls)
        if sol is None:
            raise _Stuck(ls)
        if sol.trivial:
            out = self._rederive(s, ls)
        else:
            if len(sol.required) >= 2:
                cur, steps = self.solve_gate(s, sol)
            else:
                cur, steps = s, []
                for r in sol.required:
                    cur, more = self.realize(cur, r)
                    steps = steps + more
            tr = sol.transition
            if not _can_fire(cur, tr):
                raise _Stuck(sol)
            out = (cur.set(tr.target, tr.value), steps + [tr])
        self._done[key] = out
        return out

    def _rederive(self, s: GlobalState, ls: LocalState) -> tuple:
        # initially held but lost since: consult a graph rooted in the current state
        if self.depth >= _MAX_REBUILD_DEPTH:
            raise _Stuck(ls)
        g2 = preprocess_cycles(build_slcg(self.net, s, ls))
        sub = _Engine(self.net, g2, cfg=self.cfg, stats=self.stats,
                      prefer=self.prefer, depth=self.depth + 1)
        if not sub.reach[ls]:
            raise _Stuck(ls)
        try:
            return sub.realize(s, ls)
        except _Stuck:
            raise _Stuck(ls) from None

    def sequence(self, s: GlobalState, seq: Sequence[LocalState]) -> tuple:
        cur, steps = s, []
        for m in seq:
            cur, more = self.realize(cur, m)
            steps = steps + more
        if not cur.holds_all(seq):
            raise _Stuck(seq[-1])
        return cur, steps

    def solve_gate(self, s: GlobalState, sol: SolutionNode) -> tuple:
        members = list(sol.required)
        if s.holds_all(members):
            return s, []
        cap = math.factorial(self.cfg.in_degree_bound) if len(members) > self.cfg.in_degree_bound else None
        tested = 0
        for perm in itertools.permutations(members):
            if cap is not None and tested >= cap:
                break
            cur, steps = s, []
            pruned = failed = False
            for i, m in enumerate(perm):
                if self.cfg.prune and self.cache.prunes(cur, m):
                    pruned = True
                    break
                try:
                    cur, more = self.realize(cur, m)
                except _Stuck:
                    if self.cfg.prune:
                        self.cache.record(s, perm[:i + 1], cur)
                    failed = True
                    break
                steps = steps + more
            if pruned:
                self.stats["prefixes_pruned"] += 1
                continue
            tested += 1
            self.stats["permutations_tested"] += 1
            if not failed and cur.holds_all(members):
                self.stats["and_gates_solved"] += 1
                return cur, steps
        raise _Stuck(sol)


def sequential_reach(net: Aban, start: GlobalState, seq: Sequence[LocalState], g: Slcg,
                     *, choices: dict | None = None) -> list | None:
    """Reach the members of ``seq`` one after the other from ``start``.

    Returns the concatenated trajectory if every member holds at the end,
    otherwise None.
    """
    engine = _Engine(net, g, choices=choices)
    try:
        return engine.sequence(start, list(seq))[1]
    except _Stuck:
        return None


def solve_and_gate(net: Aban, start: GlobalState, sub: Iterable[LocalState], g: Slcg,
                   cache: PrefixFailCache | None = None, *, cfg: SolverConfig | None = None,
                   stats: dict | None = None, choices: dict | None = None) -> list | None:
    """First permutation of ``sub`` (lexicographic, declaration order) realisable in sequence.

    Returns its trajectory, or None once every unpruned permutation failed.
    """
    members = tuple(net.ordered(set(sub)))
    engine = _Engine(net, g, choices=choices, cfg=cfg, stats=stats, cache=cache)
    gate = SolutionNode(-1, g.goal, members, None)
    try:
        return engine.solve_gate(start, gate)[1]
    except _Stuck:
        return None


def find_simple_and_gates(g: Slcg, *, choose: Callable | None = None,
                          resolved: Iterable[SolutionNode] = (),
                          state: GlobalState | None = None) -> list:
    """Multi-requirement solution nodes with no other such node below them.

    ``choose`` restricts the solutions followed from a state (default: all),
    ``resolved`` gates are treated as having no successors and states holding
    in ``state`` are not descended into.
    """
    resolved = set(resolved)
    follow = choose or (lambda ls: g.states[ls].solutions if ls in g.states else ())
    below: dict = {}
    order: list = []

    def has_gate(ls: LocalState) -> bool:
        if ls in below:
            return below[ls]
        below[ls] = False
        found = False
        if state is None or not state.holds(ls):
            for sol in follow(ls):
                if sol in resolved or sol.trivial:
                    continue
                inner = False
                for r in sol.required:
                    inner = has_gate(r) or inner
                if len(sol.required) >= 2:
                    if not inner and sol not in order:
                        order.append(sol)
                    found = True
                found = found or inner
        below[ls] = found
        return found

    has_gate(g.goal)
    return order


def _layer(engine: _Engine, start: GlobalState) -> tuple:
    g = engine.g
    resolved: set = set()
    s, traj = start, []
    while True:
        gates = find_simple_and_gates(g, choose=engine.follow, resolved=resolved, state=s)
        if not gates:
            break
        for gate in gates:
            resolved.add(gate)
            if s.holds(gate.owner):
                continue
            s, steps = engine.solve_gate(s, gate)
            if not _can_fire(s, gate.transition):
                raise _Stuck(gate)
            s = s.set(gate.transition.target, gate.transition.value)
            traj = traj + steps + [gate.transition]
    s, steps = engine.realize(s, g.goal)
    return s, traj + steps


def solve_and_layer(net: Aban, state: GlobalState, g: Slcg, *, choices: dict | None = None,
                    cfg: SolverConfig | None = None, stats: dict | None = None) -> tuple | None:
    """Resolve simple AND gates pass by pass, firing each one's trajectory.

    Returns ``(final_state, trajectory)`` with the goal holding in the final
    state, or None as soon as one gate has no realisable order.
    """
    engine = _Engine(net, g, choices=choices, cfg=cfg, stats=stats)
    try:
        return _layer(engine, state)
    except _Stuck:
        return None


def effective_or_gates(g: Slcg, reach: dict | None = None) -> list:
    """``(state, options)`` for OR gates with at least two reach'-positive solutions."""
    reach = eval_reach_prime(g) if reach is None else reach
    out = []
    for ls in or_gates(g):
        options = [sol for sol in g.states[ls].solutions if reach[sol]]
        if len(options) >= 2:
            out.append((ls, options))
    return out


def _active_key(engine: _Engine, gates: list) -> tuple:
    # choices that matter: those of gates reachable from the root under the assignment
    seen: set = set()
    work = [engine.g.goal]
    while work:
        ls = work.pop()
        if ls in seen:
            continue
        seen.add(ls)
        for sol in engine.follow(ls):
            work.extend(sol.required)
    return tuple(engine.choices[ls].id for ls, _ in gates if ls in seen)


def _implicated(engine: _Engine, failure, gates: list) -> list:
    g = engine.g
    gate_set = {ls for ls, _ in gates}
    parents: dict = {}
    seen: set = set()
    work = [g.goal]
    while work:
        ls = work.pop()
        if ls in seen:
            continue
        seen.add(ls)
        for sol in engine.follow(ls):
            for r in sol.required:
                parents.setdefault(r, set()).add(ls)
                work.append(r)
    if isinstance(failure, SolutionNode):
        up, down = [failure.owner], list(failure.required)
    elif isinstance(failure, LocalState):
        up, down = [failure], [r for sol in engine.follow(failure) for r in sol.required]
    else:
        up, down = [g.goal], []
    hit: set = set()
    stack = list(up)
    while stack:
        ls = stack.pop()
        if ls in hit:
            continue
        hit.add(ls)
        stack.extend(parents.get(ls, ()))
    stack = list(down)
    while stack:
        ls = stack.pop()
        if ls in hit:
            continue
        hit.add(ls)
        stack.extend(r for sol in engine.follow(ls) for r in sol.required)
    picked = [i for i, (ls, _) in enumerate(gates) if ls in hit and ls in gate_set]
    if not picked:
        picked = [i for i, (ls, _) in enumerate(gates) if ls in seen]
    return picked or list(range(len(gates)))


def _attempt(net: Aban, g: Slcg, reach: dict, choices: dict, cfg: SolverConfig,
             stats: dict) -> tuple:
    engine = _Engine(net, g, choices=choices, reach=reach, cfg=cfg, stats=stats)
    stats["assignments_tried"] += 1
    try:
        _, traj = _layer(engine, g.init)
    except _Stuck as exc:
        return None, exc.node, engine
    if validate_trajectory(net, g.init, traj, g.goal):
        return tuple(traj), None, engine
    return None, g.goal, engine


def or_exhaustive(net: Aban, g: Slcg, goal: LocalState | None = None,
                  cfg: SolverConfig | None = None, *, stats: dict | None = None,
                  reach: dict | None = None) -> ReachReport:
    """Try every combination of positive OR-gate choices, first witness wins."""
    cfg = cfg or SolverConfig()
    stats = _new_stats() if stats is None else stats
    reach = eval_reach_prime(g) if reach is None else reach
    stats["d_or_gates"] = len(or_gates(g))
    if not reach.get(g.goal, False):
        return ReachReport(Verdict.NOT_FOUND, None, Fraction(0), stats, "static")
    gates = effective_or_gates(g, reach)
    tried: set = set()
    for combo in itertools.product(*(range(len(opts)) for _, opts in gates)):
        choices = {ls: opts[k] for (ls, opts), k in zip(gates, combo)}
        probe = _Engine(net, g, choices=choices, reach=reach, cfg=cfg)
        key = _active_key(probe, gates)
        if key in tried:
            continue
        tried.add(key)
        witness, _, _ = _attempt(net, g, reach, choices, cfg, stats)
        if witness is not None:
            return ReachReport(Verdict.REACHABLE, witness, Fraction(0), stats, "exhaustive")
    return ReachReport(Verdict.NOT_FOUND, None, Fraction(0), stats, "exhaustive", quasi=True)


def or_heuristic(net: Aban, g: Slcg, goal: LocalState | None = None,
                 cfg: SolverConfig | None = None, *, stats: dict | None = None,
                 reach: dict | None = None) -> ReachReport:
    """Random walk over OR-gate assignments with restarts.

    Each restart draws a uniform assignment, then each trial evaluates the
    AND layer under it and, on failure, flips one OR gate. In the default
    ``focused`` walk the flipped gate is drawn uniformly among the gates on
    the path to the failure and below it; ``uniform`` draws among all gates.
    """
    cfg = cfg or SolverConfig()
    stats = _new_stats() if stats is None else stats
    reach = eval_reach_prime(g) if reach is None else reach
    d = len(or_gates(g))
    stats["d_or_gates"] = d
    bound = Fraction(1, d) if d else Fraction(0)
    if not reach.get(g.goal, False):
        return ReachReport(Verdict.NOT_FOUND, None, Fraction(0), stats, "static")
    gates = effective_or_gates(g, reach)
    trials = cfg.trial_budget(max(d, 1))
    restarts = cfg.restart_budget(d)
    memo: dict = {}
    for restart in range(restarts):
        stats["restarts_used"] += 1
        rng = random.Random(f"{cfg.seed}/{restart}")
        pick = [rng.randrange(len(opts)) for _, opts in gates]
        for _ in range(trials):
            stats["trials"] += 1
            choices = {ls: opts[k] for (ls, opts), k in zip(gates, pick)}
            probe = _Engine(net, g, choices=choices, reach=reach, cfg=cfg)
            key = _active_key(probe, gates)
            if key in memo:
                witness, failure = memo[key]
            else:
                witness, failure, _ = _attempt(net, g, reach, choices, cfg, stats)
                memo[key] = (witness, failure)
            if witness is not None:
                return ReachReport(Verdict.REACHABLE, witness, Fraction(0), stats, "heuristic")
            if not gates:
                break
            if cfg.walk == "focused":
                candidates = _implicated(probe, failure, gates)
            else:
                candidates = list(range(len(gates)))
            i = rng.choice(candidates)
            n_opts = len(gates[i][1])
            pick[i] = (pick[i] + rng.randrange(1, n_opts)) % n_opts
        if not gates:
            break
    return ReachReport(Verdict.NOT_FOUND, None, bound, stats, "heuristic", quasi=True)


def perm_reach(net: Aban, init: GlobalState | None, goal: LocalState,
               cfg: SolverConfig | None = None) -> ReachReport:
    """Full pipeline: graph, cycle removal, static verdicts, then the OR search."""
    cfg = cfg or SolverConfig()
    started = time.perf_counter()
    init = net.initial if init is None else init
    stats = _new_stats()
    g = preprocess_cycles(build_slcg(net, init, goal))
    reach = eval_reach_prime(g)
    d = len(or_gates(g))
    stats["d_or_gates"] = d

    def done(report: ReachReport) -> ReachReport:
        stats["wall_time"] = time.perf_counter() - started
        report.stats = stats
        return report

    if not reach[goal]:
        return done(ReachReport(Verdict.NOT_FOUND, None, Fraction(0), stats, "static"))
    if not detect_conflicts(g):
        rng = None if cfg.deterministic else random.Random(cfg.seed)
        traj = extract_trajectory(g, net, init, goal, reach=reach, rng=rng)
        if validate_trajectory(net, init, traj, goal):
            return done(ReachReport(Verdict.REACHABLE, tuple(traj), Fraction(0), stats, "direct"))
        stats["extraction_rejected"] += 1
    if d <= cfg.or_exhaustive_threshold:
        report = or_exhaustive(net, g, goal, cfg, stats=stats, reach=reach)
    else:
        report = or_heuristic(net, g, goal, cfg, stats=stats, reach=reach)
    return done(report)
