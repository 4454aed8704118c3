"""Ground truth at small scale: exhaustive search, random instances, calibration, surveys."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .model import Aban, AbanError, GlobalState, LocalState, Transition, validate_trajectory
from .slcg import build_slcg, detect_conflicts, eval_reach_prime, preprocess_cycles
from .solver import SolverConfig, perm_reach

__all__ = [
    "StateBudgetExceeded", "brute_force_reach", "GeneratorSpec", "random_aban",
    "random_walk_calibration", "Query", "SurveyReport", "survey", "false_negative_survey",
    "random_queries", "DEFAULT_STATE_BUDGET",
]

DEFAULT_STATE_BUDGET = 1 << 20


class StateBudgetExceeded(AbanError):
    pass


def _encode(net: Aban):
    cmask, cval, tbit, tval = [], [], [], []
    for tr in net.transitions:
        m = v = 0
        for ls in tr.condition:
            bit = 1 << net.index[ls.automaton]
            m |= bit
            if ls.value:
                v |= bit
        cmask.append(m)
        cval.append(v)
        tbit.append(net.index[tr.target])
        tval.append(tr.value)
    return cmask, cval, tbit, tval


def brute_force_reach(net: Aban, init: GlobalState | None, goal: LocalState,
                      budget: int = DEFAULT_STATE_BUDGET) -> tuple:
    """Breadth-first search of the asynchronous state graph.

    Returns ``(True, shortest_witness)`` or ``(False, None)``.
    """
    init = net.initial if init is None else init
    n = len(net.automata)
    if (1 << n) > budget:
        raise StateBudgetExceeded(f"2^{n} states exceed the budget of {budget}")
    bit = net.index[goal.automaton]
    found, parent, via = _kernels.bfs_reach(
        n, init.to_int(), *_encode(net), 1 << bit, goal.value << bit)
    if found < 0:
        return False, None
    path = []
    s = found
    start = init.to_int()
    while s != start:
        path.append(net.transitions[int(via[s])])
        s = int(parent[s])
    path.reverse()
    return True, path


@dataclass(frozen=True)
class GeneratorSpec:
    automaton_count: int
    max_in_degree: int = 3
    max_solutions_per_state: int = 2
    transition_density: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.automaton_count < 1:
            raise ValueError("automaton_count must be positive")
        if self.max_in_degree < 1:
            raise ValueError("max_in_degree must be positive")
        if not 1 <= self.max_solutions_per_state <= 2:
            raise ValueError("max_solutions_per_state must be 1 or 2")
        if not 0 < self.transition_density <= 1:
            raise ValueError("transition_density must lie in (0, 1]")


def random_aban(spec: GeneratorSpec) -> Aban:
    """Seeded network within the degree bounds.

    Every automaton draws a regulator set of at most ``max_in_degree`` other
    automata; each of its (at most ``max_solutions_per_state``) rising and
    falling transitions exists with probability ``transition_density`` and
    conditions on a non-empty subset of the regulators.
    """
    rng = random.Random(spec.seed)
    names = [f"x{i}" for i in range(spec.automaton_count)]
    transitions: list = []
    for a in names:
        others = [b for b in names if b != a]
        k = rng.randint(0, min(spec.max_in_degree, len(others)))
        regulators = sorted(rng.sample(others, k), key=names.index)
        for value in (1, 0):
            made: set = set()
            for _ in range(spec.max_solutions_per_state):
                if rng.random() >= spec.transition_density:
                    continue
                if regulators:
                    size = rng.randint(1, len(regulators))
                    picked = rng.sample(regulators, size)
                    cond = frozenset(LocalState(b, rng.randint(0, 1)) for b in picked)
                else:
                    cond = frozenset()
                tr = Transition(cond, a, value)
                if tr not in made:
                    made.add(tr)
                    transitions.append(tr)
    return Aban.build(names, transitions)


def random_walk_calibration(n: int, runs: int, seed: int = 0) -> float:
    """Mean number of steps for a +-1 walk from 0, reflected at 0, to first hit ``n``."""
    if n < 1 or runs < 1:
        raise ValueError("n and runs must be positive")
    return float(np.mean(_kernels.walk_steps(n, runs, seed)))


@dataclass(frozen=True)
class Query:
    net: Aban
    init: GlobalState
    goal: LocalState
    label: str = ""


@dataclass
class SurveyReport:
    total: int = 0
    reachable: int = 0
    conclusive_negative: int = 0
    inconclusive: int = 0
    agree_true: int = 0
    agree_false: int = 0
    false_negative: int = 0
    false_positive: int = 0
    invalid_witness: int = 0
    necessary_violations: int = 0
    conflict_free_queries: int = 0
    conflict_free_mismatches: int = 0
    oracle_checked: int = 0
    wall_time: float = 0.0
    mismatches: list = field(default_factory=list)

    def rows(self) -> list:
        """(label, count, percentage) rows: verdict split, then agreement with the oracle."""
        def pct(x):
            return round(100.0 * x / self.total, 1) if self.total else 0.0
        return [
            ("True", self.reachable, pct(self.reachable)),
            ("Inconclusive", self.inconclusive, pct(self.inconclusive)),
            ("False", self.conclusive_negative, pct(self.conclusive_negative)),
            ("Agree-true", self.agree_true, pct(self.agree_true)),
            ("Agree-false", self.agree_false, pct(self.agree_false)),
            ("False-negative", self.false_negative, pct(self.false_negative)),
            ("False-positive", self.false_positive, pct(self.false_positive)),
        ]

    def as_dict(self, deterministic: bool = True) -> dict:
        out = {k: getattr(self, k) for k in (
            "total", "reachable", "conclusive_negative", "inconclusive", "agree_true",
            "agree_false", "false_negative", "false_positive", "invalid_witness",
            "necessary_violations", "conflict_free_queries", "conflict_free_mismatches",
            "oracle_checked")}
        out["rows"] = [{"label": a, "count": b, "percent": c} for a, b, c in self.rows()]
        out["mismatches"] = list(self.mismatches)
        if not deterministic:
            out["wall_time"] = self.wall_time
        return out


def random_queries(spec: GeneratorSpec, queries: int, per_instance: int = 1) -> list:
    """``queries`` (instance, initial state, goal) triples from derived seeds."""
    out: list = []
    rng = random.Random(f"queries/{spec.seed}")
    instance = 0
    while len(out) < queries:
        net = random_aban(replace(spec, seed=rng.getrandbits(63)))
        n = len(net.automata)
        codes = rng.sample(range(1 << n), min(per_instance, 1 << n))
        for code in codes:
            if len(out) >= queries:
                break
            goal = LocalState(rng.choice(net.automata), rng.randint(0, 1))
            out.append(Query(net, GlobalState.from_int(net.automata, code), goal,
                             f"i{instance}/s{code}/{goal}"))
        instance += 1
    return out


def survey(queries, cfg: SolverConfig | None = None, *, use_oracle: bool = True,
           budget: int = DEFAULT_STATE_BUDGET) -> SurveyReport:
    """Run the solver on every query and compare with the oracle where it fits the budget."""
    cfg = cfg or SolverConfig()
    report = SurveyReport()
    started = time.perf_counter()
    for q in queries:
        report.total += 1
        result = perm_reach(q.net, q.init, q.goal, cfg)
        if result.reachable:
            report.reachable += 1
            if not validate_trajectory(q.net, q.init, result.witness, q.goal):
                report.invalid_witness += 1
        elif result.conclusive:
            report.conclusive_negative += 1
        else:
            report.inconclusive += 1
        if not use_oracle or (1 << len(q.net.automata)) > budget:
            continue
        report.oracle_checked += 1
        truth, _ = brute_force_reach(q.net, q.init, q.goal, budget)
        if result.reachable and truth:
            report.agree_true += 1
        elif not result.reachable and not truth:
            report.agree_false += 1
        elif truth:
            report.false_negative += 1
            report.mismatches.append(f"false-negative {q.label}")
        else:
            report.false_positive += 1
            report.mismatches.append(f"false-positive {q.label}")
        g = preprocess_cycles(build_slcg(q.net, q.init, q.goal))
        reach = eval_reach_prime(g)
        if truth and not reach[q.goal]:
            report.necessary_violations += 1
        if not detect_conflicts(g):
            report.conflict_free_queries += 1
            if result.reachable != truth:
                report.conflict_free_mismatches += 1
                report.mismatches.append(f"conflict-free {q.label}")
    report.wall_time = time.perf_counter() - started
    return report


def false_negative_survey(spec: GeneratorSpec, queries: int, cfg: SolverConfig | None = None,
                          *, per_instance: int = 1) -> SurveyReport:
    """Survey of generated instances against the exhaustive oracle."""
    report = survey(random_queries(spec, queries, per_instance), cfg)
    if report.false_positive or report.invalid_witness:
        raise AssertionError(f"unsound verdicts: {report.mismatches}")
    return report
