"""Acceptance criteria, one marked group per criterion.

The terminal summary prints one PASS/FAIL line per criterion number.
"""
import json
import math
import random
import time

import pytest

from permreach import fixtures
from permreach.boolnet import bn_to_aban, parse_bn
from permreach.cli import main
from permreach.model import GlobalState, LocalState, format_aban, validate_trajectory
from permreach.oracle import (
    GeneratorSpec, Query, brute_force_reach, random_aban, random_walk_calibration, survey,
)
from permreach.slcg import build_slcg, eval_reach_prime, find_sccs, preprocess_cycles
from permreach.solver import SolverConfig, perm_reach, sequential_reach, solve_and_gate

from test_boolnet import _one_step_equivalent, _random_expr

L = LocalState
DET = SolverConfig(deterministic=True)
acceptance = pytest.mark.acceptance


def _corpus(instances=1000, per_instance=5, seed=2024):
    """Seeded networks with 3 to 7 automata, in-degree at most 3, five queries each."""
    rng = random.Random(seed)
    out = []
    for i in range(instances):
        n = rng.randint(3, 7)
        spec = GeneratorSpec(n, 3, 2, rng.choice([0.5, 0.8, 1.0]), rng.getrandbits(63))
        net = random_aban(spec)
        for code in rng.sample(range(1 << n), min(per_instance, 1 << n)):
            goal = L(rng.choice(net.automata), rng.randint(0, 1))
            out.append(Query(net, GlobalState.from_int(net.automata, code), goal, f"i{i}/s{code}/{goal}"))
    return out


@pytest.fixture(scope="module")
def corpus():
    return _corpus()


@pytest.fixture(scope="module")
def corpus_report(corpus):
    return survey(corpus, DET)


# 1 --------------------------------------------------------------------------

@acceptance(1)
def test_chain_fixture_reachable_in_four_steps(chain):
    goal = L("a", 1)
    started = time.perf_counter()
    report = perm_reach(chain, None, goal, DET)
    elapsed = time.perf_counter() - started
    assert report.reachable and len(report.witness) == 4
    assert validate_trajectory(chain, chain.initial, report.witness, goal)
    found, shortest = brute_force_reach(chain, None, goal)
    assert found and len(shortest) == 4
    assert elapsed < 1.0


# 2 --------------------------------------------------------------------------

@acceptance(2)
def test_mutex_fixture_not_found(mutex):
    goal = L("c", 1)
    report = perm_reach(mutex, None, goal, DET)
    assert not report.reachable and report.false_negative_bound == 0
    assert report.stats["permutations_tested"] == 2
    assert brute_force_reach(mutex, None, goal) == (False, None)
    g = preprocess_cycles(build_slcg(mutex, None, goal))
    a1, b1 = L("a", 1), L("b", 1)
    assert sequential_reach(mutex, mutex.initial, [a1, b1], g) is None
    assert sequential_reach(mutex, mutex.initial, [b1, a1], g) is None


# 3 --------------------------------------------------------------------------

@acceptance(3)
def test_reset_fixture_cycle_removed(mutex_reset):
    g = build_slcg(mutex_reset, None, L("c", 1))
    assert find_sccs(g).nontrivial(g), "no cycle in the graph built from the all-zero state"
    out = preprocess_cycles(g)
    assert find_sccs(out).nontrivial(out) == []
    assert not eval_reach_prime(out)[L("c", 1)]


@acceptance(3)
def test_reset_fixture_not_found(mutex_reset):
    goal = L("c", 1)
    report = perm_reach(mutex_reset, None, goal, DET)
    assert not report.reachable and report.false_negative_bound == 0
    assert brute_force_reach(mutex_reset, None, goal) == (False, None)


# 4 --------------------------------------------------------------------------

@acceptance(4)
def test_order_sensitivity(ordered):
    g = preprocess_cycles(build_slcg(ordered, None, L("c", 1)))
    a1, b1 = L("a", 1), L("b", 1)
    first_a = sequential_reach(ordered, ordered.initial, [a1, b1], g)
    assert first_a is not None
    assert sequential_reach(ordered, ordered.initial, [b1, a1], g) is None
    assert solve_and_gate(ordered, ordered.initial, [b1, a1], g) == first_a


# 5, 6, 7 ----------------------------------------------------------------------

@acceptance(5)
def test_zero_false_positives(corpus, corpus_report):
    instances = len({id(q.net) for q in corpus})
    assert instances >= 1000 and corpus_report.total >= 5000
    assert corpus_report.oracle_checked == corpus_report.total
    assert corpus_report.false_positive == 0
    assert corpus_report.invalid_witness == 0


@acceptance(6)
def test_conflict_free_subset_exact(corpus_report):
    assert corpus_report.conflict_free_queries > 0
    assert corpus_report.conflict_free_mismatches == 0


@acceptance(7)
def test_static_negative_sound(corpus, corpus_report):
    assert corpus_report.necessary_violations == 0
    negatives = 0
    for q in corpus:
        g = preprocess_cycles(build_slcg(q.net, q.init, q.goal))
        if not eval_reach_prime(g)[q.goal]:
            negatives += 1
            assert not brute_force_reach(q.net, q.init, q.goal)[0], q.label
    assert negatives > 0


# 8 --------------------------------------------------------------------------

@acceptance(8)
def test_walk_calibration():
    started = time.perf_counter()
    mean = random_walk_calibration(10, 10_000, seed=0)
    assert abs(mean - 100) <= 5
    assert time.perf_counter() - started < 10


# 9 --------------------------------------------------------------------------

@acceptance(9)
def test_heuristic_miss_rate():
    d, runs = 25, 200
    net, goal = fixtures.planted_or_chain(d)
    cfg = SolverConfig()
    assert cfg.trial_budget(d) == 2 * d * d and cfg.restart_budget(d) == math.ceil(math.log2(d))
    misses = 0
    for seed in range(runs):
        report = perm_reach(net, None, goal, SolverConfig(seed=seed))
        assert report.stats["d_or_gates"] == d and report.path == "heuristic"
        if report.reachable:
            assert validate_trajectory(net, net.initial, report.witness, goal)
        else:
            misses += 1
    p = 1 / d
    assert misses / runs <= p + 3 * math.sqrt(p * (1 - p) / runs)


# 10 -------------------------------------------------------------------------

@acceptance(10)
def test_cnf_example_transitions():
    net = bn_to_aban(parse_bn(fixtures.CNF_EXAMPLE_BN))
    assert sorted(net.format_transition(t) for t in net.transitions) == sorted([
        "b=1 & d=1 -> a=1", "b=1 & e=1 -> a=1", "c=1 & d=1 -> a=1", "c=1 & e=1 -> a=1",
        "b=0 & c=0 -> a=0", "d=0 & e=0 -> a=0",
    ])


@acceptance(10)
def test_translation_one_step_equivalence():
    for seed in range(100):
        rng = random.Random(seed)
        names = [f"v{i}" for i in range(rng.randint(1, 5))]
        bn = parse_bn("variables: " + " ".join(names) + "\n")
        bn = type(bn)(bn.variables, {v: _random_expr(rng, names, 3) for v in names})
        assert _one_step_equivalent(bn, bn_to_aban(bn)), seed


# 11 -------------------------------------------------------------------------

@acceptance(11)
def test_pruning_lossless(corpus):
    fewer = 0
    gates = 0
    for q in corpus:
        g = preprocess_cycles(build_slcg(q.net, q.init, q.goal))
        for sol in g.solutions:
            if len(sol.required) < 2:
                continue
            gates += 1
            on = {"permutations_tested": 0, "prefixes_pruned": 0, "and_gates_solved": 0}
            off = dict(on)
            a = solve_and_gate(q.net, q.init, sol.required, g, cfg=SolverConfig(prune=True), stats=on)
            b = solve_and_gate(q.net, q.init, sol.required, g, cfg=SolverConfig(prune=False), stats=off)
            assert (a is None) == (b is None), q.label
            assert on["permutations_tested"] <= off["permutations_tested"]
            fewer += on["permutations_tested"] < off["permutations_tested"]
        on = perm_reach(q.net, q.init, q.goal, SolverConfig(deterministic=True, prune=True))
        off = perm_reach(q.net, q.init, q.goal, SolverConfig(deterministic=True, prune=False))
        assert on.verdict == off.verdict, q.label
        fewer += on.stats["permutations_tested"] < off.stats["permutations_tested"]
    assert gates > 0 and fewer >= 1


# 12 -------------------------------------------------------------------------

def _capture(capsys, argv):
    main(argv)
    return capsys.readouterr().out.encode()


@acceptance(12)
def test_machine_reports_repeat(tmp_path, capsys):
    for name, text, goal, _ in fixtures.REFERENCE:
        path = tmp_path / f"{name}.aban"
        path.write_text(text)
        argv = ["query", str(path), "--goal", goal, "--format", "machine", "--deterministic",
                "--seed", "17"]
        first = _capture(capsys, argv)
        assert first == _capture(capsys, argv)
        assert json.loads(first)["seed"] == 17
    net, goal = fixtures.planted_or_chain(22)
    path = tmp_path / "planted.aban"
    path.write_text(format_aban(net))
    argv = ["query", str(path), "--goal", str(goal), "--format", "machine", "--deterministic",
            "--seed", "5"]
    assert _capture(capsys, argv) == _capture(capsys, argv)
    for argv in (["survey", "--fixtures", "--deterministic", "--format", "machine"],
                 ["survey", "--automata", "6", "--queries", "300", "--per-instance", "5",
                  "--seed", "8", "--deterministic", "--format", "machine"]):
        assert _capture(capsys, argv) == _capture(capsys, argv)
