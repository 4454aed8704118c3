import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from permreach import fixtures
from permreach.boolnet import (
    And, Const, DnfLimitError, Not, Or, Var, bn_to_aban, dnf, evaluate, parse_bn, parse_expr,
)
from permreach.model import GlobalState, ParseError, format_aban, parse_aban


def test_cnf_example_translation():
    net = bn_to_aban(parse_bn(fixtures.CNF_EXAMPLE_BN))
    lines = {net.format_transition(t) for t in net.transitions}
    assert lines == {
        "b=1 & d=1 -> a=1", "b=1 & e=1 -> a=1", "c=1 & d=1 -> a=1", "c=1 & e=1 -> a=1",
        "b=0 & c=0 -> a=0", "d=0 & e=0 -> a=0",
    }
    assert net.automata == ("a", "b", "c", "d", "e")


def test_precedence():
    assert parse_expr("a | b & !c") == Or(Var("a"), And(Var("b"), Not(Var("c"))))
    assert parse_expr("!(a | 0)") == Not(Or(Var("a"), Const(False)))
    with pytest.raises(ParseError):
        parse_expr("a &")
    with pytest.raises(ParseError):
        parse_expr("a b")
    with pytest.raises(ParseError):
        parse_expr("a + b")


def test_parse_bn_errors():
    with pytest.raises(ParseError):
        parse_bn("a = b\na = c\n")
    with pytest.raises(ParseError):
        parse_bn("variables: a\na = b\n")
    with pytest.raises(ParseError):
        parse_bn("a b\n")


def test_variables_line_keeps_order():
    bn = parse_bn("variables: c b a\na = b & c\n")
    assert bn.variables == ("c", "b", "a")


def test_constant_inputs_give_no_transitions():
    net = bn_to_aban(parse_bn("variables: a b\n"))
    assert net.transitions == ()
    net = bn_to_aban(parse_bn("a = 1\n"))
    assert [net.format_transition(t) for t in net.transitions] == ["true -> a=1"]


def test_self_literal_simplified():
    # a = a | b: rising needs b; falling would need a=0, which contradicts its source
    net = bn_to_aban(parse_bn("a = a | b\n"))
    assert [net.format_transition(t) for t in net.transitions] == ["b=1 -> a=1"]
    # a = !a & b: rising needs b (the literal !a is the source and drops)
    net = bn_to_aban(parse_bn("a = !a & b\n"))
    assert [net.format_transition(t) for t in net.transitions] == ["b=1 -> a=1", "true -> a=0"]


def test_dnf_limit_names_function():
    text = "a = (b | c) & (d | e) & (f | g)\n"
    with pytest.raises(DnfLimitError) as exc:
        bn_to_aban(parse_bn(text), max_conjuncts=4)
    assert exc.value.variable == "a"


def _random_expr(rng, names, depth):
    if depth == 0 or rng.random() < 0.3:
        return Var(rng.choice(names)) if rng.random() < 0.9 else Const(rng.random() < 0.5)
    kind = rng.randrange(3)
    if kind == 0:
        return Not(_random_expr(rng, names, depth - 1))
    op = And if kind == 1 else Or
    return op(_random_expr(rng, names, depth - 1), _random_expr(rng, names, depth - 1))


def _one_step_equivalent(bn, net):
    names = bn.variables
    for code in range(1 << len(names)):
        s = GlobalState.from_int(names, code)
        values = s.as_dict()
        expected = set()
        for v in names:
            f = bn.functions.get(v)
            if f is not None and int(evaluate(f, values)) != values[v]:
                expected.add(s.set(v, 1 - values[v]))
        got = {s.set(t.target, t.value) for t in net.transitions
               if s[t.target] != t.value and s.holds_all(t.condition)}
        if got != expected:
            return False
    return True


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_one_step_equivalence(seed, n):
    rng = random.Random(seed)
    names = [f"v{i}" for i in range(n)]
    bn = parse_bn("variables: " + " ".join(names) + "\n")
    funcs = {v: _random_expr(rng, names, 3) for v in names if rng.random() < 0.8}
    bn = type(bn)(bn.variables, funcs)
    assert _one_step_equivalent(bn, bn_to_aban(bn))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_dnf_preserves_truth_table(seed):
    rng = random.Random(seed)
    names = ["p", "q", "r", "s"]
    expr = _random_expr(rng, names, 4)
    for negate in (False, True):
        terms = dnf(expr, negate=negate, limit=10_000)
        for bits in itertools.product((0, 1), repeat=4):
            values = dict(zip(names, bits))
            want = evaluate(expr, values) != negate
            got = any(all(values[k] == b for k, b in t.items()) for t in terms)
            assert got == want


def test_converted_text_reparses():
    net = bn_to_aban(parse_bn("a = !b & c\nb = a | !c\nc = a\n"))
    assert parse_aban(format_aban(net)).transitions == net.transitions
