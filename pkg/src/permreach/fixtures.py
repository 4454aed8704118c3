"""Small reference networks with known verdicts, used by tests and fixture surveys."""
from __future__ import annotations

from .model import parse_aban, parse_local_state

# two routes to a=1; the one through b and c works, the one through e is dead
CHAIN = """\
automata: a b c d e
tr: b=1 & c=1 -> a=1
tr: e=1 -> a=1
tr: d=0 -> b=1
tr: b=1 -> d=1
tr: d=1 -> c=1
"""

# a=1 and b=1 exclude each other, so c=1 is out of reach
MUTEX = """\
automata: a b c
tr: b=0 -> a=1
tr: a=0 -> b=1
tr: a=1 & b=1 -> c=1
"""

# MUTEX plus unconditional resets of a and b
MUTEX_RESET = """\
automata: a b c
tr: b=0 -> a=1
tr: a=0 -> b=1
tr: true -> a=0
tr: true -> b=0
tr: a=1 & b=1 -> c=1
"""

# c=1 needs a=1 and b=1; only the order a then b works
ORDERED = """\
automata: a b c
tr: a=1 & b=1 -> c=1
tr: b=0 -> a=1
tr: c=0 -> b=1
"""

CNF_EXAMPLE_BN = "a = (b | c) & (d | e)\n"

# (name, model text, goal, reachable from the all-zero state)
REFERENCE = [
    ("chain", CHAIN, "a=1", True),
    ("mutex", MUTEX, "c=1", False),
    ("mutex_reset", MUTEX_RESET, "c=1", False),
    ("ordered", ORDERED, "c=1", True),
]


def load(name: str):
    return parse_aban(dict((n, t) for n, t, _, _ in REFERENCE)[name])


# Found by random search at five automata: the goal is reachable, but only by
# spending x1=0 before x3 drops, an order the permutation search never meets
# because x4=0 holds initially and is re-derived too late.
MISSED_ORDER = """\
automata: x0 x1 x2 x3 x4
init: x0=1 x1=1 x3=1
tr: x2=0 & x3=0 & x4=1 -> x0=1
tr: x2=1 & x3=0 & x4=0 -> x0=0
tr: x2=1 & x3=1 -> x1=0
tr: x4=1 -> x2=1
tr: x4=0 -> x2=0
tr: x4=0 -> x3=1
tr: x2=1 & x4=1 -> x3=0
tr: x2=0 -> x4=1
tr: x1=0 & x2=1 -> x4=0
tr: x2=0 -> x4=0
"""
MISSED_ORDER_GOAL = "x0=0"


def planted_or_chain(d: int, working=None) -> tuple:
    """Network with ``d`` OR gates of which exactly one choice each works.

    Gate ``x{k}=1`` can come from ``p{k}=1 & r{k}=1`` (mutually exclusive,
    never works) or from ``q{k}=1`` (always works); ``h{d}=1`` needs every
    ``x{k}=1``. ``working[k-1]`` is the solution index of the good branch
    (default 1: the dead branch is declared first). Returns ``(net, goal)``.
    """
    working = [1] * d if working is None else list(working)
    names: list = []
    lines: list = []
    for k in range(1, d + 1):
        names += [f"x{k}", f"p{k}", f"r{k}", f"q{k}", f"h{k}"]
        branches = [f"tr: p{k}=1 & r{k}=1 -> x{k}=1", f"tr: q{k}=1 -> x{k}=1"]
        if working[k - 1] == 0:
            branches.reverse()
        lines += branches + [
            f"tr: r{k}=0 -> p{k}=1",
            f"tr: p{k}=0 -> r{k}=1",
            f"tr: true -> q{k}=1",
            "tr: x1=1 -> h1=1" if k == 1 else f"tr: h{k - 1}=1 & x{k}=1 -> h{k}=1",
        ]
    text = "automata: " + " ".join(names) + "\n" + "\n".join(lines) + "\n"
    return parse_aban(text), parse_local_state(f"h{d}=1")
