"""Asynchronous binary automata networks: syntax, semantics and the text format."""
from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

__all__ = [
    "AbanError", "ParseError", "NotFirableError", "TrajectoryError",
    "LocalState", "Transition", "GlobalState", "Aban",
    "parse_aban", "format_aban", "parse_local_state", "parse_transition_line",
    "firable", "fire", "apply_trajectory", "validate_trajectory",
]

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class AbanError(ValueError):
    pass


class ParseError(AbanError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class NotFirableError(AbanError):
    pass


class TrajectoryError(AbanError):
    def __init__(self, index: int, transition: "Transition"):
        self.index = index
        self.transition = transition
        super().__init__(f"step {index} ({transition}) is not firable")


@dataclass(frozen=True, order=True)
class LocalState:
    automaton: str
    value: int

    def __post_init__(self):
        if self.value not in (0, 1):
            raise AbanError(f"local state value must be 0 or 1, got {self.value!r}")

    def negated(self) -> "LocalState":
        return LocalState(self.automaton, 1 - self.value)

    def __str__(self) -> str:
        return f"{self.automaton}={self.value}"


@dataclass(frozen=True)
class Transition:
    """Guarded flip ``condition -> target: (1-value) ~> value``."""

    condition: frozenset
    target: str
    value: int

    def __post_init__(self):
        if not isinstance(self.condition, frozenset):
            object.__setattr__(self, "condition", frozenset(self.condition))
        if self.value not in (0, 1):
            raise AbanError(f"target value must be 0 or 1, got {self.value!r}")
        seen = set()
        for ls in self.condition:
            if ls.automaton in seen:
                raise AbanError(f"condition mentions automaton {ls.automaton!r} twice")
            seen.add(ls.automaton)

    @property
    def produces(self) -> LocalState:
        return LocalState(self.target, self.value)

    @property
    def source(self) -> LocalState:
        return LocalState(self.target, 1 - self.value)

    def __str__(self) -> str:
        cond = " & ".join(str(ls) for ls in sorted(self.condition)) or "true"
        return f"{cond} -> {self.target}={self.value}"


@dataclass(frozen=True)
class GlobalState:
    """Total bit assignment over an ordered tuple of automata."""

    names: tuple
    bits: tuple
    _index: dict = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if len(self.names) != len(self.bits):
            raise AbanError("state must assign exactly one bit to every automaton")
        if any(b not in (0, 1) for b in self.bits):
            raise AbanError("state bits must be 0 or 1")
        if self._index is None:
            object.__setattr__(self, "_index", {n: i for i, n in enumerate(self.names)})

    @classmethod
    def from_mapping(cls, names: Sequence[str], values: Mapping[str, int]) -> "GlobalState":
        missing = [n for n in names if n not in values]
        if missing:
            raise AbanError(f"state does not assign {', '.join(missing)}")
        return cls(tuple(names), tuple(int(values[n]) for n in names))

    @classmethod
    def from_int(cls, names: Sequence[str], code: int) -> "GlobalState":
        return cls(tuple(names), tuple((code >> i) & 1 for i in range(len(names))))

    def to_int(self) -> int:
        return sum(b << i for i, b in enumerate(self.bits))

    def __getitem__(self, automaton: str) -> int:
        try:
            return self.bits[self._index[automaton]]
        except KeyError:
            raise AbanError(f"unknown automaton {automaton!r}") from None

    def holds(self, ls: LocalState) -> bool:
        return self[ls.automaton] == ls.value

    def holds_all(self, states: Iterable[LocalState]) -> bool:
        return all(self[ls.automaton] == ls.value for ls in states)

    def set(self, automaton: str, value: int) -> "GlobalState":
        i = self._index[automaton]
        bits = self.bits[:i] + (value,) + self.bits[i + 1:]
        return GlobalState(self.names, bits, self._index)

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.bits))

    def __str__(self) -> str:
        return "<" + ",".join(f"{n}{b}" for n, b in zip(self.names, self.bits)) + ">"


@dataclass(frozen=True)
class Aban:
    automata: tuple
    transitions: tuple
    initial: GlobalState

    def __post_init__(self):
        object.__setattr__(self, "automata", tuple(self.automata))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        if len(set(self.automata)) != len(self.automata):
            raise AbanError("duplicate automaton")
        declared = set(self.automata)
        for tr in self.transitions:
            for name in [tr.target, *(ls.automaton for ls in tr.condition)]:
                if name not in declared:
                    raise AbanError(f"undeclared automaton {name!r} in {tr}")
            if any(ls.automaton == tr.target for ls in tr.condition):
                raise AbanError(f"condition references target automaton in {tr}")
        if tuple(self.initial.names) != self.automata:
            raise AbanError("initial state must cover exactly the declared automata")

    @classmethod
    def build(cls, automata: Sequence[str], transitions: Iterable[Transition],
              initial: Mapping[str, int] | GlobalState | None = None) -> "Aban":
        automata = tuple(automata)
        if isinstance(initial, GlobalState):
            init = initial
        else:
            values = {a: 0 for a in automata}
            values.update(initial or {})
            init = GlobalState.from_mapping(automata, values)
        return cls(automata, tuple(transitions), init)

    @cached_property
    def index(self) -> dict:
        return {a: i for i, a in enumerate(self.automata)}

    @cached_property
    def transition_set(self) -> frozenset:
        return frozenset(self.transitions)

    @cached_property
    def _producers(self) -> dict:
        out: dict = {}
        for tr in self.transitions:
            out.setdefault(tr.produces, []).append(tr)
        return out

    def producers(self, ls: LocalState) -> list:
        """Transitions whose firing yields ``ls``, in declaration order."""
        return self._producers.get(ls, [])

    def ordered(self, states: Iterable[LocalState]) -> list:
        return sorted(states, key=lambda ls: (self.index[ls.automaton], ls.value))

    def state(self, values: Mapping[str, int] | None = None) -> GlobalState:
        """Initial state with ``values`` overriding individual automata."""
        if not values:
            return self.initial
        for name in values:
            if name not in self.index:
                raise AbanError(f"unknown automaton {name!r}")
        merged = self.initial.as_dict()
        merged.update(values)
        return GlobalState.from_mapping(self.automata, merged)

    def with_initial(self, values: Mapping[str, int] | GlobalState) -> "Aban":
        init = values if isinstance(values, GlobalState) else self.state(values)
        return Aban(self.automata, self.transitions, init)

    def local_state(self, automaton: str, value: int) -> LocalState:
        if automaton not in self.index:
            raise AbanError(f"unknown automaton {automaton!r}")
        return LocalState(automaton, value)

    def format_transition(self, tr: Transition) -> str:
        cond = " & ".join(str(ls) for ls in self.ordered(tr.condition)) or "true"
        return f"{cond} -> {tr.target}={tr.value}"


# ---------------------------------------------------------------- text format

def _parse_assignment(token: str, lineno: int | None) -> tuple:
    name, sep, bit = token.partition("=")
    name, bit = name.strip(), bit.strip()
    if not sep or not _IDENT.match(name) or bit not in ("0", "1"):
        raise ParseError(f"expected <id>=<0|1>, got {token.strip()!r}", lineno)
    return name, int(bit)


def parse_local_state(text: str) -> LocalState:
    """Parse ``"a=1"`` into a :class:`LocalState`."""
    name, bit = _parse_assignment(text, None)
    return LocalState(name, bit)


def parse_transition_line(body: str, lineno: int | None = None) -> Transition:
    lhs, arrow, rhs = body.partition("->")
    if not arrow:
        raise ParseError("transition needs '->'", lineno)
    target, value = _parse_assignment(rhs, lineno)
    condition = []
    lits = [t.strip() for t in lhs.split("&")]
    for lit in lits:
        if lit == "true":
            if len(lits) > 1:
                raise ParseError("'true' cannot be combined with other literals", lineno)
            continue
        name, bit = _parse_assignment(lit, lineno)
        condition.append(LocalState(name, bit))
    names = [ls.automaton for ls in condition]
    if len(set(names)) != len(names):
        raise ParseError("condition mentions an automaton twice", lineno)
    if target in names:
        raise ParseError(f"condition references target automaton {target!r}", lineno)
    return Transition(frozenset(condition), target, value)


def parse_aban(text: str) -> Aban:
    """Parse the line-oriented model format.

    ``automata:`` lines declare automata, ``init:`` lines override the
    all-zero default and ``tr:`` lines declare transitions. Structurally
    identical transitions are kept once, with a warning.
    """
    automata: list = []
    declared: set = set()
    init: dict = {}
    transitions: list = []
    seen_tr: set = set()
    pending: list = []

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, colon, body = line.partition(":")
        key = key.strip()
        if not colon:
            raise ParseError(f"expected 'automata:', 'init:' or 'tr:', got {line!r}", lineno)
        if key == "automata":
            for name in body.split():
                if not _IDENT.match(name):
                    raise ParseError(f"invalid automaton name {name!r}", lineno)
                if name in declared:
                    raise ParseError(f"duplicate automaton {name!r}", lineno)
                declared.add(name)
                automata.append(name)
        elif key == "init":
            for token in body.split():
                name, bit = _parse_assignment(token, lineno)
                pending.append((name, lineno))
                init[name] = bit
        elif key == "tr":
            tr = parse_transition_line(body, lineno)
            for name in [tr.target, *(ls.automaton for ls in tr.condition)]:
                pending.append((name, lineno))
            if tr in seen_tr:
                warnings.warn(f"line {lineno}: duplicate transition {tr} ignored", stacklevel=2)
                continue
            seen_tr.add(tr)
            transitions.append(tr)
        else:
            raise ParseError(f"unknown directive {key!r}", lineno)

    for name, lineno in pending:
        if name not in declared:
            raise ParseError(f"undeclared automaton {name!r}", lineno)
    return Aban.build(automata, transitions, init)


def format_aban(net: Aban) -> str:
    lines = ["automata: " + " ".join(net.automata)]
    ones = [f"{a}=1" for a in net.automata if net.initial[a] == 1]
    if ones:
        lines.append("init: " + " ".join(ones))
    lines.extend("tr: " + net.format_transition(tr) for tr in net.transitions)
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ semantics

def firable(net: Aban, s: GlobalState, tr: Transition) -> bool:
    if tr not in net.transition_set:
        raise AbanError(f"unknown transition {tr}")
    return s[tr.target] == 1 - tr.value and s.holds_all(tr.condition)


def fire(net: Aban, s: GlobalState, tr: Transition) -> GlobalState:
    if not firable(net, s, tr):
        raise NotFirableError(f"{tr} is not firable in {s}")
    return s.set(tr.target, tr.value)


def apply_trajectory(net: Aban, s: GlobalState, trajectory: Sequence[Transition]) -> GlobalState:
    for i, tr in enumerate(trajectory):
        if not firable(net, s, tr):
            raise TrajectoryError(i, tr)
        s = s.set(tr.target, tr.value)
    return s


def validate_trajectory(net: Aban, s: GlobalState, trajectory: Sequence[Transition],
                        goal: LocalState) -> bool:
    """True iff the trajectory replays from ``s`` and ends in a state holding ``goal``."""
    try:
        end = apply_trajectory(net, s, trajectory)
        return end.holds(goal)
    except AbanError:
        return False
