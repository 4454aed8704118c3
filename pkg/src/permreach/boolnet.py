"""Boolean networks and their translation into equivalent automata networks."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .model import Aban, AbanError, LocalState, ParseError, Transition

__all__ = [
    "Var", "Not", "And", "Or", "Const", "BoolNetwork", "DnfLimitError",
    "parse_bn", "parse_expr", "evaluate", "dnf", "bn_to_aban", "DEFAULT_MAX_CONJUNCTS",
]

DEFAULT_MAX_CONJUNCTS = 64


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


class DnfLimitError(AbanError):
    def __init__(self, variable: str | None, limit: int):
        self.variable = variable
        self.limit = limit
        where = f" for {variable!r}" if variable else ""
        super().__init__(f"DNF{where} exceeds {limit} conjuncts")


@dataclass(frozen=True)
class BoolNetwork:
    variables: tuple
    functions: Mapping[str, object]

    def variables_of(self, expr) -> set:
        return _free_vars(expr)


_TOKEN = re.compile(r"\s*(?:([A-Za-z][A-Za-z0-9_]*)|([01])|(.))")


def _tokenize(text: str, lineno: int | None) -> list:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        ident, const, sym = m.groups()
        if ident is not None:
            out.append(("const", ident == "true") if ident in ("true", "false") else ("id", ident))
        elif const is not None:
            out.append(("const", const == "1"))
        elif sym is not None:
            if sym not in "!&|()":
                raise ParseError(f"unexpected character {sym!r}", lineno)
            out.append((sym, None))
        pos = m.end()
    return out


class _Parser:
    # expr := term ('|' term)* ; term := factor ('&' factor)* ; factor := '!' factor | atom
    def __init__(self, tokens: list, lineno: int | None):
        self.tokens = tokens
        self.pos = 0
        self.lineno = lineno

    def peek(self):
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def take(self, kind):
        if self.peek() != kind:
            found = self.peek() or "end of line"
            raise ParseError(f"expected {kind!r}, found {found!r}", self.lineno)
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expr(self):
        node = self.term()
        while self.peek() == "|":
            self.pos += 1
            node = Or(node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek() == "&":
            self.pos += 1
            node = And(node, self.factor())
        return node

    def factor(self):
        kind = self.peek()
        if kind == "!":
            self.pos += 1
            return Not(self.factor())
        if kind == "(":
            self.pos += 1
            node = self.expr()
            self.take(")")
            return node
        if kind == "id":
            return Var(self.take("id")[1])
        if kind == "const":
            return Const(self.take("const")[1])
        raise ParseError(f"unexpected {kind or 'end of line'!r}", self.lineno)


def parse_expr(text: str, lineno: int | None = None):
    parser = _Parser(_tokenize(text, lineno), lineno)
    node = parser.expr()
    if parser.pos != len(parser.tokens):
        raise ParseError(f"trailing input {parser.tokens[parser.pos][0]!r}", lineno)
    return node


def _free_vars(expr) -> set:
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, Const):
        return set()
    if isinstance(expr, Not):
        return _free_vars(expr.arg)
    return _free_vars(expr.left) | _free_vars(expr.right)


def _vars_in_order(expr, out: list) -> None:
    if isinstance(expr, Var):
        if expr.name not in out:
            out.append(expr.name)
    elif isinstance(expr, Not):
        _vars_in_order(expr.arg, out)
    elif isinstance(expr, (And, Or)):
        _vars_in_order(expr.left, out)
        _vars_in_order(expr.right, out)


def parse_bn(text: str) -> BoolNetwork:
    """Parse ``<id> = <expr>`` lines.

    An optional ``variables: a b c`` line fixes the variable set; formulas
    may then reference declared variables only. Without it, variables are
    the defined ones followed by referenced inputs, in order of appearance.
    """
    declared: list | None = None
    functions: dict = {}
    order: list = []
    refs: list = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("variables:"):
            names = line.split(":", 1)[1].split()
            declared = list(declared or [])
            for name in names:
                if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", name) or name in ("true", "false"):
                    raise ParseError(f"invalid variable name {name!r}", lineno)
                if name in declared:
                    raise ParseError(f"duplicate variable {name!r}", lineno)
                declared.append(name)
            continue
        lhs, eq, rhs = line.partition("=")
        lhs = lhs.strip()
        if not eq or not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", lhs):
            raise ParseError(f"expected '<id> = <expr>', got {line!r}", lineno)
        if lhs in functions:
            raise ParseError(f"duplicate function for {lhs!r}", lineno)
        expr = parse_expr(rhs, lineno)
        functions[lhs] = expr
        if lhs not in order:
            order.append(lhs)
        used: list = []
        _vars_in_order(expr, used)
        refs.extend((name, lineno) for name in used)

    if declared is not None:
        known = set(declared)
        for name in order:
            if name not in known:
                raise ParseError(f"undeclared variable {name!r}")
        for name, lineno in refs:
            if name not in known:
                raise ParseError(f"undeclared variable {name!r}", lineno)
        variables = tuple(declared)
    else:
        variables = list(order)
        for name, _ in refs:
            if name not in variables:
                variables.append(name)
        variables = tuple(variables)
    return BoolNetwork(variables, functions)


def evaluate(expr, values: Mapping[str, int]) -> bool:
    if isinstance(expr, Var):
        return bool(values[expr.name])
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Not):
        return not evaluate(expr.arg, values)
    if isinstance(expr, And):
        return evaluate(expr.left, values) and evaluate(expr.right, values)
    return evaluate(expr.left, values) or evaluate(expr.right, values)


def _nnf(expr, negate: bool = False):
    if isinstance(expr, Var):
        return Not(expr) if negate else expr
    if isinstance(expr, Const):
        return Const(expr.value != negate)
    if isinstance(expr, Not):
        return _nnf(expr.arg, not negate)
    left, right = _nnf(expr.left, negate), _nnf(expr.right, negate)
    if isinstance(expr, And):
        return Or(left, right) if negate else And(left, right)
    return And(left, right) if negate else Or(left, right)


def _absorb(terms: list) -> list:
    # drop duplicates and any conjunct implied by a smaller one
    uniq = []
    for t in sorted(set(terms), key=lambda t: (len(t), sorted(t))):
        if not any(u <= t for u in uniq):
            uniq.append(t)
    return uniq


def _dnf_terms(expr, limit: int, variable: str | None) -> list:
    if isinstance(expr, Const):
        return [frozenset()] if expr.value else []
    if isinstance(expr, Var):
        return [frozenset({(expr.name, 1)})]
    if isinstance(expr, Not):
        return [frozenset({(expr.arg.name, 0)})]
    left = _dnf_terms(expr.left, limit, variable)
    right = _dnf_terms(expr.right, limit, variable)
    if isinstance(expr, Or):
        terms = _absorb(left + right)
    else:
        terms = []
        for a in left:
            for b in right:
                merged = a | b
                if len({name for name, _ in merged}) == len(merged):
                    terms.append(merged)
        terms = _absorb(terms)
    if len(terms) > limit:
        raise DnfLimitError(variable, limit)
    return terms


def dnf(expr, *, negate: bool = False, limit: int = DEFAULT_MAX_CONJUNCTS,
        variable: str | None = None) -> list:
    """Disjunctive normal form as a list of ``{variable: bit}`` conjuncts."""
    terms = _dnf_terms(_nnf(expr, negate), limit, variable)
    return [dict(sorted(t)) for t in terms]


def bn_to_aban(bn: BoolNetwork, *, max_conjuncts: int = DEFAULT_MAX_CONJUNCTS,
               initial: Mapping[str, int] | None = None) -> Aban:
    """One automaton per variable; rising transitions from the DNF of ``f``
    and falling ones from the DNF of ``not f``.

    Literals on the updated variable itself are simplified: a literal equal
    to the source value is dropped, an opposite one kills the conjunct.
    """
    transitions: list = []
    seen: set = set()
    for v in bn.variables:
        expr = bn.functions.get(v)
        if expr is None:
            continue
        for target_value, negate in ((1, False), (0, True)):
            source = 1 - target_value
            kept = []
            for term in dnf(expr, negate=negate, limit=max_conjuncts, variable=v):
                if v in term:
                    if term[v] != source:
                        continue
                    term = {k: b for k, b in term.items() if k != v}
                kept.append(frozenset(term.items()))
            # dropping the self literal can make one conjunct subsume another
            kept = sorted(_absorb(kept), key=lambda t: (len(t), sorted(t)))
            for term in kept:
                cond = frozenset(LocalState(k, b) for k, b in term)
                tr = Transition(cond, v, target_value)
                if tr not in seen:
                    seen.add(tr)
                    transitions.append(tr)
    return Aban.build(bn.variables, transitions, initial)
