"""Simplified local causality graphs.

State nodes are OR gates over their solutions, solution nodes are AND gates
over the local states their transition requires. Nodes are keyed by
:class:`~permreach.model.LocalState` (state nodes) and by the
:class:`SolutionNode` objects themselves (solution nodes).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .model import Aban, GlobalState, LocalState, Transition

__all__ = [
    "SolutionNode", "StateNode", "Slcg", "SccInfo", "ConflictReport",
    "build_slcg", "eval_reach_prime", "reach_stages", "strongly_connected_components",
    "find_sccs", "preprocess_cycles", "detect_conflicts", "extract_trajectory",
    "or_gates", "format_dot", "UnreachableGoal",
]


class UnreachableGoal(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SolutionNode:
    id: int
    owner: LocalState
    required: tuple
    transition: Transition | None = None

    @property
    def trivial(self) -> bool:
        return self.transition is None

    @property
    def label(self) -> str:
        return f"sol#{self.id}"

    def __repr__(self) -> str:
        req = ",".join(str(r) for r in self.required)
        return f"<{self.label} {self.owner} <- {{{req}}}>"


@dataclass(frozen=True)
class StateNode:
    state: LocalState
    solutions: tuple = ()


@dataclass(frozen=True)
class Slcg:
    net: Aban
    init: GlobalState
    goal: LocalState
    states: dict
    deleted: frozenset = field(default_factory=frozenset)

    @property
    def root(self) -> StateNode:
        return self.states[self.goal]

    @property
    def solutions(self) -> list:
        out, seen = [], set()
        for node in self.states.values():
            for sol in node.solutions:
                if sol not in seen:
                    seen.add(sol)
                    out.append(sol)
        return out

    def nodes(self) -> list:
        return list(self.states) + self.solutions

    def successors(self, node) -> tuple:
        if isinstance(node, SolutionNode):
            return tuple(r for r in node.required if r in self.states)
        return self.states[node].solutions

    def edges(self) -> Iterator[tuple]:
        for ls, node in self.states.items():
            for sol in node.solutions:
                yield ls, sol
                for r in sol.required:
                    if r in self.states:
                        yield sol, r


def build_slcg(net: Aban, init: GlobalState | None, goal: LocalState) -> Slcg:
    """Worklist closure from the goal.

    A local state holding in ``init`` gets the single trivial solution;
    any other one gets a solution per producing transition. A state without
    producers ends up as a dead leaf.
    """
    init = net.initial if init is None else init
    net.local_state(goal.automaton, goal.value)
    states: dict = {}
    counter = 0
    work = [goal]
    pending: dict = {}
    while work:
        ls = work.pop(0)
        if ls in pending:
            continue
        if init.holds(ls):
            sols = [SolutionNode(counter, ls, ())]
            counter += 1
        else:
            sols = []
            for tr in net.producers(ls):
                sols.append(SolutionNode(counter, ls, tuple(net.ordered(tr.condition)), tr))
                counter += 1
                for r in sols[-1].required:
                    if r not in pending:
                        work.append(r)
        pending[ls] = tuple(sols)
    for ls, sols in pending.items():
        states[ls] = StateNode(ls, sols)
    return Slcg(net, init, goal, states)


def reach_stages(g: Slcg) -> tuple:
    """Least fixed point of reach' with the iteration stage of every state.

    Returns ``(stage, satisfied)``: ``stage`` maps each state whose reach'
    is 1 to the first round it became 1, ``satisfied`` is the set of
    solution nodes whose reach' is 1.
    """
    users: dict = {}
    pending: dict = {}
    for sol in g.solutions:
        req = set(sol.required)
        pending[sol] = len(req)
        for r in req:
            users.setdefault(r, []).append(sol)
    satisfied = {sol for sol, n in pending.items() if n == 0}
    stage: dict = {}
    frontier = [sol.owner for sol in g.solutions if pending[sol] == 0]
    level = 0
    while frontier:
        fresh = []
        for ls in frontier:
            if ls not in stage:
                stage[ls] = level
                fresh.append(ls)
        frontier = []
        for ls in fresh:
            for sol in users.get(ls, ()):
                pending[sol] -= 1
                if pending[sol] == 0:
                    satisfied.add(sol)
                    frontier.append(sol.owner)
        level += 1
    return stage, satisfied


def eval_reach_prime(g: Slcg) -> dict:
    """reach' of every node as a bool: states OR their solutions, solutions AND their requirements."""
    stage, satisfied = reach_stages(g)
    out: dict = {ls: ls in stage for ls in g.states}
    for sol in g.solutions:
        out[sol] = sol in satisfied
    return out


def strongly_connected_components(nodes: Iterable, successors) -> list:
    """Tarjan's algorithm, iterative. Components come out in reverse topological order."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    out: list = []
    counter = 0
    for start in nodes:
        if start in index:
            continue
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        work = [(start, iter(successors(start)))]
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(successors(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(tuple(reversed(comp)))
    return out


@dataclass(frozen=True)
class SccInfo:
    components: list
    fork_nodes: list

    def nontrivial(self, g: Slcg) -> list:
        out = []
        for i, comp in enumerate(self.components):
            if len(comp) > 1 or comp[0] in g.successors(comp[0]):
                out.append(i)
        return out

    def component_of(self) -> dict:
        return {node: i for i, comp in enumerate(self.components) for node in comp}


def find_sccs(g: Slcg) -> SccInfo:
    comps = strongly_connected_components(g.nodes(), g.successors)
    forks = [[n for n in comp if isinstance(n, LocalState) and len(g.states[n].solutions) >= 2]
             for comp in comps]
    return SccInfo(comps, forks)


def _garbage_collect(g: Slcg, states: dict, deleted: set) -> Slcg:
    live: dict = {}
    work = [g.goal]
    while work:
        ls = work.pop()
        if ls in live or ls not in states:
            continue
        live[ls] = states[ls]
        for sol in states[ls].solutions:
            work.extend(sol.required)
    ordered = {ls: live[ls] for ls in states if ls in live}
    if g.goal not in ordered:
        ordered = {g.goal: StateNode(g.goal, ()), **ordered}
    return Slcg(g.net, g.init, g.goal, ordered, frozenset(deleted))


def preprocess_cycles(g: Slcg) -> Slcg:
    """Remove every cycle while keeping reach' of the surviving nodes.

    Members of a cycle without a grounded exit are deleted, and any solution
    requiring them goes with them. In a cycle that does have exits, a member
    keeps a solution only if the in-cycle states it requires were grounded
    in an earlier fixed-point round than the member itself; that leaves each
    member reachable exactly through the exit branches of the cycle.
    """
    deleted = set(g.deleted)
    while True:
        info = find_sccs(g)
        cyclic = info.nontrivial(g)
        if not cyclic:
            return g
        comp_of = info.component_of()
        cyclic_set = set(cyclic)
        stage, _ = reach_stages(g)
        doomed = {ls for i in cyclic for ls in info.components[i]
                  if isinstance(ls, LocalState) and ls not in stage}
        deleted |= doomed
        states: dict = {}
        for ls, node in g.states.items():
            if ls in doomed:
                continue
            c = comp_of[ls]
            keep = []
            for sol in node.solutions:
                if any(r in doomed or r in deleted for r in sol.required):
                    continue
                if c in cyclic_set:
                    inner = [r for r in sol.required if comp_of.get(r) == c]
                    if not all(stage[r] < stage[ls] for r in inner):
                        continue
                keep.append(sol)
            states[ls] = StateNode(ls, tuple(keep))
        g = _garbage_collect(g, states, deleted)


@dataclass(frozen=True)
class ConflictReport:
    pairs: list
    solutions: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.pairs)


def _closures(g: Slcg) -> dict:
    order = strongly_connected_components(g.states, lambda ls: [
        r for sol in g.states[ls].solutions for r in sol.required if r in g.states])
    closure: dict = {}
    for comp in order:
        if len(comp) > 1:
            raise ValueError("conflict detection needs an acyclic graph; run preprocess_cycles first")
        ls = comp[0]
        acc = {ls}
        for sol in g.states[ls].solutions:
            for r in sol.required:
                acc |= closure.get(r, {r})
        closure[ls] = frozenset(acc)
    return closure


def detect_conflicts(g: Slcg) -> ConflictReport:
    """Opposite local states of one automaton found under different branches of one solution."""
    closure = _closures(g)
    pairs: list = []
    seen: set = set()
    sols: list = []
    for sol in g.solutions:
        if len(sol.required) < 2:
            continue
        branches = [closure.get(r, frozenset({r})) for r in sol.required]
        found = False
        for i in range(len(branches)):
            for j in range(i + 1, len(branches)):
                for x in sorted(branches[i]):
                    y = x.negated()
                    if y in branches[j]:
                        found = True
                        key = frozenset((x, y))
                        if key not in seen:
                            seen.add(key)
                            pairs.append((x, y))
        if found:
            sols.append(sol)
    return ConflictReport(pairs, sols)


def extract_trajectory(g: Slcg, net: Aban | None = None, init: GlobalState | None = None,
                       goal: LocalState | None = None, *, reach: dict | None = None,
                       rng: random.Random | None = None) -> list:
    """Depth-first trajectory extraction over reach'-positive solutions.

    Each state descends into one positive solution (the first one, or a
    random one when ``rng`` is given); a state already visited anywhere in
    the extraction is skipped. The transition of a solution is emitted after
    the transitions establishing its condition. The result is a candidate:
    it is guaranteed to replay only on cycle- and conflict-free graphs.
    """
    goal = g.goal if goal is None else goal
    reach = eval_reach_prime(g) if reach is None else reach
    if not reach.get(goal, False):
        raise UnreachableGoal(f"reach'({goal}) = 0")
    visited: set = set()
    out: list = []

    def descend(ls: LocalState) -> None:
        if ls in visited:
            return
        visited.add(ls)
        positive = [sol for sol in g.states[ls].solutions if reach[sol]]
        sol = rng.choice(positive) if rng is not None else positive[0]
        for r in sol.required:
            descend(r)
        if sol.transition is not None:
            out.append(sol.transition)

    descend(goal)
    return out


def or_gates(g: Slcg) -> list:
    """State nodes with two or more solutions, in graph order."""
    return [ls for ls, node in g.states.items() if len(node.solutions) >= 2]


def format_dot(g: Slcg) -> str:
    """Graphviz digraph, one edge per line."""
    lines = ["digraph slcg {"]
    for src, dst in g.edges():
        a = src.label if isinstance(src, SolutionNode) else str(src)
        b = dst.label if isinstance(dst, SolutionNode) else str(dst)
        lines.append(f'  "{a}" -> "{b}";')
    for ls, node in g.states.items():
        if not node.solutions:
            lines.append(f'  "{ls}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
