"""Explicit-state checking of finite labeled automata.

Covers exactly what the dialogue engine's validation needs: reachability
(EF), invariants (AG), deadlock freedom, and the asynchronous interleaving
product of two instances. Untimed, plain graph search.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Callable, Union

PRODUCT_SEPARATOR = "|"

Edge = tuple[str, str, str]  # (source, label, target)


class FormulaError(Exception):
    pass


@dataclass(frozen=True)
class Automaton:
    states: frozenset[str]
    initial: str
    edges: frozenset[Edge]
    instances: tuple[str, ...] = ()  # component names when this is a product

    def __post_init__(self) -> None:
        if self.initial not in self.states:
            raise ValueError(f"initial state '{self.initial}' is not a state")
        for source, label, target in self.edges:
            if source not in self.states or target not in self.states:
                raise ValueError(f"edge ({source}, {label}, {target}) leaves the state set")

    def successors(self, state: str) -> list[tuple[str, str]]:
        """(label, target) pairs, sorted for deterministic search order."""
        return sorted((label, target) for source, label, target in self.edges if source == state)

    def component(self, state: str, instance: str) -> str:
        """Project a product state onto one named component."""
        try:
            index = self.instances.index(instance)
        except ValueError:
            raise FormulaError(f"unknown instance '{instance}'; declared: {list(self.instances)}") from None
        return state.split(PRODUCT_SEPARATOR)[index]


# -- predicates and formulas ---------------------------------------------------


@dataclass(frozen=True)
class StateAtom:
    state: str
    instance: str | None = None


@dataclass(frozen=True)
class DeadlockAtom:
    pass


@dataclass(frozen=True)
class Not:
    inner: "Predicate"


@dataclass(frozen=True)
class And:
    left: "Predicate"
    right: "Predicate"


@dataclass(frozen=True)
class Or:
    left: "Predicate"
    right: "Predicate"


Predicate = Union[StateAtom, DeadlockAtom, Not, And, Or]


@dataclass(frozen=True)
class ExistsEventually:
    pred: Predicate

    def __str__(self) -> str:
        return f"EF({_pred_str(self.pred)})"


@dataclass(frozen=True)
class AlwaysGlobally:
    pred: Predicate

    def __str__(self) -> str:
        return f"AG({_pred_str(self.pred)})"


Formula = Union[ExistsEventually, AlwaysGlobally]


def _pred_str(pred: Predicate) -> str:
    match pred:
        case StateAtom(state, None):
            return state
        case StateAtom(state, instance):
            return f"{instance}.{state}"
        case DeadlockAtom():
            return "deadlock"
        case Not(inner):
            return f"not {_pred_str(inner)}"
        case And(left, right):
            return f"({_pred_str(left)} and {_pred_str(right)})"
        case Or(left, right):
            return f"({_pred_str(left)} or {_pred_str(right)})"
    raise FormulaError(f"not a predicate: {pred!r}")


def _holds(pred: Predicate | Callable[[str], bool], automaton: Automaton, state: str) -> bool:
    if callable(pred):
        return bool(pred(state))
    match pred:
        case StateAtom(target, None):
            return state == target
        case StateAtom(target, instance):
            return automaton.component(state, instance) == target
        case DeadlockAtom():
            return not automaton.successors(state)
        case Not(inner):
            return not _holds(inner, automaton, state)
        case And(left, right):
            return _holds(left, automaton, state) and _holds(right, automaton, state)
        case Or(left, right):
            return _holds(left, automaton, state) or _holds(right, automaton, state)
    raise FormulaError(f"not a predicate: {pred!r}")


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: tuple[Edge, ...] | None = None

    def replay(self, automaton: Automaton) -> bool:
        """Check the witness is an actual path from the initial state."""
        if self.witness is None:
            return True
        current = automaton.initial
        for source, label, target in self.witness:
            if source != current or (source, label, target) not in automaton.edges:
                return False
            current = target
        return True


def _bfs(
    automaton: Automaton, stop: Callable[[str], bool]
) -> tuple[str | None, dict[str, Edge]]:
    """Breadth-first search; returns the first matching state and parent edges."""
    parents: dict[str, Edge] = {}
    seen = {automaton.initial}
    queue: deque[str] = deque([automaton.initial])
    while queue:
        state = queue.popleft()
        if stop(state):
            return state, parents
        for label, target in automaton.successors(state):
            if target not in seen:
                seen.add(target)
                parents[target] = (state, label, target)
                queue.append(target)
    return None, parents


def _path_to(state: str, automaton: Automaton, parents: dict[str, Edge]) -> tuple[Edge, ...]:
    path: list[Edge] = []
    current = state
    while current != automaton.initial:
        edge = parents[current]
        path.append(edge)
        current = edge[0]
    path.reverse()
    return tuple(path)


def reachable(
    automaton: Automaton, target: Predicate | Callable[[str], bool]
) -> Verdict:
    """EF(target): shortest witness path from the initial state, if any."""
    hit, parents = _bfs(automaton, lambda s: _holds(target, automaton, s))
    if hit is None:
        return Verdict(holds=False)
    return Verdict(holds=True, witness=_path_to(hit, automaton, parents))


def deadlock_free(automaton: Automaton) -> Verdict:
    """AG not deadlock: every reachable state has an outgoing edge."""
    sink, parents = _bfs(automaton, lambda s: not automaton.successors(s))
    if sink is None:
        return Verdict(holds=True)
    return Verdict(holds=False, witness=_path_to(sink, automaton, parents))


def safety_response(automaton: Automaton) -> Verdict:
    """A response can always be produced: EF(Ontology or TrainedBot)."""
    return reachable(automaton, Or(StateAtom("Ontology"), StateAtom("TrainedBot")))


def product(
    a1: Automaton, a2: Automaton, names: tuple[str, str] = ("c1", "c2")
) -> Automaton:
    """Asynchronous interleaving product; each step moves exactly one component.

    Labels are namespaced with the moving instance's name so the two
    components stay distinguishable in witnesses.
    """
    left_names = a1.instances or (names[0],)
    right_names = a2.instances or (names[1],)
    instances = left_names + right_names
    if len(set(instances)) != len(instances):
        raise ValueError(f"instance names must be distinct, got {instances}")

    def tag(names_: tuple[str, ...], already_product: bool, label: str) -> str:
        return label if already_product else f"{names_[0]}.{label}"

    states = frozenset(
        s1 + PRODUCT_SEPARATOR + s2 for s1 in a1.states for s2 in a2.states
    )
    edges: set[Edge] = set()
    for source, label, target in a1.edges:
        for s2 in a2.states:
            edges.add(
                (source + PRODUCT_SEPARATOR + s2, tag(left_names, bool(a1.instances), label), target + PRODUCT_SEPARATOR + s2)
            )
    for source, label, target in a2.edges:
        for s1 in a1.states:
            edges.add(
                (s1 + PRODUCT_SEPARATOR + source, tag(right_names, bool(a2.instances), label), s1 + PRODUCT_SEPARATOR + target)
            )
    return Automaton(
        states=states,
        initial=a1.initial + PRODUCT_SEPARATOR + a2.initial,
        edges=frozenset(edges),
        instances=instances,
    )


def check(formula: Formula, automaton: Automaton) -> Verdict:
    """Dispatch a formula: EF via reachability, AG via a reachable-state scan."""
    match formula:
        case ExistsEventually(pred):
            return reachable(automaton, pred)
        case AlwaysGlobally(pred):
            violating, parents = _bfs(
                automaton, lambda s: not _holds(pred, automaton, s)
            )
            if violating is None:
                return Verdict(holds=True)
            return Verdict(holds=False, witness=_path_to(violating, automaton, parents))
    raise FormulaError(f"not a formula: {formula!r}")


# -- text format ---------------------------------------------------------------

_TOKEN_RE = re.compile(r"[A-Za-z_]\w*(?:\.[A-Za-z_]\w*)?|\(|\)")


def parse_formula(text: str) -> Formula:
    """Parse 'EF(...)' / 'AG(...)' with atoms, and/or/not and 'deadlock'."""
    tokens = _TOKEN_RE.findall(text)
    if "".join(_TOKEN_RE.split(text)).strip():
        raise FormulaError(f"unexpected characters in formula: {text!r}")
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take(expected: str | None = None) -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise FormulaError(f"formula ended early: {text!r}")
        token = tokens[pos]
        if expected is not None and token != expected:
            raise FormulaError(f"expected {expected!r}, got {token!r} in {text!r}")
        pos += 1
        return token

    def parse_or() -> Predicate:
        node = parse_and()
        while peek() == "or":
            take()
            node = Or(node, parse_and())
        return node

    def parse_and() -> Predicate:
        node = parse_unary()
        while peek() == "and":
            take()
            node = And(node, parse_unary())
        return node

    def parse_unary() -> Predicate:
        if peek() == "not":
            take()
            return Not(parse_unary())
        if peek() == "(":
            take()
            node = parse_or()
            take(")")
            return node
        token = take()
        if token in ("and", "or", ")", "(", "EF", "AG"):
            raise FormulaError(f"unexpected token {token!r} in {text!r}")
        if token == "deadlock":
            return DeadlockAtom()
        if "." in token:
            instance, state = token.split(".", 1)
            return StateAtom(state=state, instance=instance)
        return StateAtom(state=token)

    head = take()
    if head not in ("EF", "AG"):
        raise FormulaError(f"formula must start with EF or AG: {text!r}")
    take("(")
    pred = parse_or()
    take(")")
    if pos != len(tokens):
        raise FormulaError(f"trailing tokens in formula: {text!r}")
    return ExistsEventually(pred) if head == "EF" else AlwaysGlobally(pred)


def parse_model(text: str) -> tuple[Automaton, list[Formula]]:
    """Parse the line-oriented model format.

    One declaration per line: 'state NAME', 'init NAME',
    'edge SRC LABEL DST', 'check FORMULA'. '#' starts a comment.
    """
    states: set[str] = set()
    initial: str | None = None
    edges: set[Edge] = set()
    formulas: list[Formula] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()
        if keyword == "state" and rest:
            states.add(rest)
        elif keyword == "init" and rest:
            initial = rest
        elif keyword == "edge":
            parts = rest.split()
            if len(parts) != 3:
                raise FormulaError(f"line {lineno}: expected 'edge SRC LABEL DST'")
            edges.add((parts[0], parts[1], parts[2]))
        elif keyword == "check" and rest:
            formulas.append(parse_formula(rest))
        else:
            raise FormulaError(f"line {lineno}: cannot parse {raw!r}")
    if initial is None:
        raise FormulaError("model declares no 'init' state")
    for source, _, target in edges:
        states.update((source, target))
    automaton = Automaton(states=frozenset(states), initial=initial, edges=frozenset(edges))
    return automaton, formulas


def _instance_names(pred: Predicate, found: list[str]) -> None:
    match pred:
        case StateAtom(_, instance) if instance is not None:
            if instance not in found:
                found.append(instance)
        case Not(inner):
            _instance_names(inner, found)
        case And(left, right) | Or(left, right):
            _instance_names(left, found)
            _instance_names(right, found)


def run_model(text: str) -> list[tuple[Formula, Verdict]]:
    """Parse and run a model file's checks.

    Formulas with dotted atoms (c1.State) run against the self-product of the
    model, instances named in order of first appearance; plain formulas run
    against the model itself.
    """
    automaton, formulas = parse_model(text)
    results: list[tuple[Formula, Verdict]] = []
    for formula in formulas:
        names: list[str] = []
        _instance_names(formula.pred, names)
        if not names:
            results.append((formula, check(formula, automaton)))
        elif len(names) == 2:
            two = product(automaton, automaton, names=(names[0], names[1]))
            results.append((formula, check(formula, two)))
        else:
            raise FormulaError(f"expected zero or two instances in a formula, got {names}")
    return results
