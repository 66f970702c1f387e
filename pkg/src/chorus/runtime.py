"""Runtime configurations: values, the state function, the connection graph.

A configuration bundles the remaining choreography with the total state
function over live processes and, in the dynamic calculi, the directed
connection graph.  Configurations are immutable snapshots: every reduction
builds a new one, so they can be shared freely across explorer workers.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Mapping, Union

from .syntax import (
    BinOp, CalculusMode, Choreography, Expr, IntLit, AtomLit, NameLit, SelfRef,
    free_pn, pn,
)


@dataclass(frozen=True)
class IntV:
    value: int


@dataclass(frozen=True)
class AtomV:
    value: str


@dataclass(frozen=True)
class NameV:
    name: str


@dataclass(frozen=True)
class BottomV:
    """The undefined marker; default value of freshly spawned processes."""


BOTTOM = BottomV()

Value = Union[IntV, AtomV, NameV, BottomV]


def format_value(v: Value) -> str:
    match v:
        case IntV(x):
            return str(x)
        case AtomV(x):
            return x
        case NameV(name):
            return name
        case BottomV():
            return "⊥"
    raise TypeError(v)


def parse_value_literal(text: str) -> Value:
    """CLI state literal: leading digit or sign means integer, else atom."""
    text = text.strip()
    if text and (text[0].isdigit() or text[0] in "+-"):
        return IntV(int(text))
    if text in ("⊥", "_|_"):
        return BOTTOM
    return AtomV(text)


class EvalError(Exception):
    pass


class UnknownProcess(Exception):
    pass


def eval_expr(e: Expr, self_value: Value) -> Value:
    """Evaluate ``e`` with ``*`` standing for the sender's stored value."""
    match e:
        case IntLit(x):
            return IntV(x)
        case AtomLit(x):
            return AtomV(x)
        case NameLit(name):
            return NameV(name)
        case SelfRef():
            return self_value
        case BinOp(op, left, right):
            lv = eval_expr(left, self_value)
            rv = eval_expr(right, self_value)
            if not isinstance(lv, IntV) or not isinstance(rv, IntV):
                raise EvalError(
                    f"arithmetic on non-integer operand "
                    f"({format_value(lv)} {op} {format_value(rv)})")
            return IntV(lv.value + rv.value if op == "+" else lv.value - rv.value)
    raise TypeError(e)


# ---------------------------------------------------------------------------
# Connection graph helpers (edge (p, q) means: p knows q)

Graph = frozenset[tuple[str, str]]


def knows(graph: Graph, p: str, q: str) -> bool:
    return (p, q) in graph


def mutually_knows(graph: Graph, p: str, q: str) -> bool:
    return (p, q) in graph and (q, p) in graph


def complete_graph(names) -> Graph:
    return frozenset((p, q) for p in names for q in names if p != q)


def graph_edges_sorted(graph: Graph) -> list[tuple[str, str]]:
    return sorted(graph)


# ---------------------------------------------------------------------------
# Configurations

@dataclass(frozen=True)
class Configuration:
    graph: Graph
    chor: Choreography
    state: tuple[tuple[str, Value], ...]  # sorted by process name
    mode: CalculusMode
    fresh_counter: int = 0

    @property
    def state_map(self) -> dict[str, Value]:
        return dict(self.state)

    def lookup(self, p: str) -> Value:
        for name, value in self.state:
            if name == p:
                return value
        raise UnknownProcess(p)

    def with_state(self, state: Mapping[str, Value]) -> "Configuration":
        return dataclasses.replace(self, state=freeze_state(state))

    def updated(self, **kw) -> "Configuration":
        if "state" in kw and not isinstance(kw["state"], tuple):
            kw["state"] = freeze_state(kw["state"])
        return dataclasses.replace(self, **kw)


def freeze_state(state: Mapping[str, Value]) -> tuple[tuple[str, Value], ...]:
    return tuple(sorted(state.items()))


def initial_config(c: Choreography, mode: CalculusMode,
                   overrides: Mapping[str, Value] | None = None) -> Configuration:
    """Starting configuration: every free process holds its override or ⊥.

    In the dynamic calculi the initial graph is complete over the free
    processes, which keeps every MC-executable program runnable unchanged.
    """
    overrides = dict(overrides or {})
    all_names = pn(c)
    for name in overrides:
        if name not in all_names:
            raise UnknownProcess(name)
    frees = free_pn(c)
    state = {p: overrides.get(p, BOTTOM) for p in frees}
    graph = complete_graph(frees) if mode.allows_dynamic else frozenset()
    return Configuration(graph=graph, chor=c, state=freeze_state(state),
                         mode=mode, fresh_counter=0)
