"""Small-step reduction with out-of-order execution.

Structural rearrangement is realised as redex enumeration rather than term
rewriting: a single linear scan of the sequential spine finds every action
whose process names are disjoint from all interactions in front of it.
Conditional guards and procedure calls are barriers; definitions are
transparent; a call at an enabled position is an unfolding redex.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Callable, Union

from .runtime import (
    BOTTOM, Configuration, Value, eval_expr, freeze_state, knows, mutually_knows,
)
from .syntax import (
    Call, Choreography, Com, Cond, Def, Eta, NIL, NameLit, Nil, Prefix, Sel,
    Start, eta_pn,
)


class ReductionError(Exception):
    pass


class NotEnabled(ReductionError):
    """The redex is stale or its premises no longer hold."""


@dataclass(frozen=True)
class Redex:
    path: tuple[str, ...]  # 'P' skips a prefix, 'D' enters a definition
    kind: str  # com | intro | sel | start | cond-then | cond-else | unfold
    stamp: int  # fresh counter at enumeration time, for staleness detection


# Trace event descriptions; exactly one per reduction step.

@dataclass(frozen=True)
class ValueDelivered:
    sender: str
    receiver: str
    value: Value


@dataclass(frozen=True)
class LabelDelivered:
    sender: str
    receiver: str
    label: str


@dataclass(frozen=True)
class Spawned:
    parent: str
    child: str


@dataclass(frozen=True)
class Introduced:
    introducer: str
    learner: str
    learned: str


@dataclass(frozen=True)
class Branched:
    left: str
    right: str
    taken: bool


@dataclass(frozen=True)
class Unfolded:
    name: str


EventDescription = Union[ValueDelivered, LabelDelivered, Spawned, Introduced,
                         Branched, Unfolded]


@dataclass(frozen=True)
class TraceEvent:
    redex: Redex
    description: EventDescription


# ---------------------------------------------------------------------------
# Name substitution (capture-avoiding over process names)

def subst_names(c: Choreography, mapping: dict[str, str]) -> Choreography:
    if not mapping:
        return c

    def sub(name: str) -> str:
        return mapping.get(name, name)

    def sub_expr(e):
        match e:
            case NameLit(name):
                return NameLit(sub(name))
            case _:
                return e

    match c:
        case Nil():
            return c
        case Prefix(Start(parent, child), cont):
            inner = {k: v for k, v in mapping.items() if k != child}
            if child in inner.values():
                raise ReductionError(f"name capture at binder {child!r}")
            return Prefix(Start(sub(parent), child), subst_names(cont, inner))
        case Prefix(Com(s, e, r), cont):
            return Prefix(Com(sub(s), sub_expr(e), sub(r)), subst_names(cont, mapping))
        case Prefix(Sel(s, r, label), cont):
            return Prefix(Sel(sub(s), sub(r), label), subst_names(cont, mapping))
        case Cond(left, right, t, e):
            return Cond(sub(left), sub(right), subst_names(t, mapping),
                        subst_names(e, mapping))
        case Def(name, params, body, cont):
            inner = {k: v for k, v in mapping.items() if k not in params}
            captured = set(params) & set(inner.values())
            if captured:
                raise ReductionError(f"name capture at parameters {sorted(captured)}")
            return Def(name, params, subst_names(body, inner),
                       subst_names(cont, mapping))
        case Call(name, args):
            return Call(name, tuple(sub(a) for a in args))
    raise TypeError(c)


# ---------------------------------------------------------------------------
# Redex enumeration

def _evaluates(cfg: Configuration, sender: str, expr) -> bool:
    try:
        eval_expr(expr, cfg.lookup(sender))
    except Exception:
        return False
    return True


def _eta_premise_ok(cfg: Configuration, eta: Eta) -> bool:
    g = cfg.graph
    dyn = cfg.mode.allows_dynamic
    match eta:
        case Com(sender, NameLit(learned), receiver) if dyn:
            return mutually_knows(g, sender, receiver) and knows(g, sender, learned)
        case Com(sender, expr, receiver):
            # the expression premise: e must evaluate at the sender
            return _evaluates(cfg, sender, expr) and (
                not dyn or mutually_knows(g, sender, receiver))
        case Sel(sender, receiver, _):
            return not dyn or mutually_knows(g, sender, receiver)
        case Start(_, _):
            return True
    raise TypeError(eta)


def _eta_kind(cfg: Configuration, eta: Eta) -> str:
    match eta:
        case Com(_, NameLit(_), _) if cfg.mode.allows_dynamic:
            return "intro"
        case Com(_, _, _):
            return "com"
        case Sel(_, _, _):
            return "sel"
        case Start(_, _):
            return "start"
    raise TypeError(eta)


def enabled_redexes(cfg: Configuration) -> list[Redex]:
    """Every redex reachable by the supported precongruence, in path order."""
    out: list[Redex] = []
    blocked: set[str] = set()
    path: list[str] = []
    node = cfg.chor
    dyn = cfg.mode.allows_dynamic
    while True:
        match node:
            case Prefix(eta, cont):
                names = eta_pn(eta)
                if not (names & blocked) and _eta_premise_ok(cfg, eta):
                    out.append(Redex(tuple(path), _eta_kind(cfg, eta), cfg.fresh_counter))
                blocked |= names
                path.append("P")
                node = cont
            case Cond(left, right, _, _):
                if not ({left, right} & blocked) and (
                        not dyn or mutually_knows(cfg.graph, left, right)):
                    taken = cfg.lookup(left) == cfg.lookup(right)
                    kind = "cond-then" if taken else "cond-else"
                    out.append(Redex(tuple(path), kind, cfg.fresh_counter))
                break
            case Def(_, _, _, cont):
                path.append("D")
                node = cont
            case Call(_, args):
                if not (set(args) & blocked):
                    out.append(Redex(tuple(path), "unfold", cfg.fresh_counter))
                break
            case Nil():
                break
            case _:
                raise TypeError(node)
    return out


# ---------------------------------------------------------------------------
# Redex application

def apply_redex(cfg: Configuration, r: Redex) -> tuple[Configuration, TraceEvent]:
    if r.stamp != cfg.fresh_counter:
        raise NotEnabled("redex was enumerated from a different configuration")

    # Walk to the redex position, re-verifying the disjointness condition.
    blocked: set[str] = set()
    defs: dict[str, tuple[tuple[str, ...], Choreography]] = {}
    node = cfg.chor
    for step in r.path:
        match node, step:
            case Prefix(eta, cont), "P":
                blocked |= eta_pn(eta)
                node = cont
            case Def(name, params, body, cont), "D":
                defs[name] = (params, body)
                node = cont
            case _:
                raise NotEnabled("redex path does not match the term")

    state = cfg.state_map
    graph = cfg.graph
    counter = cfg.fresh_counter
    description: EventDescription

    match node:
        case Prefix(eta, cont) if r.kind in ("com", "intro", "sel", "start"):
            if eta_pn(eta) & blocked or not _eta_premise_ok(cfg, eta):
                raise NotEnabled("interaction premises no longer hold")
            if r.kind != _eta_kind(cfg, eta):
                raise NotEnabled("redex kind does not match the term")
            replacement = cont
            match eta:
                case Com(sender, NameLit(learned), receiver) if cfg.mode.allows_dynamic:
                    # the receiver and the introduced process learn each other
                    graph = graph | {(receiver, learned), (learned, receiver)}
                    description = Introduced(sender, receiver, learned)
                case Com(sender, expr, receiver):
                    try:
                        value = eval_expr(expr, cfg.lookup(sender))
                    except Exception as exc:
                        raise ReductionError(str(exc)) from exc
                    state[receiver] = value
                    description = ValueDelivered(sender, receiver, value)
                case Sel(sender, receiver, label):
                    description = LabelDelivered(sender, receiver, label)
                case Start(parent, child):
                    fresh = f"{child}${counter}"
                    counter += 1
                    replacement = subst_names(cont, {child: fresh})
                    state[fresh] = BOTTOM
                    graph = graph | {(parent, fresh), (fresh, parent)}
                    description = Spawned(parent, fresh)
        case Cond(left, right, then_branch, else_branch) if r.kind in ("cond-then", "cond-else"):
            if {left, right} & blocked or (
                    cfg.mode.allows_dynamic and not mutually_knows(graph, left, right)):
                raise NotEnabled("conditional premises no longer hold")
            taken = cfg.lookup(left) == cfg.lookup(right)
            if (r.kind == "cond-then") != taken:
                raise NotEnabled("guard outcome changed")
            replacement = then_branch if taken else else_branch
            description = Branched(left, right, taken)
        case Call(name, args) if r.kind == "unfold":
            if set(args) & blocked:
                raise NotEnabled("call arguments are blocked")
            if name not in defs:
                raise NotEnabled(f"no visible definition for {name!r}")
            params, body = defs[name]
            if len(params) != len(args):
                raise NotEnabled(f"arity mismatch unfolding {name!r}")
            replacement = subst_names(body, dict(zip(params, args)))
            description = Unfolded(name)
        case _:
            raise NotEnabled("redex kind does not match the term")

    def rebuild(term: Choreography, depth: int) -> Choreography:
        if depth == len(r.path):
            return replacement
        match term, r.path[depth]:
            case Prefix(eta, cont), "P":
                return Prefix(eta, rebuild(cont, depth + 1))
            case Def(name, params, body, cont), "D":
                return Def(name, params, body, rebuild(cont, depth + 1))
        raise NotEnabled("redex path does not match the term")

    new_cfg = cfg.updated(chor=rebuild(cfg.chor, 0), state=freeze_state(state),
                          graph=graph, fresh_counter=counter)
    return new_cfg, TraceEvent(r, description)


# ---------------------------------------------------------------------------
# Termination and driving loop

def is_terminated(c: Choreography) -> bool:
    """True iff garbage-collecting unused definitions leaves the empty term."""
    match c:
        case Nil():
            return True
        case Def(_, _, _, cont):
            return is_terminated(cont)
        case _:
            return False


class Outcome(enum.Enum):
    TERMINATED = "terminated"
    STEP_LIMIT = "step-limit"
    STUCK = "stuck"


@dataclass
class RunResult:
    final: Configuration
    trace: list[TraceEvent]
    outcome: Outcome


Scheduler = Callable[[Configuration, list[Redex], int], Redex]


def first_scheduler(cfg: Configuration, redexes: list[Redex], step: int) -> Redex:
    return redexes[0]


def random_scheduler(seed: int) -> Scheduler:
    rng = random.Random(seed)

    def pick(cfg: Configuration, redexes: list[Redex], step: int) -> Redex:
        return rng.choice(redexes)

    return pick


def run(cfg: Configuration, scheduler: Scheduler = first_scheduler,
        max_steps: int = 10_000) -> RunResult:
    """Iterate the reduction relation under a scheduling policy."""
    trace: list[TraceEvent] = []
    for step in range(max_steps):
        redexes = enabled_redexes(cfg)
        if not redexes:
            outcome = Outcome.TERMINATED if is_terminated(cfg.chor) else Outcome.STUCK
            return RunResult(cfg, trace, outcome)
        cfg, event = apply_redex(cfg, scheduler(cfg, redexes, step))
        trace.append(event)
    if not enabled_redexes(cfg):
        outcome = Outcome.TERMINATED if is_terminated(cfg.chor) else Outcome.STUCK
        return RunResult(cfg, trace, outcome)
    return RunResult(cfg, trace, Outcome.STEP_LIMIT)
