"""Bounded exhaustive exploration and the mechanical theorem oracles.

States are canonicalized by renaming machine-generated process names in
first-appearance order, so configurations that differ only in the choice of
fresh names collide.  The quantifiers of the correspondence theorems are
realised as reachability questions over the explored graph; when a bound is
hit the answer is inconclusive, never a pass.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

from .runtime import Configuration, NameV, Value
from .semantics import (
    Branched, LabelDelivered, Spawned, TraceEvent, ValueDelivered,
    apply_redex, enabled_redexes, is_terminated,
)
from .syntax import (
    AtomLit, BinOp, Call, Choreography, Com, Cond, Def, IntLit, NameLit, Nil,
    Prefix, SelfRef, Sel, Start, free_pn, is_machine_name,
)
from .transform import _Encoder, ordered_pairs

Key = tuple


# ---------------------------------------------------------------------------
# Canonicalization

def _canon_name(n: str, rename: dict[str, str]) -> str:
    if not is_machine_name(n):
        return n
    if n not in rename:
        rename[n] = f"$c{len(rename)}"
    return rename[n]


def _canon_expr(e, rename: dict[str, str]):
    match e:
        case IntLit(v):
            return ("int", v)
        case AtomLit(v):
            return ("atom", v)
        case NameLit(name):
            return ("name", _canon_name(name, rename))
        case SelfRef():
            return ("self",)
        case BinOp(op, left, right):
            return ("op", op, _canon_expr(left, rename), _canon_expr(right, rename))
    raise TypeError(e)


def canon_chor(c: Choreography, rename: dict[str, str] | None = None) -> tuple:
    """Hashable form of a term with machine names numbered by first appearance."""
    if rename is None:
        rename = {}
    cn = lambda n: _canon_name(n, rename)  # noqa: E731
    match c:
        case Nil():
            return ("nil",)
        case Prefix(Com(s, e, r), cont):
            return ("com", cn(s), _canon_expr(e, rename), cn(r), canon_chor(cont, rename))
        case Prefix(Sel(s, r, label), cont):
            return ("sel", cn(s), cn(r), label, canon_chor(cont, rename))
        case Prefix(Start(p, q), cont):
            return ("start", cn(p), cn(q), canon_chor(cont, rename))
        case Cond(left, right, t, e):
            return ("cond", cn(left), cn(right),
                    canon_chor(t, rename), canon_chor(e, rename))
        case Def(name, params, body, cont):
            return ("def", name, tuple(cn(p) for p in params),
                    canon_chor(body, rename), canon_chor(cont, rename))
        case Call(name, args):
            return ("call", name, tuple(cn(a) for a in args))
    raise TypeError(c)


def _canon_value(v: Value, rename: dict[str, str]) -> tuple:
    if isinstance(v, NameV):
        return ("pname", rename.get(v.name, v.name))
    return (type(v).__name__, getattr(v, "value", None))


def canonical_key(cfg: Configuration) -> Key:
    rename: dict[str, str] = {}
    chor_key = canon_chor(cfg.chor, rename)

    def live(n: str) -> bool:
        return not is_machine_name(n) or n in rename

    state_key = tuple(sorted(
        (rename.get(p, p), _canon_value(v, rename))
        for p, v in cfg.state if live(p)))
    graph_key = tuple(sorted(
        (rename.get(a, a), rename.get(b, b))
        for a, b in cfg.graph if live(a) and live(b)))
    return (chor_key, state_key, graph_key)


# ---------------------------------------------------------------------------
# Exploration

DEFAULT_DEPTH = 60
DEFAULT_NODE_LIMIT = 200_000


@dataclass
class StateSpace:
    root: Key
    nodes: dict[Key, Configuration]
    edges: dict[Key, list[tuple[TraceEvent, Key]]]
    expanded: set[Key]
    exhausted: bool
    depth_bound: int
    node_limit: int

    def is_terminal(self, key: Key) -> bool:
        return is_terminated(self.nodes[key].chor)

    def reverse_edges(self) -> dict[Key, list[Key]]:
        rev: dict[Key, list[Key]] = {k: [] for k in self.nodes}
        for src, outs in self.edges.items():
            for _, dst in outs:
                rev[dst].append(src)
        return rev


def explore(cfg: Configuration, depth: int = DEFAULT_DEPTH,
            node_limit: int = DEFAULT_NODE_LIMIT) -> StateSpace:
    """Breadth-first expansion of every enabled redex up to the given bounds."""
    root = canonical_key(cfg)
    nodes: dict[Key, Configuration] = {root: cfg}
    edges: dict[Key, list[tuple[TraceEvent, Key]]] = {root: []}
    expanded: set[Key] = set()
    exhausted = True
    frontier: deque[tuple[Key, int]] = deque([(root, 0)])
    while frontier:
        key, d = frontier.popleft()
        if key in expanded:
            continue
        rep = nodes[key]
        redexes = enabled_redexes(rep)
        if d >= depth:
            if redexes:
                exhausted = False
            else:
                expanded.add(key)
            continue
        expanded.add(key)
        for r in redexes:
            ncfg, event = apply_redex(rep, r)
            nkey = canonical_key(ncfg)
            if nkey not in nodes:
                if len(nodes) >= node_limit:
                    exhausted = False
                    continue
                nodes[nkey] = ncfg
                edges[nkey] = []
                frontier.append((nkey, d + 1))
            edges[key].append((event, nkey))
    return StateSpace(root=root, nodes=nodes, edges=edges, expanded=expanded,
                      exhausted=exhausted, depth_bound=depth,
                      node_limit=node_limit)


def _backward_reach(space: StateSpace, targets: set[Key]) -> set[Key]:
    rev = space.reverse_edges()
    seen = set(targets)
    stack = list(targets)
    while stack:
        for pred in rev[stack.pop()]:
            if pred not in seen:
                seen.add(pred)
                stack.append(pred)
    return seen


# ---------------------------------------------------------------------------
# Check results

OK = "ok"
VIOLATION = "violation"
INCONCLUSIVE = "inconclusive"


@dataclass
class CheckResult:
    status: str
    details: list

    @property
    def ok(self) -> bool:
        return self.status == OK


def aux_pair(name: str, source_pn: frozenset[str] | set[str]) -> Optional[tuple[str, str]]:
    """The (sender, receiver) pair a channel process belongs to, if any."""
    parts = name.split("$")
    if len(parts) >= 3 and parts[0] in source_pn and parts[1] in source_pn:
        return (parts[0], parts[1])
    return None


def user_base(name: str, source_pn) -> Optional[str]:
    """The source process a runtime name instantiates, if any.

    Spawned processes carry a numeric suffix per spawn (``w`` runs as e.g.
    ``w$3``); channel processes have another source name in second position
    and are never user processes.
    """
    parts = name.split("$")
    if parts[0] in source_pn and all(p.isdigit() for p in parts[1:]):
        return parts[0]
    return None


def channel_base(name: str, source_pn) -> Optional[tuple[str, str, int]]:
    """The (sender, receiver, index) triple of a runtime channel name.

    Spawning suffixes a counter onto the declared ident, so the running
    instance of ``p$q$0`` is called e.g. ``p$q$0$7``; this recovers the
    declared triple.
    """
    parts = name.split("$")
    if (len(parts) >= 3 and parts[0] in source_pn and parts[1] in source_pn
            and parts[2].isdigit()):
        return (parts[0], parts[1], int(parts[2]))
    return None


# ---------------------------------------------------------------------------
# Progress (deadlock freedom)

def check_progress(space: StateSpace) -> CheckResult:
    stuck = [k for k in space.expanded
             if not space.edges[k] and not space.is_terminal(k)]
    if stuck:
        return CheckResult(VIOLATION, stuck)
    if not space.exhausted:
        return CheckResult(INCONCLUSIVE, [])
    return CheckResult(OK, [])


# ---------------------------------------------------------------------------
# Eventual delivery

def _sends_and_discharges(space: StateSpace, source_pn):
    """Group channel ingress edges by signature and find discharge points."""
    sends: dict[tuple, list[tuple[Key, TraceEvent]]] = {}
    discharge_src: dict[tuple, set[Key]] = {}

    for src, outs in space.edges.items():
        for event, dst in outs:
            d = event.description
            if isinstance(d, ValueDelivered):
                pair = aux_pair(d.receiver, source_pn)
                if pair and user_base(d.sender, source_pn) == pair[0]:
                    sends.setdefault(("v", pair, d.value), []).append((dst, event))
                spair = aux_pair(d.sender, source_pn)
                if spair and user_base(d.receiver, source_pn):
                    discharge_src.setdefault(("v", spair, d.value), set()).add(src)
            elif isinstance(d, LabelDelivered):
                pair = aux_pair(d.receiver, source_pn)
                if pair and user_base(d.sender, source_pn) == pair[0]:
                    sends.setdefault(("l", pair, d.label), []).append((dst, event))
                spair = aux_pair(d.sender, source_pn)
                if spair and user_base(d.receiver, source_pn):
                    discharge_src.setdefault(("l", spair, d.label), set()).add(src)
            elif isinstance(d, Branched):
                # a conditional consumes the value stored in its channel
                pair = aux_pair(d.right, source_pn)
                if pair and user_base(d.left, source_pn):
                    try:
                        held = space.nodes[src].lookup(d.right)
                    except Exception:
                        continue
                    discharge_src.setdefault(("v", pair, held), set()).add(src)
    return sends, discharge_src


def check_eventual_delivery(space: StateSpace, source_pn) -> CheckResult:
    """Every value or label fed into a channel chain eventually reaches the
    original receiver on some continuation path."""
    source_pn = set(source_pn)
    sends, discharge_src = _sends_and_discharges(space, source_pn)
    counterexamples = []
    for sig, send_list in sends.items():
        reach = _backward_reach(space, discharge_src.get(sig, set()))
        for dst, event in send_list:
            if dst not in reach:
                counterexamples.append((event, dst))
    if counterexamples:
        return CheckResult(VIOLATION, counterexamples)
    if not space.exhausted:
        return CheckResult(INCONCLUSIVE, [])
    return CheckResult(OK, [])


# ---------------------------------------------------------------------------
# No added behaviour

def check_no_added_behavior(source: Configuration, encoded: Configuration,
                            depth: int = DEFAULT_DEPTH,
                            node_limit: int = DEFAULT_NODE_LIMIT) -> CheckResult:
    """Every encoded state can be completed to the image of a source state,
    with the stored values of the original processes agreeing exactly."""
    src_space = explore(source, depth=depth, node_limit=node_limit)
    enc_space = explore(encoded, depth=depth, node_limit=node_limit)
    if not (src_space.exhausted and enc_space.exhausted):
        return CheckResult(INCONCLUSIVE, [])

    frees = sorted(free_pn(source.chor))
    pairs = ordered_pairs(frees)

    def sigma_slice(cfg: Configuration) -> tuple:
        sm = cfg.state_map
        return tuple((p, sm[p]) for p in frees if p in sm)

    images = set()
    for key, rep in src_space.nodes.items():
        enc = _Encoder(source.mode, pairs)
        try:
            image = enc.encode(rep.chor, {pair: 0 for pair in pairs}, {})
        except Exception:
            continue
        images.add((canon_chor(image), sigma_slice(rep)))

    targets = {k for k, rep in enc_space.nodes.items()
               if (k[0], sigma_slice(rep)) in images}
    reach = _backward_reach(enc_space, targets)
    bad = [k for k in enc_space.nodes if k not in reach]
    if bad:
        return CheckResult(VIOLATION, bad)
    return CheckResult(OK, [])


# ---------------------------------------------------------------------------
# Per-pair FIFO ordering

def fifo_per_pair(space: StateSpace, source_pn) -> CheckResult:
    """On every path, each pair's channel chain delivers payloads in the
    order they were fed in (delivered sequence is a prefix of sent)."""
    source_pn = set(source_pn)
    if not space.exhausted:
        return CheckResult(INCONCLUSIVE, [])

    def classify(event: TraceEvent, src: Key):
        d = event.description
        if isinstance(d, (ValueDelivered, LabelDelivered)):
            payload = d.value if isinstance(d, ValueDelivered) else d.label
            kind = "v" if isinstance(d, ValueDelivered) else "l"
            in_pair = aux_pair(d.receiver, source_pn)
            if in_pair and user_base(d.sender, source_pn) == in_pair[0]:
                return ("send", in_pair, (kind, payload))
            out_pair = aux_pair(d.sender, source_pn)
            if out_pair and user_base(d.receiver, source_pn):
                return ("deliver", out_pair, (kind, payload))
        elif isinstance(d, Branched):
            pair = aux_pair(d.right, source_pn)
            if pair and user_base(d.left, source_pn):
                try:
                    held = space.nodes[src].lookup(d.right)
                except Exception:
                    return None
                return ("deliver", pair, ("v", held))
        return None

    start = (space.root, ())
    seen = {start}
    stack = [start]
    while stack:
        key, pending = stack.pop()
        pend = dict(pending)
        for event, dst in space.edges[key]:
            action = classify(event, key)
            npend = dict(pend)
            if action is not None:
                what, pair, payload = action
                queue = list(npend.get(pair, ()))
                if what == "send":
                    queue.append(payload)
                else:
                    if not queue or queue[0] != payload:
                        return CheckResult(VIOLATION, [(event, pair, tuple(queue))])
                    queue.pop(0)
                npend[pair] = tuple(queue)
            nstate = (dst, tuple(sorted(npend.items())))
            if nstate not in seen:
                seen.add(nstate)
                stack.append(nstate)
    return CheckResult(OK, [])


# ---------------------------------------------------------------------------
# Path queries

EventPred = Callable[[TraceEvent, Key], bool]


def can_precede(space: StateSpace, pred_a: EventPred, pred_b: EventPred) -> bool:
    """Whether some path performs an edge matching pred_a and later one
    matching pred_b."""
    b_sources = {src for src, outs in space.edges.items()
                 for event, _ in outs if pred_b(event, src)}
    reach = _backward_reach(space, b_sources)
    for src, outs in space.edges.items():
        for event, dst in outs:
            if pred_a(event, src) and dst in reach:
                return True
    return False


def _payload_orders(space: StateSpace, is_observed) -> set[tuple]:
    memo: dict[Key, set[tuple]] = {}

    def suffixes(key: Key) -> set[tuple]:
        if key in memo:
            return memo[key]
        memo[key] = set()  # cycle guard
        outs = space.edges[key]
        if not outs:
            result = {()}
        else:
            result = set()
            for event, dst in outs:
                d = event.description
                head = (d.value,) if (
                    isinstance(d, ValueDelivered) and is_observed(d)) else ()
                for rest in suffixes(dst):
                    result.add(head + rest)
        memo[key] = result
        return result

    return suffixes(space.root)


def delivery_orders(space: StateSpace, receiver: str, source_pn) -> set[tuple]:
    """All orders in which channel chains deliver values to ``receiver``
    across maximal paths."""
    source_pn = set(source_pn)
    return _payload_orders(space, lambda d: (
        user_base(d.receiver, source_pn) == receiver
        and aux_pair(d.sender, source_pn) is not None))


def ingress_orders(space: StateSpace, receiver: str, source_pn) -> set[tuple]:
    """All orders in which messages destined for ``receiver`` are accepted by
    the channel infrastructure (the sender-side hop, where the sender's
    obligation ends)."""
    source_pn = set(source_pn)
    return _payload_orders(space, lambda d: (
        (base := user_base(d.sender, source_pn)) is not None
        and aux_pair(d.receiver, source_pn) == (base, receiver)))
