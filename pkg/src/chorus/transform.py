"""Source-to-source transformations.

``encode_async`` rewrites every communication into a chain of auxiliary
channel processes so that senders never wait for receivers, using only
spawning and name mobility.  ``eliminate_selections`` turns label selections
into value communications absorbed by per-receiver buffer processes.
``check_wellformed`` abstract-interprets the connection graph to guarantee
that every interaction can satisfy its connectivity premises.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .runtime import Graph
from .syntax import (
    CalculusMode, Call, Choreography, Com, Cond, Def, Eta, IntLit, NIL,
    NameLit, Nil, Prefix, SELF, Sel, Start, _fmt_eta, bound_names, free_pn,
    pn, seq, start_children, tell, validate,
)


class TransformError(Exception):
    def __init__(self, reason: str, msg: str):
        self.reason = reason
        super().__init__(msg)


def channel(p: str, q: str, i: int) -> str:
    """Name of the auxiliary process holding the i-th message from p to q."""
    return f"{p}${q}${i}"


def ordered_pairs(names) -> list[tuple[str, str]]:
    ordered = sorted(names)
    return [(p, q) for p in ordered for q in ordered if p != q]


# ---------------------------------------------------------------------------
# Alpha renaming

def is_alpha_apart(c: Choreography) -> bool:
    bound = bound_names(c)
    return len(bound) == len(set(bound)) and not (set(bound) & free_pn(c))


def alpha_rename(c: Choreography) -> Choreography:
    """Rename binders so all bound names are distinct and apart from free ones."""
    used = set(free_pn(c))
    counter = itertools.count(1)

    def freshen(x: str) -> str:
        if x not in used:
            return x
        while True:
            cand = f"{x}$r{next(counter)}"
            if cand not in used:
                return cand

    def sub(name: str, ren: dict[str, str]) -> str:
        return ren.get(name, name)

    def walk(node: Choreography, ren: dict[str, str]) -> Choreography:
        match node:
            case Nil():
                return node
            case Prefix(Start(parent, child), cont):
                new = freshen(child)
                used.add(new)
                return Prefix(Start(sub(parent, ren), new),
                              walk(cont, ren | {child: new}))
            case Prefix(Com(s, e, r), cont):
                expr = NameLit(sub(e.name, ren)) if isinstance(e, NameLit) else e
                return Prefix(Com(sub(s, ren), expr, sub(r, ren)), walk(cont, ren))
            case Prefix(Sel(s, r, label), cont):
                return Prefix(Sel(sub(s, ren), sub(r, ren), label), walk(cont, ren))
            case Cond(left, right, t, e):
                return Cond(sub(left, ren), sub(right, ren),
                            walk(t, ren), walk(e, ren))
            case Def(name, params, body, cont):
                fresh_params = []
                inner = dict(ren)
                for p in params:
                    new = freshen(p)
                    used.add(new)
                    fresh_params.append(new)
                    inner[p] = new
                return Def(name, tuple(fresh_params), walk(body, inner),
                           walk(cont, ren))
            case Call(name, args):
                return Call(name, tuple(sub(a, ren) for a in args))
        raise TypeError(node)

    return walk(c, {})


# ---------------------------------------------------------------------------
# Asynchrony encoding

@dataclass
class EncodingReport:
    source_processes: tuple[str, ...]
    channels_created: int
    procedures_rewritten: list[tuple[str, int]]


@dataclass
class EncodingResult:
    choreography: Choreography
    mode: CalculusMode
    report: EncodingReport


def async_output_mode(mode_in: CalculusMode) -> CalculusMode:
    if mode_in in (CalculusMode.MC, CalculusMode.DMC):
        return CalculusMode.DMC
    return CalculusMode.DCC


class _Encoder:
    def __init__(self, mode_in: CalculusMode, global_pairs: list[tuple[str, str]]):
        self.mode_in = mode_in
        # MC/CC procedures are parameterless and carry the channel vector over
        # all top-level processes; dynamic-mode procedures restrict it to
        # channels among their declared parameters.
        self.use_global = not mode_in.allows_dynamic
        self.global_pairs = global_pairs
        self.channels_created = 0
        self.procedures: list[tuple[str, int]] = []

    def aux(self, m: dict, p: str, q: str) -> str:
        if (p, q) not in m:
            raise TransformError(
                "unscoped-pair",
                f"no communication channel available for {p} -> {q}")
        return channel(p, q, m[(p, q)])

    def nxt(self, m: dict, p: str, q: str) -> str:
        return channel(p, q, m[(p, q)] + 1)

    def encode(self, c: Choreography, m: dict, defs: dict[str, tuple[str, ...]]) -> Choreography:
        match c:
            case Nil():
                return NIL
            case Call(name, args):
                if name not in defs:
                    raise TransformError("unbound-call",
                                         f"call to undefined procedure {name!r}")
                extra = tuple(self.aux(m, self._arg(p, args, defs[name]),
                                       self._arg(q, args, defs[name]))
                              for p, q in self._pairs_for(defs[name]))
                return Call(name, args + extra)
            case Def(name, params, body, cont):
                defs = defs | {name: params}
                pair_list = self._pairs_for(params)
                extra_params = tuple(channel(p, q, 0) for p, q in pair_list)
                m0 = {pair: 0 for pair in pair_list}
                if params:
                    visible = set(params) | set(_started(body))
                    stray = pn(body) - visible
                    if stray:
                        raise TransformError(
                            "unscoped-procedure",
                            f"body of {name!r} uses processes outside its "
                            f"parameters: {', '.join(sorted(stray))}")
                self.procedures.append((name, len(params) + len(extra_params)))
                return Def(name, params + extra_params,
                           self.encode(body, m0, defs),
                           self.encode(cont, m, defs))
            case Cond(p, q, then_branch, else_branch):
                qp = self.aux(m, q, p)
                qp1 = self.nxt(m, q, p)
                actions: list[Eta] = [
                    Com(q, SELF, qp),
                    Start(q, qp1),
                    *tell(q, qp, qp1),
                    Com(qp, NameLit(p), qp1),
                    Com(qp, NameLit(qp1), p),
                ]
                m2 = m | {(q, p): m[(q, p)] + 1}
                guarded = Cond(p, qp,
                               self.encode(then_branch, m2, defs),
                               self.encode(else_branch, m2, defs))
                return seq(actions, guarded)
            case Prefix(eta, cont):
                actions, m2 = self.encode_eta(eta, m)
                return seq(actions, self.encode(cont, m2, defs))
        raise TypeError(c)

    def encode_eta(self, eta: Eta, m: dict) -> tuple[list[Eta], dict]:
        match eta:
            case Start(p, q):
                self.channels_created += 2
                actions = [
                    Start(p, q),
                    Start(p, channel(p, q, 0)),
                    Start(q, channel(q, p, 0)),
                    *tell(p, q, channel(p, q, 0)),
                    *tell(q, p, channel(q, p, 0)),
                ]
                return actions, m | {(p, q): 0, (q, p): 0}
            case Com(p, NameLit(q), r) if self.mode_in.allows_dynamic:
                # name mobility: p creates the q->r channel and ships it
                # through both of its own channels
                self.channels_created += 1
                qr0 = channel(q, r, 0)
                pq, pq1 = self.aux(m, p, q), self.nxt(m, p, q)
                pr, pr1 = self.aux(m, p, r), self.nxt(m, p, r)
                actions = [
                    Start(p, qr0),
                    Com(p, NameLit(qr0), pq),
                    Com(p, NameLit(qr0), pr),
                    Start(p, pq1),
                    *tell(p, pq, pq1),
                    Start(p, pr1),
                    *tell(p, pr, pr1),
                    Com(pq, NameLit(q), pq1),
                    Com(pr, NameLit(r), pr1),
                    Com(pq, NameLit(pq1), q),
                    Com(pq, NameLit(qr0), q),
                    Com(pr, NameLit(pr1), r),
                    Com(pr, NameLit(qr0), r),
                ]
                return actions, m | {(p, q): m[(p, q)] + 1,
                                     (p, r): m[(p, r)] + 1,
                                     (q, r): 0}
            case Com(p, expr, q):
                pq, pq1 = self.aux(m, p, q), self.nxt(m, p, q)
                actions = [
                    Com(p, expr, pq),
                    Start(p, pq1),
                    *tell(p, pq, pq1),
                    Com(pq, NameLit(q), pq1),
                    Com(pq, NameLit(pq1), q),
                    Com(pq, SELF, q),
                ]
                return actions, m | {(p, q): m[(p, q)] + 1}
            case Sel(p, q, label):
                pq, pq1 = self.aux(m, p, q), self.nxt(m, p, q)
                actions = [
                    Sel(p, pq, label),
                    Start(p, pq1),
                    *tell(p, pq, pq1),
                    Com(pq, NameLit(q), pq1),
                    Com(pq, NameLit(pq1), q),
                    Sel(pq, q, label),
                ]
                return actions, m | {(p, q): m[(p, q)] + 1}
        raise TypeError(eta)

    def _pairs_for(self, params: tuple[str, ...]) -> list[tuple[str, str]]:
        return self.global_pairs if self.use_global else ordered_pairs(params)

    def _arg(self, name: str, args: tuple[str, ...], params: tuple[str, ...]) -> str:
        if self.use_global:
            return name
        return dict(zip(params, args)).get(name, name)


def _started(c: Choreography) -> set[str]:
    return set(start_children(c))


def encode_async_report(c: Choreography, mode_in: CalculusMode) -> EncodingResult:
    validate(c, mode_in)
    if not is_alpha_apart(c):
        raise TransformError("not-alpha-renamed",
                             "bound names are not distinct; alpha-rename first")
    top = sorted(free_pn(c))
    pairs = ordered_pairs(top)
    enc = _Encoder(mode_in, pairs)
    enc.channels_created = len(pairs)
    init: list[Eta] = []
    for p, q in pairs:
        init.append(Start(p, channel(p, q, 0)))
        init.extend(tell(p, q, channel(p, q, 0)))
    body = enc.encode(c, {pair: 0 for pair in pairs}, {})
    out_mode = async_output_mode(mode_in)
    report = EncodingReport(source_processes=tuple(top),
                            channels_created=enc.channels_created,
                            procedures_rewritten=enc.procedures)
    result = seq(init, body)
    validate(result, out_mode)
    return EncodingResult(result, out_mode, report)


def encode_async(c: Choreography, mode_in: CalculusMode) -> Choreography:
    return encode_async_report(c, mode_in).choreography


# ---------------------------------------------------------------------------
# Selection elimination

def selection_buffer(receiver: str) -> str:
    return f"{receiver}$sel"


def elim_output_mode(mode_in: CalculusMode) -> CalculusMode:
    return CalculusMode.MC if mode_in in (CalculusMode.MC, CalculusMode.CC) \
        else CalculusMode.DMC


def label_codes(c: Choreography) -> dict[str, int]:
    """Injective label -> integer assignment in first-occurrence order."""
    codes: dict[str, int] = {}

    def walk(node: Choreography) -> None:
        match node:
            case Prefix(Sel(_, _, label), cont):
                codes.setdefault(label, len(codes))
                walk(cont)
            case Prefix(_, cont):
                walk(cont)
            case Cond(_, _, t, e):
                walk(t)
                walk(e)
            case Def(_, _, body, cont):
                walk(body)
                walk(cont)
            case _:
                pass

    walk(c)
    return codes


def eliminate_selections(c: Choreography, mode_in: CalculusMode) -> Choreography:
    """Rewrite every selection into a value communication to a buffer process."""
    codes = label_codes(c)
    if not codes:
        return c
    sel_edges: list[tuple[str, str]] = []  # (sender, receiver), first occurrence

    def collect(node: Choreography) -> None:
        match node:
            case Prefix(Sel(s, r, _), cont):
                if (s, r) not in sel_edges:
                    sel_edges.append((s, r))
                collect(cont)
            case Prefix(_, cont):
                collect(cont)
            case Cond(_, _, t, e):
                collect(t)
                collect(e)
            case Def(_, _, body, cont):
                collect(body)
                collect(cont)
            case _:
                pass

    collect(c)

    def rewrite(node: Choreography) -> Choreography:
        match node:
            case Nil() | Call():
                return node
            case Prefix(Sel(s, r, label), cont):
                return Prefix(Com(s, IntLit(codes[label]), selection_buffer(r)),
                              rewrite(cont))
            case Prefix(eta, cont):
                return Prefix(eta, rewrite(cont))
            case Cond(left, right, t, e):
                return Cond(left, right, rewrite(t), rewrite(e))
            case Def(name, params, body, cont):
                return Def(name, params, rewrite(body), rewrite(cont))
        raise TypeError(node)

    out = rewrite(c)
    if elim_output_mode(mode_in).allows_dynamic:
        preamble: list[Eta] = []
        seen: list[str] = []
        for _, r in sel_edges:
            if r not in seen:
                seen.append(r)
                preamble.append(Start(r, selection_buffer(r)))
        for s, r in sel_edges:
            preamble.extend(tell(r, s, selection_buffer(r)))
        out = seq(preamble, out)
    return out


# ---------------------------------------------------------------------------
# Static connectivity check

@dataclass
class ConnectivityViolation:
    description: str


@dataclass
class _DefInfo:
    params: tuple[str, ...]
    body: Choreography
    env: dict


def check_wellformed(c: Choreography, g0: Graph) -> list[ConnectivityViolation]:
    """Abstract interpretation of the connection graph along all paths.

    Conditional branches are both explored; procedure bodies are analysed at
    the intersection (must-know) of the knowledge available at their call
    sites.  Returns one violation per interaction whose graph premise cannot
    be guaranteed.
    """
    globals_ = free_pn(c)
    entry: dict[int, set[tuple[str, str]] | None] = {}
    infos: dict[int, _DefInfo] = {}
    dirty = True

    def sim_eta(eta: Eta, g: set, report: list | None, pos: list[int]) -> None:
        def need(ok: bool, why: str) -> None:
            if not ok and report is not None:
                report.append(ConnectivityViolation(
                    f"action {pos[0]}: {_fmt_eta(eta)}: {why}"))

        match eta:
            case Start(p, q):
                g |= {(p, q), (q, p)}
            case Com(p, NameLit(r), q):
                need((p, q) in g and (q, p) in g,
                     f"{p} and {q} do not mutually know each other")
                need((p, r) in g, f"{p} does not know {r}")
                g |= {(q, r), (r, q)}
            case Com(p, _, q) | Sel(p, q, _):
                need((p, q) in g and (q, p) in g,
                     f"{p} and {q} do not mutually know each other")
        pos[0] += 1

    def sim(node: Choreography, g: set, env: dict, report: list | None,
            pos: list[int]) -> None:
        nonlocal dirty
        match node:
            case Nil():
                return
            case Prefix(eta, cont):
                sim_eta(eta, g, report, pos)
                sim(cont, g, env, report, pos)
            case Cond(left, right, t, e):
                if report is not None and not (
                        (left, right) in g and (right, left) in g):
                    report.append(ConnectivityViolation(
                        f"action {pos[0]}: if {left} <-> {right}: "
                        f"processes do not mutually know each other"))
                pos[0] += 1
                sim(t, set(g), env, report, pos)
                sim(e, set(g), env, report, pos)
            case Def(name, params, body, cont):
                key = id(node)
                infos.setdefault(key, _DefInfo(params, body, env | {name: key}))
                sim(cont, g, env | {name: key}, report, pos)
            case Call(name, args):
                if name not in env:
                    return
                key = env[name]
                info = infos[key]
                amap = {gl: gl for gl in globals_}
                amap.update(zip(args, info.params))
                proj = {(amap[x], amap[y]) for x, y in g
                        if x in amap and y in amap}
                prev = entry.get(key)
                new = proj if prev is None else prev & proj
                if new != prev:
                    entry[key] = new
                    dirty = True

    # fixpoint over procedure entry graphs
    rounds = 0
    while dirty and rounds < 100:
        dirty = False
        rounds += 1
        sim(c, set(g0), {}, None, [0])
        for key, g in list(entry.items()):
            if g is not None:
                info = infos[key]
                sim(info.body, set(g), info.env, None, [0])

    # reporting pass at the stabilised entry graphs
    report: list[ConnectivityViolation] = []
    sim(c, set(g0), {}, report, [0])
    for key, g in entry.items():
        if g is not None:
            info = infos[key]
            sim(info.body, set(g), info.env, report, [0])
    return report
