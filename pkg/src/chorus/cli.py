"""Command-line front end.

Subcommands compose as shell pipelines: every ``encode`` output re-parses in
its declared output mode, ``-`` means stdin/stdout, and ``check`` follows the
exit-code contract 0 = ok, 1 = violation or failure, 2 = inconclusive or
usage error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from collections import deque

from .corpus import corpus as corpus_programs
from .explorer import (
    DEFAULT_DEPTH, DEFAULT_NODE_LIMIT, CheckResult, INCONCLUSIVE, OK,
    StateSpace, check_eventual_delivery, check_no_added_behavior,
    check_progress, explore, fifo_per_pair,
)
from .runtime import (
    Configuration, format_value, initial_config, parse_value_literal,
)
from .semantics import (
    Outcome, Redex, TraceEvent, apply_redex, enabled_redexes, first_scheduler,
    is_terminated, random_scheduler, run,
)
from .syntax import (
    CalculusMode, ParseError, bound_names, free_pn, parse_program, pretty_print,
)
from .transform import (
    TransformError, async_output_mode, elim_output_mode, encode_async_report,
    eliminate_selections,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INCONCLUSIVE = 2


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as f:
        return f.read()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)


def _parse_state(spec: str | None) -> dict:
    out = {}
    if spec:
        for item in spec.split(","):
            if "=" not in item:
                raise ValueError(f"bad state entry {item!r}, expected name=value")
            name, value = item.split("=", 1)
            out[name.strip()] = parse_value_literal(value)
    return out


def _scheduler(spec: str | None):
    if spec is None:
        seed = os.environ.get("CHORUS_SEED")
        return random_scheduler(int(seed)) if seed else first_scheduler
    if spec == "first":
        return first_scheduler
    if spec.startswith("random:"):
        return random_scheduler(int(spec.split(":", 1)[1]))
    if spec == "random":
        return random_scheduler(0)
    raise ValueError(f"unknown scheduler {spec!r}")


def _load(path: str, mode_flag: str | None):
    text = _read(path)
    mode = CalculusMode(mode_flag) if mode_flag else None
    return parse_program(text, mode)


def _event_json(step: int, event: TraceEvent) -> str:
    d = event.description
    fields = {}
    for f in dataclasses.fields(d):
        v = getattr(d, f.name)
        fields[f.name] = format_value(v) if not isinstance(v, (str, bool, int)) else v
    return json.dumps({
        "step": step,
        "kind": event.redex.kind,
        "path": list(event.redex.path),
        "event": type(d).__name__,
        **fields,
    })


def _event_text(step: int, event: TraceEvent) -> str:
    d = event.description
    detail = " ".join(
        f"{f.name}={format_value(v) if not isinstance(v, (str, bool, int)) else v}"
        for f in dataclasses.fields(d) for v in [getattr(d, f.name)])
    return f"STEP {step} {event.redex.kind} {detail}"


def _print_trace(trace: list[TraceEvent], fmt: str) -> None:
    for i, event in enumerate(trace):
        line = _event_json(i, event) if fmt == "json" else _event_text(i, event)
        print(line)


def _print_final(cfg: Configuration, outcome: Outcome) -> None:
    print(f"-- {outcome.value}")
    for name, value in cfg.state:
        print(f"{name} = {format_value(value)}")


# ---------------------------------------------------------------------------
# Subcommands

def cmd_parse(args) -> int:
    chor, mode = _load(args.file, args.mode)
    print(f"// mode {mode.value}")
    print(pretty_print(chor))
    return EXIT_OK


def cmd_run(args) -> int:
    chor, mode = _load(args.file, args.mode)
    cfg = initial_config(chor, mode, _parse_state(args.state))
    if args.replay:
        return _replay(cfg, args)
    result = run(cfg, _scheduler(args.scheduler), args.max_steps)
    _print_trace(result.trace, args.trace_format)
    _print_final(result.final, result.outcome)
    return EXIT_OK if result.outcome == Outcome.TERMINATED else EXIT_VIOLATION


def _replay(cfg: Configuration, args) -> int:
    trace = []
    for line in _read(args.replay).splitlines():
        line = line.strip()
        if line:
            trace.append(json.loads(line))
    for i, entry in enumerate(trace):
        wanted = (tuple(entry["path"]), entry["kind"])
        match = [r for r in enabled_redexes(cfg)
                 if (r.path, r.kind) == wanted]
        if not match:
            print(f"replay failed at step {i}: no enabled redex at "
                  f"path={entry['path']} kind={entry['kind']}", file=sys.stderr)
            return EXIT_VIOLATION
        cfg, event = apply_redex(cfg, match[0])
        _print_trace([event], args.trace_format) if args.verbose else None
    outcome = Outcome.TERMINATED if is_terminated(cfg.chor) else (
        Outcome.STUCK if not enabled_redexes(cfg) else Outcome.STEP_LIMIT)
    _print_final(cfg, outcome)
    return EXIT_OK


def cmd_encode(args) -> int:
    chor, mode = _load(args.file, args.mode)
    if args.do_async:
        result = encode_async_report(chor, mode)
        out_chor, out_mode = result.choreography, result.mode
        if args.report:
            print(json.dumps({
                "source_processes": list(result.report.source_processes),
                "channels_created": result.report.channels_created,
                "procedures_rewritten": [
                    list(x) for x in result.report.procedures_rewritten],
                "output_mode": out_mode.value,
            }), file=sys.stderr)
    else:
        out_chor = eliminate_selections(chor, mode)
        out_mode = elim_output_mode(mode)
    _write(args.output, f"#mode {out_mode.value}\n{pretty_print(out_chor)}\n")
    return EXIT_OK


def _trace_to_node(space: StateSpace, target) -> list[TraceEvent]:
    """Shortest event path from the root to ``target``."""
    parent: dict = {space.root: None}
    queue = deque([space.root])
    while queue:
        key = queue.popleft()
        if key == target:
            break
        for event, dst in space.edges[key]:
            if dst not in parent:
                parent[dst] = (key, event)
                queue.append(dst)
    events: list[TraceEvent] = []
    key = target
    while parent.get(key) is not None:
        key, event = parent[key]
        events.append(event)
    return list(reversed(events))


def _dump_counterexample(space: StateSpace, result: CheckResult, path: str) -> None:
    detail = result.details[0]
    node = detail if detail in space.nodes else detail[1]
    if node not in space.nodes:
        return
    events = _trace_to_node(space, node)
    with open(path, "w", encoding="utf-8") as f:
        for i, event in enumerate(events):
            f.write(_event_json(i, event) + "\n")


def cmd_check(args) -> int:
    chor, mode = _load(args.file, args.mode)
    cfg = initial_config(chor, mode, _parse_state(args.state))
    source_pn = {p for p in free_pn(chor) | frozenset(bound_names(chor))
                 if "$" not in p}

    if args.no_added_behavior:
        encoded = encode_async_report(chor, mode)
        enc_cfg = initial_config(encoded.choreography, encoded.mode,
                                 _parse_state(args.state))
        result = check_no_added_behavior(cfg, enc_cfg, depth=args.depth,
                                         node_limit=args.nodes)
        space = None
    else:
        space = explore(cfg, depth=args.depth, node_limit=args.nodes)
        if args.progress:
            result = check_progress(space)
        elif args.delivery:
            result = check_eventual_delivery(space, source_pn)
        else:
            result = fifo_per_pair(space, source_pn)

    name = ("progress" if args.progress else "delivery" if args.delivery
            else "fifo" if args.fifo else "no-added-behavior")
    print(f"{name}: {result.status}")
    if space is not None:
        if args.plot:
            from .report import render_state_space
            render_state_space(space, args.plot, title=f"{name}: {result.status}")
        if result.details and args.dump_trace:
            _dump_counterexample(space, result, args.dump_trace)
    if result.status == OK:
        return EXIT_OK
    return EXIT_INCONCLUSIVE if result.status == INCONCLUSIVE else EXIT_VIOLATION


def cmd_repl(args) -> int:
    chor, mode = _load(args.file, args.mode)
    cfg = initial_config(chor, mode, _parse_state(args.state))
    step = 0
    while True:
        print(pretty_print(cfg.chor))
        print("state:", ", ".join(
            f"{p}={format_value(v)}" for p, v in cfg.state))
        redexes = enabled_redexes(cfg)
        if not redexes:
            outcome = "terminated" if is_terminated(cfg.chor) else "stuck"
            print(f"-- {outcome}")
            return EXIT_OK if outcome == "terminated" else EXIT_VIOLATION
        for i, r in enumerate(redexes):
            print(f"  [{i}] {r.kind} at {'/'.join(r.path) or 'top'}")
        try:
            choice = input("redex (index, or q to quit)> ").strip()
        except EOFError:
            return EXIT_OK
        if choice in ("q", "quit", "exit"):
            return EXIT_OK
        if not choice.isdigit() or int(choice) >= len(redexes):
            print("pick one of the listed indices", file=sys.stderr)
            continue
        cfg, event = apply_redex(cfg, redexes[int(choice)])
        print(_event_text(step, event))
        step += 1


def cmd_corpus(args) -> int:
    from .report import CorpusRow, render_corpus_summary, write_corpus_table
    rows = []
    failed = 0
    for prog in corpus_programs():
        t0 = time.time()
        cfg = prog.initial()
        space = explore(cfg, depth=args.depth, node_limit=args.nodes)
        progress = check_progress(space)
        result = run(cfg, max_steps=10_000)
        status = progress.status
        if result.outcome != Outcome.TERMINATED:
            status = "violation"
        if status != OK:
            failed += 1
        rows.append(CorpusRow(
            name=prog.name, mode=prog.mode.value, processes=prog.processes,
            communications=prog.communications, nodes=len(space.nodes),
            outcome=result.outcome.value, status=status))
        print(f"{prog.name:20s} {prog.mode.value:4s} "
              f"{'PASS' if status == OK else 'FAIL':4s} "
              f"nodes={len(space.nodes):5d} {time.time()-t0:.2f}s")
    if args.report_dir:
        os.makedirs(args.report_dir, exist_ok=True)
        table = os.path.join(args.report_dir, "corpus.tsv")
        with open(table, "w", encoding="utf-8") as f:
            write_corpus_table(rows, f)
        render_corpus_summary(rows, os.path.join(args.report_dir, "corpus.png"))
        print(f"report written to {args.report_dir}", file=sys.stderr)
    print(f"{len(rows) - failed}/{len(rows)} passed")
    return EXIT_OK if failed == 0 else EXIT_VIOLATION


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="chorus",
        description="workbench for core and dynamic choreographies")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="choreography file, or - for stdin")
        p.add_argument("--mode", choices=[m.value for m in CalculusMode],
                       help="calculus mode (overrides the #mode pragma)")

    p = sub.add_parser("parse", help="parse and validate a choreography")
    common(p)
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("run", help="execute under a scheduling policy")
    common(p)
    p.add_argument("--scheduler", help="first | random:SEED")
    p.add_argument("--state", help="initial values, e.g. a=5,b=title")
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--trace-format", choices=["text", "json"], default="text")
    p.add_argument("--replay", metavar="TRACE",
                   help="replay a JSON trace file instead of scheduling")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("encode", help="apply a source-to-source transformation")
    common(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--async", dest="do_async", action="store_true",
                   help="asynchrony encoding")
    g.add_argument("--elim-sel", dest="do_async", action="store_false",
                   help="selection elimination")
    p.add_argument("--report", action="store_true",
                   help="emit the encoding report as JSON on stderr")
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.set_defaults(fn=cmd_encode)

    p = sub.add_parser("check", help="explore exhaustively and run an oracle")
    common(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--progress", action="store_true")
    g.add_argument("--delivery", action="store_true")
    g.add_argument("--fifo", action="store_true")
    g.add_argument("--no-added-behavior", action="store_true")
    p.add_argument("--state", help="initial values, e.g. a=5,b=title")
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    p.add_argument("--nodes", type=int, default=DEFAULT_NODE_LIMIT)
    p.add_argument("--plot", metavar="PNG",
                   help="render the explored state space to an image")
    p.add_argument("--dump-trace", metavar="FILE",
                   help="write a replayable trace to the first counterexample")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("repl", help="step interactively through the redexes")
    common(p)
    p.add_argument("--state", help="initial values")
    p.set_defaults(fn=cmd_repl)

    p = sub.add_parser("corpus", help="run the bundled program suite")
    p.add_argument("--depth", type=int, default=200)
    p.add_argument("--nodes", type=int, default=DEFAULT_NODE_LIMIT)
    p.add_argument("--report-dir", help="write TSV table and figures here")
    p.set_defaults(fn=cmd_corpus)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, TransformError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
