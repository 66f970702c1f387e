"""The bundled program suite.

A mix of hand-written showcase programs (the buyer/seller/bank contract and
its variants) and deterministically generated straight-line programs across
the four calculi.  Each entry records the initial-state overrides it should
be run with and enough metadata for the checks to pick their subsets.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .runtime import Configuration, Value, initial_config, parse_value_literal
from .syntax import (
    CalculusMode, Call, Choreography, Com, Cond, Def, Nil, Prefix, Sel, Start,
    parse,
)

BUYER_TEXT = """\
// book purchase among buyer a, seller s and bank b
a.title -> s;
s.price -> a;
s.price -> b;
if b <-> a then {
  b -> s[ok];
  b -> a[ok];
  s.book -> a;
  0
} else {
  b -> s[ko];
  b -> a[ko];
  0
}
"""

# Same contract, but the bank is quoted a different price, so the
# comparison fails and the purchase is abandoned.
BUYER_MISMATCH_TEXT = BUYER_TEXT.replace("s.price -> b;", "s.price2 -> b;")

BUYER_FRAGMENT_TEXT = """\
a.title -> s;
s.price -> a;
s.price -> b;
0
"""


@dataclass(frozen=True)
class CorpusProgram:
    name: str
    mode: CalculusMode
    text: str
    overrides: tuple[tuple[str, str], ...] = ()
    recursive: bool = False

    def parse(self) -> Choreography:
        return parse(self.text, self.mode)

    def override_values(self) -> dict[str, Value]:
        return {p: parse_value_literal(v) for p, v in self.overrides}

    def initial(self) -> Configuration:
        return initial_config(self.parse(), self.mode, self.override_values())

    @property
    def communications(self) -> int:
        return count_interactions(self.parse())

    @property
    def processes(self) -> int:
        from .syntax import free_pn
        return len(free_pn(self.parse()))


def count_interactions(c: Choreography) -> int:
    """Number of communication/selection actions in the program text."""
    match c:
        case Nil() | Call():
            return 0
        case Prefix(Com() | Sel(), cont):
            return 1 + count_interactions(cont)
        case Prefix(Start(), cont):
            return count_interactions(cont)
        case Cond(_, _, t, e):
            return count_interactions(t) + count_interactions(e)
        case Def(_, _, body, cont):
            return count_interactions(body) + count_interactions(cont)
    raise TypeError(c)


def _generated() -> list[CorpusProgram]:
    """Deterministic straight-line MC/CC programs over small process sets."""
    rng = random.Random(20240901)
    atoms = ["go", "ack", "data", "ping", "done"]
    out: list[CorpusProgram] = []
    specs = [
        # (mode, #processes, #actions, allow selections)
        (CalculusMode.MC, 2, 2, False),
        (CalculusMode.MC, 2, 4, False),
        (CalculusMode.MC, 3, 3, False),
        (CalculusMode.MC, 3, 4, False),
        (CalculusMode.MC, 3, 6, False),
        (CalculusMode.MC, 4, 5, False),
        (CalculusMode.MC, 4, 6, False),
        (CalculusMode.CC, 2, 3, True),
        (CalculusMode.CC, 3, 4, True),
        (CalculusMode.CC, 3, 5, True),
        (CalculusMode.CC, 4, 6, True),
        (CalculusMode.CC, 3, 6, True),
    ]
    for i, (mode, nproc, nact, sels) in enumerate(specs):
        procs = ["a", "b", "c", "d"][:nproc]
        lines = []
        for _ in range(nact):
            s, r = rng.sample(procs, 2)
            if sels and rng.random() < 0.3:
                lines.append(f"{s} -> {r}[{rng.choice(atoms)}];")
            elif rng.random() < 0.5:
                lines.append(f"{s}.{rng.randint(0, 9)} -> {r};")
            else:
                lines.append(f"{s}.{rng.choice(atoms)} -> {r};")
        text = "\n".join(lines + ["0"])
        out.append(CorpusProgram(f"gen_{mode.value.lower()}_{i:02d}", mode, text))
    return out


def _hand_written() -> list[CorpusProgram]:
    return [
        CorpusProgram("buyer", CalculusMode.CC, BUYER_TEXT),
        CorpusProgram("buyer_mismatch", CalculusMode.CC, BUYER_MISMATCH_TEXT),
        CorpusProgram("buyer_fragment", CalculusMode.MC, BUYER_FRAGMENT_TEXT),
        CorpusProgram("fifo_three", CalculusMode.MC,
                      "p.1 -> q; p.2 -> q; p.3 -> q; 0"),
        CorpusProgram("cross_pair", CalculusMode.MC,
                      "p.1 -> q; r.2 -> q; 0"),
        CorpusProgram("diamond", CalculusMode.MC,
                      "a.1 -> b; c.2 -> d; 0"),
        CorpusProgram("single_com", CalculusMode.MC, "a.1 -> b; 0"),
        CorpusProgram("echo", CalculusMode.MC,
                      "p.5 -> q; q.(* + 1) -> p; 0"),
        CorpusProgram("cond_equal", CalculusMode.MC,
                      "p.7 -> q; p.7 -> r; if q <-> r then { q.1 -> p; 0 } "
                      "else { r.2 -> p; 0 }"),
        CorpusProgram("cond_diff", CalculusMode.MC,
                      "p.7 -> q; p.8 -> r; if q <-> r then { q.1 -> p; 0 } "
                      "else { r.2 -> p; 0 }"),
        CorpusProgram("loop_mc", CalculusMode.MC,
                      "def X = { if p <-> q then { 0 } "
                      "else { r.1 -> q; X } } in X",
                      overrides=(("p", "1"),), recursive=True),
        CorpusProgram("sel_simple", CalculusMode.CC,
                      "p -> q[go]; p.5 -> q; 0"),
        CorpusProgram("sel_branch", CalculusMode.CC,
                      "if p <-> q then { p -> q[left]; q.1 -> p; 0 } "
                      "else { p -> q[right]; 0 }"),
        CorpusProgram("loop_cc", CalculusMode.CC,
                      "def X = { if p <-> q then { p -> q[stop]; 0 } "
                      "else { p.7 -> q; X } } in X",
                      overrides=(("p", "7"),), recursive=True),
        CorpusProgram("start_dmc", CalculusMode.DMC,
                      "p start w; p.5 -> w; w.(* + 1) -> p; 0"),
        CorpusProgram("intro_dmc", CalculusMode.DMC,
                      "p start w; p: w <-> q; w.7 -> q; 0"),
        CorpusProgram("loop_dmc", CalculusMode.DMC,
                      "def X(s, t) = { if s <-> t then { 0 } "
                      "else { s.1 -> t; X(s, t) } } in X(p, q)",
                      overrides=(("p", "1"),), recursive=True),
        CorpusProgram("tell_dcc", CalculusMode.DCC,
                      "p start w; p: w <-> q; q -> w[hi]; w.1 -> q; 0"),
        CorpusProgram("sel_dcc", CalculusMode.DCC,
                      "p start w; p -> q[go]; q.2 -> p; 0"),
    ]


def corpus() -> list[CorpusProgram]:
    return _hand_written() + _generated()


def by_name(name: str) -> CorpusProgram:
    for prog in corpus():
        if prog.name == name:
            return prog
    raise KeyError(name)
