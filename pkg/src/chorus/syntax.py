"""Syntax of the four choreography calculi: AST, parser, pretty-printer.

The language hierarchy is MC < CC, MC < DMC < DCC, CC < DCC.  MC has value
communications, conditionals and parameterless recursion; CC adds label
selection; the dynamic calculi add process spawning, name mobility and
parametrised procedures.

Process names are plain strings.  User-written names never contain ``$``;
every machine-generated name (auxiliary channels, runtime spawns) contains at
least one ``$``, so the two namespaces cannot collide.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Union


class CalculusMode(enum.Enum):
    MC = "MC"
    CC = "CC"
    DMC = "DMC"
    DCC = "DCC"

    @property
    def allows_selection(self) -> bool:
        return self in (CalculusMode.CC, CalculusMode.DCC)

    @property
    def allows_dynamic(self) -> bool:
        """Whether spawning, name mobility and procedure parameters are legal."""
        return self in (CalculusMode.DMC, CalculusMode.DCC)


class ParseError(Exception):
    def __init__(self, msg: str, line: int | None = None, col: int | None = None):
        self.line, self.col = line, col
        if line is not None:
            msg = f"{line}:{col}: {msg}"
        super().__init__(msg)


class ModeError(ParseError):
    """A construct that is not part of the requested calculus."""


class ArityError(ParseError):
    """Procedure call that is unbound or disagrees with its definition."""


def is_machine_name(name: str) -> bool:
    return "$" in name


_USER_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


# ---------------------------------------------------------------------------
# Expressions

@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class AtomLit:
    value: str


@dataclass(frozen=True)
class NameLit:
    name: str


@dataclass(frozen=True)
class SelfRef:
    """The ``*`` placeholder for the sender's own value."""


SELF = SelfRef()


@dataclass(frozen=True)
class BinOp:
    op: str  # '+' or '-'
    left: "Expr"
    right: "Expr"


Expr = Union[IntLit, AtomLit, NameLit, SelfRef, BinOp]


def expr_names(e: Expr) -> frozenset[str]:
    match e:
        case NameLit(name):
            return frozenset({name})
        case BinOp(_, left, right):
            return expr_names(left) | expr_names(right)
        case _:
            return frozenset()


# ---------------------------------------------------------------------------
# Interactions

@dataclass(frozen=True)
class Com:
    sender: str
    expr: Expr
    receiver: str


@dataclass(frozen=True)
class Sel:
    sender: str
    receiver: str
    label: str


@dataclass(frozen=True)
class Start:
    parent: str
    child: str


Eta = Union[Com, Sel, Start]


def eta_pn(eta: Eta) -> frozenset[str]:
    match eta:
        case Com(sender, expr, receiver):
            return frozenset({sender, receiver}) | expr_names(expr)
        case Sel(sender, receiver, _):
            return frozenset({sender, receiver})
        case Start(parent, child):
            return frozenset({parent, child})
    raise TypeError(eta)


# ---------------------------------------------------------------------------
# Choreographies

@dataclass(frozen=True)
class Nil:
    pass


NIL = Nil()


@dataclass(frozen=True)
class Prefix:
    action: Eta
    cont: "Choreography"


@dataclass(frozen=True)
class Cond:
    left: str
    right: str
    then_branch: "Choreography"
    else_branch: "Choreography"


@dataclass(frozen=True)
class Def:
    name: str
    params: tuple[str, ...]
    body: "Choreography"
    cont: "Choreography"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[str, ...]


Choreography = Union[Nil, Prefix, Cond, Def, Call]


def seq(actions: Iterable[Eta], tail: Choreography = NIL) -> Choreography:
    """Chain a list of interactions in front of a continuation."""
    out = tail
    for eta in reversed(list(actions)):
        out = Prefix(eta, out)
    return out


def tell(p: str, q: str, r: str) -> list[Eta]:
    """Expansion of the sugar ``p: q <-> r`` into its two introductions."""
    return [Com(p, NameLit(q), r), Com(p, NameLit(r), q)]


def pn(c: Choreography) -> frozenset[str]:
    """All process names occurring syntactically in ``c``, binders included."""
    match c:
        case Nil():
            return frozenset()
        case Prefix(eta, cont):
            return eta_pn(eta) | pn(cont)
        case Cond(left, right, then_branch, else_branch):
            return frozenset({left, right}) | pn(then_branch) | pn(else_branch)
        case Def(_, params, body, cont):
            return frozenset(params) | pn(body) | pn(cont)
        case Call(_, args):
            return frozenset(args)
    raise TypeError(c)


def free_pn(c: Choreography, bound: frozenset[str] = frozenset()) -> frozenset[str]:
    """Process names of ``c`` that are not bound by a Start child or Def param."""
    match c:
        case Nil():
            return frozenset()
        case Prefix(Start(parent, child), cont):
            free = frozenset() if parent in bound else frozenset({parent})
            return free | free_pn(cont, bound | {child})
        case Prefix(eta, cont):
            return (eta_pn(eta) - bound) | free_pn(cont, bound)
        case Cond(left, right, then_branch, else_branch):
            return ((frozenset({left, right}) - bound)
                    | free_pn(then_branch, bound) | free_pn(else_branch, bound))
        case Def(_, params, body, cont):
            return free_pn(body, bound | frozenset(params)) | free_pn(cont, bound)
        case Call(_, args):
            return frozenset(args) - bound
    raise TypeError(c)


def start_children(c: Choreography) -> frozenset[str]:
    """Idents bound by a Start anywhere inside ``c``."""
    match c:
        case Nil() | Call():
            return frozenset()
        case Prefix(eta, cont):
            own = frozenset({eta.child}) if isinstance(eta, Start) else frozenset()
            return own | start_children(cont)
        case Cond(_, _, t, e):
            return start_children(t) | start_children(e)
        case Def(_, _, body, cont):
            return start_children(body) | start_children(cont)
    raise TypeError(c)


def bound_names(c: Choreography) -> list[str]:
    """All binder occurrences (Def params and Start children), in preorder."""
    out: list[str] = []

    def walk(node: Choreography) -> None:
        match node:
            case Prefix(eta, cont):
                if isinstance(eta, Start):
                    out.append(eta.child)
                walk(cont)
            case Cond(_, _, t, e):
                walk(t)
                walk(e)
            case Def(_, params, body, cont):
                out.extend(params)
                walk(body)
                walk(cont)
            case _:
                pass

    walk(c)
    return out


# ---------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_$]*\$?[A-Za-z0-9_$]*)
  | (?P<arrow2><->)
  | (?P<arrow>->)
  | (?P<sym>[.;:,(){}\[\]+*=-])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"if", "then", "else", "def", "in", "start"}


@dataclass(frozen=True)
class _Tok:
    kind: str  # 'int' | 'ident' | 'kw' | symbol text | 'eof'
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        lexeme = m.group(0)
        if m.lastgroup == "int":
            toks.append(_Tok("int", lexeme, line, col))
        elif m.lastgroup == "ident":
            kind = "kw" if lexeme in _KEYWORDS else "ident"
            toks.append(_Tok(kind, lexeme, line, col))
        elif m.lastgroup in ("arrow", "arrow2", "sym"):
            toks.append(_Tok(lexeme, lexeme, line, col))
        nl = lexeme.count("\n")
        if nl:
            line += nl
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser
#
# Bare identifiers in expression position are provisional: they resolve to a
# NameLit when the program is in a dynamic mode and the identifier occurs
# somewhere as a participant, otherwise to an atom.  This lets `a.title -> s`
# keep `title` as an atom while `p.q -> r` introduces `q` when `q` is a real
# process.

@dataclass(frozen=True)
class _Ident:
    """Unresolved bare identifier in an expression."""
    name: str
    forced: bool = False  # tell-sugar payloads are always process names


class _Parser:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.pos = 0

    def peek(self, off: int = 0) -> _Tok:
        return self.toks[min(self.pos + off, len(self.toks) - 1)]

    def next(self) -> _Tok:
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Tok:
        tok = self.peek()
        if tok.kind != kind and tok.text != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text or 'end of input'!r}",
                             tok.line, tok.col)
        return self.next()

    def fail(self, msg: str):
        tok = self.peek()
        raise ParseError(msg, tok.line, tok.col)

    # -- choreographies ----------------------------------------------------

    def parse_chor(self) -> Choreography:
        tok = self.peek()
        if tok.kind == "int" and tok.text == "0":
            self.next()
            return NIL
        if tok.kind == "kw" and tok.text == "if":
            return self.parse_cond()
        if tok.kind == "kw" and tok.text == "def":
            return self.parse_def()
        if tok.kind == "ident":
            nxt = self.peek(1)
            if nxt.kind in (".", "->", ":") or (nxt.kind == "kw" and nxt.text == "start"):
                return self.parse_eta_prefix()
            return self.parse_call()
        self.fail(f"expected a choreography, found {tok.text or 'end of input'!r}")

    def parse_cond(self) -> Choreography:
        self.expect("kw")  # if
        left = self.expect("ident").text
        self.expect("<->")
        right = self.expect("ident").text
        then_kw = self.expect("kw")
        if then_kw.text != "then":
            raise ParseError("expected 'then'", then_kw.line, then_kw.col)
        self.expect("{")
        then_branch = self.parse_chor()
        self.expect("}")
        else_kw = self.expect("kw")
        if else_kw.text != "else":
            raise ParseError("expected 'else'", else_kw.line, else_kw.col)
        self.expect("{")
        else_branch = self.parse_chor()
        self.expect("}")
        return Cond(left, right, then_branch, else_branch)

    def parse_def(self) -> Choreography:
        self.expect("kw")  # def
        name = self.expect("ident").text
        params: tuple[str, ...] = ()
        if self.peek().kind == "(":
            params = self.parse_name_list()
        self.expect("=")
        self.expect("{")
        body = self.parse_chor()
        self.expect("}")
        in_kw = self.expect("kw")
        if in_kw.text != "in":
            raise ParseError("expected 'in'", in_kw.line, in_kw.col)
        cont = self.parse_chor()
        return Def(name, params, body, cont)

    def parse_call(self) -> Choreography:
        name = self.expect("ident").text
        args: tuple[str, ...] = ()
        if self.peek().kind == "(":
            args = self.parse_name_list()
        return Call(name, args)

    def parse_name_list(self) -> tuple[str, ...]:
        self.expect("(")
        names = [self.expect("ident").text]
        while self.peek().kind == ",":
            self.next()
            names.append(self.expect("ident").text)
        self.expect(")")
        return tuple(names)

    def parse_eta_prefix(self) -> Choreography:
        p = self.expect("ident").text
        tok = self.peek()
        if tok.kind == ".":
            self.next()
            expr = self.parse_expr()
            self.expect("->")
            q = self.expect("ident").text
            etas: list[Eta] = [Com(p, expr, q)]
        elif tok.kind == "->":
            self.next()
            q = self.expect("ident").text
            self.expect("[")
            label = self.expect("ident").text
            self.expect("]")
            etas = [Sel(p, q, label)]
        elif tok.kind == "kw" and tok.text == "start":
            self.next()
            q = self.expect("ident").text
            etas = [Start(p, q)]
        elif tok.kind == ":":
            self.next()
            q = self.expect("ident").text
            self.expect("<->")
            r = self.expect("ident").text
            # sugar: p tells q and r about each other
            etas = [Com(p, _Ident(q, True), r), Com(p, _Ident(r, True), q)]  # type: ignore[arg-type]
        else:
            self.fail("expected an interaction")
        self.expect(";")
        cont = self.parse_chor()
        return seq(etas, cont)

    # -- expressions -------------------------------------------------------

    def parse_expr(self) -> Expr:
        left = self.parse_term()
        while self.peek().kind in ("+", "-"):
            op = self.next().kind
            right = self.parse_term()
            left = BinOp(op, left, right)
        return left

    def parse_term(self) -> Expr:
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            return IntLit(int(tok.text))
        if tok.kind == "-":
            self.next()
            lit = self.expect("int")
            return IntLit(-int(lit.text))
        if tok.kind == "*":
            self.next()
            return SELF
        if tok.kind == "ident":
            self.next()
            return _Ident(tok.text)  # type: ignore[return-value]
        if tok.kind == "(":
            self.next()
            expr = self.parse_expr()
            self.expect(")")
            return expr
        self.fail("expected an expression")


def _participants(c: Choreography) -> frozenset[str]:
    """Names occurring in participant position (not expression payloads)."""
    match c:
        case Nil():
            return frozenset()
        case Prefix(eta, cont):
            match eta:
                case Com(sender, _, receiver):
                    own = frozenset({sender, receiver})
                case Sel(sender, receiver, _):
                    own = frozenset({sender, receiver})
                case Start(parent, child):
                    own = frozenset({parent, child})
            return own | _participants(cont)
        case Cond(left, right, t, e):
            return frozenset({left, right}) | _participants(t) | _participants(e)
        case Def(_, params, body, cont):
            return frozenset(params) | _participants(body) | _participants(cont)
        case Call(_, args):
            return frozenset(args)
    raise TypeError(c)


def _resolve(c: Choreography, participants: frozenset[str], mode: CalculusMode) -> Choreography:
    def rexpr(e) -> Expr:
        match e:
            case _Ident(name, forced):
                if forced or (mode.allows_dynamic and name in participants):
                    return NameLit(name)
                return AtomLit(name)
            case BinOp(op, left, right):
                return BinOp(op, rexpr(left), rexpr(right))
            case _:
                return e

    match c:
        case Nil():
            return c
        case Prefix(Com(s, e, r), cont):
            return Prefix(Com(s, rexpr(e), r), _resolve(cont, participants, mode))
        case Prefix(eta, cont):
            return Prefix(eta, _resolve(cont, participants, mode))
        case Cond(left, right, t, e):
            return Cond(left, right, _resolve(t, participants, mode),
                        _resolve(e, participants, mode))
        case Def(name, params, body, cont):
            return Def(name, params, _resolve(body, participants, mode),
                       _resolve(cont, participants, mode))
        case Call():
            return c
    raise TypeError(c)


# ---------------------------------------------------------------------------
# Static validation

def validate(c: Choreography, mode: CalculusMode) -> None:
    """Check the mode restrictions and structural invariants of ``c``.

    Raises ModeError for constructs outside the calculus, ArityError for
    unbound or mismatched procedure calls, ParseError for other violations.
    """

    def check_expr(e: Expr, under_op: bool) -> None:
        match e:
            case NameLit(name):
                if not mode.allows_dynamic:
                    raise ModeError(f"process-name payload {name!r} requires DMC or DCC mode")
                if under_op:
                    raise ParseError("arithmetic over process names is ill-formed")
            case BinOp(_, left, right):
                check_expr(left, True)
                check_expr(right, True)
            case _:
                pass

    def walk(node: Choreography, defs: dict[str, int]) -> None:
        match node:
            case Nil():
                return
            case Prefix(eta, cont):
                match eta:
                    case Com(sender, expr, receiver):
                        if sender == receiver:
                            raise ParseError(f"process {sender!r} cannot interact with itself")
                        check_expr(expr, False)
                    case Sel(sender, receiver, _):
                        if not mode.allows_selection:
                            raise ModeError("label selection requires CC or DCC mode")
                        if sender == receiver:
                            raise ParseError(f"process {sender!r} cannot interact with itself")
                    case Start(parent, child):
                        if not mode.allows_dynamic:
                            raise ModeError("'start' requires DMC or DCC mode")
                        if parent == child:
                            raise ParseError(f"process {parent!r} cannot start itself")
                walk(cont, defs)
            case Cond(left, right, t, e):
                if left == right:
                    raise ParseError(f"conditional compares {left!r} with itself")
                walk(t, defs)
                walk(e, defs)
            case Def(name, params, body, cont):
                if params and not mode.allows_dynamic:
                    raise ModeError("parametrised procedures require DMC or DCC mode")
                if len(set(params)) != len(params):
                    raise ParseError(f"duplicate parameter in procedure {name!r}")
                walk(body, defs | {name: len(params)})
                walk(cont, defs | {name: len(params)})
            case Call(name, args):
                if name not in defs:
                    raise ArityError(f"call to undefined procedure {name!r}")
                if defs[name] != len(args):
                    raise ArityError(
                        f"procedure {name!r} expects {defs[name]} arguments, got {len(args)}")
                if args and not mode.allows_dynamic:
                    raise ModeError("procedure arguments require DMC or DCC mode")

    walk(c, {})


# ---------------------------------------------------------------------------
# Entry points

_PRAGMA_RE = re.compile(r"^\s*#mode\s+(MC|CC|DMC|DCC)\s*$", re.MULTILINE)


def parse(text: str, mode: CalculusMode) -> Choreography:
    """Parse ``text`` and validate it for ``mode``."""
    text = _PRAGMA_RE.sub("", text)
    parser = _Parser(_tokenize(text))
    raw = parser.parse_chor()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
    c = _resolve(raw, _participants(raw), mode)
    validate(c, mode)
    return c


def pragma_mode(text: str) -> CalculusMode | None:
    m = _PRAGMA_RE.search(text)
    return CalculusMode(m.group(1)) if m else None


def parse_program(text: str, mode: CalculusMode | None = None) -> tuple[Choreography, CalculusMode]:
    """Parse a .chor source, honouring its ``#mode`` pragma unless overridden."""
    effective = mode or pragma_mode(text) or CalculusMode.DCC
    return parse(text, effective), effective


# ---------------------------------------------------------------------------
# Pretty-printer

def _fmt_expr(e: Expr, parent_op: bool = False) -> str:
    match e:
        case IntLit(v):
            return str(v) if v >= 0 or not parent_op else f"({v})"
        case AtomLit(v):
            return v
        case NameLit(name):
            return name
        case SelfRef():
            return "*"
        case BinOp(op, left, right):
            rhs = _fmt_expr(right, True) if isinstance(right, BinOp) else _fmt_expr(right, True)
            text = f"{_fmt_expr(left)} {op} {rhs}"
            return f"({text})" if parent_op else text
    raise TypeError(e)


def _fmt_eta(eta: Eta) -> str:
    match eta:
        case Com(sender, expr, receiver):
            return f"{sender}.{_fmt_expr(expr)} -> {receiver}"
        case Sel(sender, receiver, label):
            return f"{sender} -> {receiver}[{label}]"
        case Start(parent, child):
            return f"{parent} start {child}"
    raise TypeError(eta)


def pretty_print(c: Choreography, indent: int = 0) -> str:
    """Concrete syntax for ``c``; re-parsing the output yields ``c`` again."""
    pad = "  " * indent
    match c:
        case Nil():
            return pad + "0"
        case Prefix(eta, cont):
            return f"{pad}{_fmt_eta(eta)};\n{pretty_print(cont, indent)}"
        case Cond(left, right, t, e):
            return (f"{pad}if {left} <-> {right} then {{\n"
                    f"{pretty_print(t, indent + 1)}\n{pad}}} else {{\n"
                    f"{pretty_print(e, indent + 1)}\n{pad}}}")
        case Def(name, params, body, cont):
            header = name if not params else f"{name}({', '.join(params)})"
            return (f"{pad}def {header} = {{\n{pretty_print(body, indent + 1)}\n"
                    f"{pad}}} in\n{pretty_print(cont, indent)}")
        case Call(name, args):
            return pad + (name if not args else f"{name}({', '.join(args)})")
    raise TypeError(c)
