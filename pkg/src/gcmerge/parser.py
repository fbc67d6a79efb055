"""Concrete syntax for choreographies (``.gc``) and protocol files (``.gt``).

Choreography grammar::

    C   ::= "0" | eta [";" C] | "if" E "@" t "then" C "else" C
          | "rec" X "{" C "}" | X | "(" "new" k ")" C
    eta ::= "start" t[R] ("," t[R])+ "on" a "as" k
          | "com" t[R] "." E "->" t[R] "." x "over" k
          | "sel" t[R] "->" t[R] ":" l "over" k

Protocol grammar::

    file ::= ("protocol" Name "{" G "}")*
    G    ::= "end" | p "->" q ":" "<" S ">" [";" G]
           | p "->" q "{" l ":" G ("," l ":" G)* "}" | "rec" t "." G | t

Expressions are atoms (literals, variables, calls, parenthesised
expressions) with at most one infix ``==``, ``+`` or ``++``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .syntax import (
    BinOp,
    BoolLit,
    Call,
    Chan,
    Choreography,
    Com,
    Cond,
    Endpoint,
    Eta,
    Expr,
    FileLit,
    FnCall,
    GlobalType,
    Inact,
    IntLit,
    Label,
    Rec,
    RecVar,
    Res,
    Role,
    Sel,
    Seq,
    Sess,
    Sort,
    Start,
    StrLit,
    TChoice,
    TCom,
    TEnd,
    Thread,
    TRec,
    TVar,
    TypeVar,
    Var,
    VarName,
)
from .terms import type_diagnostics


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, expected: frozenset[str] = frozenset(), origin: str = "<input>"):
        self.message = message
        self.line = line
        self.col = col
        self.expected = expected
        self.origin = origin
        super().__init__(str(self))

    def __str__(self) -> str:
        s = f"{self.origin}:{self.line}:{self.col}: {self.message}"
        if self.expected:
            s += f" (expected one of: {', '.join(sorted(self.expected))})"
        return s


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # ident, int, str, bytes, punct, eof
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<bytes>b"(?:[^"\\\n]|\\.)*")
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<punct>->|==|\+\+|[+(){}\[\].;,:@<>])
  | (?P<int>-?[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)

CHOREO_KEYWORDS = frozenset({"start", "com", "sel", "if", "then", "else", "rec", "new", "on", "as", "over", "true", "false"})
TYPE_KEYWORDS = frozenset({"protocol", "end", "rec"})


def tokenize(text: str, origin: str = "<input>") -> list[Token]:
    toks: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, origin=origin)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            toks.append(Token(kind, chunk, line, pos - line_start + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, keywords: frozenset[str], origin: str):
        self.toks = tokenize(text, origin)
        self.i = 0
        self.keywords = keywords
        self.origin = origin

    # -- token plumbing

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def advance(self) -> Token:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, message: str, expected=(), tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.col, frozenset(expected), self.origin)

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind in ("punct", "ident") and tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.peek().text or "end of input"
            raise self.error(f"unexpected {found!r}", [repr(text)])
        return self.advance()

    def ident(self, what: str) -> str:
        tok = self.peek()
        if tok.kind != "ident" or tok.text in self.keywords:
            found = tok.text or "end of input"
            raise self.error(f"unexpected {found!r}", [what])
        self.i += 1
        return tok.text

    def expect_eof(self) -> None:
        if self.peek().kind != "eof":
            raise self.error(f"unexpected {self.peek().text!r}", ["end of input"])

    # -- expressions

    def expr(self) -> Expr:
        left = self.atom()
        for sym, op in (("==", "eq"), ("++", "concat"), ("+", "add")):
            if self.accept(sym):
                return BinOp(op, left, self.atom())
        return left

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "int":
            self.i += 1
            return IntLit(int(tok.text))
        if tok.kind == "str":
            self.i += 1
            return StrLit(json.loads(tok.text))
        if tok.kind == "bytes":
            self.i += 1
            try:
                return FileLit(json.loads(tok.text[1:]).encode("latin-1"))
            except UnicodeEncodeError:
                raise self.error("file literal must hold 8-bit characters", tok=tok) from None
        if self.accept("true"):
            return BoolLit(True)
        if self.accept("false"):
            return BoolLit(False)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "ident" and tok.text not in self.keywords:
            self.i += 1
            if self.accept("("):
                args: list[Expr] = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.accept(","):
                        args.append(self.expr())
                self.expect(")")
                return FnCall(tok.text, tuple(args))
            return Var(VarName(tok.text))
        raise self.error(f"unexpected {tok.text or 'end of input'!r}", ["expression"])

    # -- choreographies

    def endpoint(self) -> Endpoint:
        t = self.ident("thread")
        self.expect("[")
        r = self.ident("role")
        self.expect("]")
        return Endpoint(Thread(t), Role(r))

    def eta(self) -> Eta:
        if self.accept("start"):
            parts = [self.endpoint()]
            self.expect(",")
            parts.append(self.endpoint())
            while self.accept(","):
                parts.append(self.endpoint())
            self.expect("on")
            a = self.ident("public channel")
            self.expect("as")
            k = self.ident("session")
            return Start(tuple(parts), Chan(a), Sess(k))
        if self.accept("com"):
            snd = self.endpoint()
            self.expect(".")
            e = self.expr()
            self.expect("->")
            rcv = self.endpoint()
            self.expect(".")
            x = self.ident("variable")
            self.expect("over")
            k = self.ident("session")
            return Com(snd, e, rcv, VarName(x), Sess(k))
        self.expect("sel")
        snd = self.endpoint()
        self.expect("->")
        rcv = self.endpoint()
        self.expect(":")
        lab = self.ident("label")
        self.expect("over")
        k = self.ident("session")
        return Sel(snd, rcv, Sess(k), Label(lab))

    def choreography(self) -> Choreography:
        tok = self.peek()
        if tok.kind == "int" and tok.text == "0":
            self.i += 1
            return Inact()
        if self.at("start") or self.at("com") or self.at("sel"):
            eta = self.eta()
            if self.accept(";"):
                return Seq(eta, self.choreography())
            return Seq(eta, Inact())
        if self.accept("if"):
            guard = self.expr()
            self.expect("@")
            t = self.ident("thread")
            self.expect("then")
            then = self.choreography()
            self.expect("else")
            return Cond(Thread(t), guard, then, self.choreography())
        if self.accept("rec"):
            x = self.ident("recursion variable")
            self.expect("{")
            body = self.choreography()
            self.expect("}")
            return Rec(RecVar(x), body)
        if self.accept("("):
            self.expect("new")
            k = self.ident("session")
            self.expect(")")
            return Res(Sess(k), self.choreography())
        if tok.kind == "ident" and tok.text not in self.keywords:
            self.i += 1
            return Call(RecVar(tok.text))
        raise self.error(
            f"unexpected {tok.text or 'end of input'!r}",
            ["'0'", "'start'", "'com'", "'sel'", "'if'", "'rec'", "'(new'", "recursion variable"],
        )

    # -- global types

    def global_type(self) -> GlobalType:
        if self.accept("end"):
            return TEnd()
        if self.accept("rec"):
            t = self.ident("type variable")
            self.expect(".")
            return TRec(TypeVar(t), self.global_type())
        name = self.ident("role or type variable")
        if not self.accept("->"):
            return TVar(TypeVar(name))
        q = self.ident("role")
        if self.accept(":"):
            self.expect("<")
            stok = self.peek()
            s = self.ident("sort")
            try:
                sort = Sort(s)
            except ValueError:
                raise self.error(f"unknown sort {s!r}", [x.value for x in Sort], tok=stok) from None
            self.expect(">")
            cont = self.global_type() if self.accept(";") else TEnd()
            return TCom(Role(name), Role(q), sort, cont)
        if self.accept("{"):
            branches: list[tuple[Label, GlobalType]] = []
            while True:
                ltok = self.peek()
                lab = Label(self.ident("label"))
                if any(lab == b for b, _ in branches):
                    raise self.error(f"duplicate branch label {lab}", tok=ltok)
                self.expect(":")
                branches.append((lab, self.global_type()))
                if not self.accept(","):
                    break
            self.expect("}")
            return TChoice(Role(name), Role(q), tuple(branches))
        raise self.error(f"unexpected {self.peek().text or 'end of input'!r}", ["':'", "'{'"])

    def protocols(self) -> dict[str, GlobalType]:
        out: dict[str, GlobalType] = {}
        while self.peek().kind != "eof":
            self.expect("protocol")
            ntok = self.peek()
            name = self.ident("protocol name")
            if name in out:
                raise self.error(f"duplicate protocol {name}", tok=ntok)
            self.expect("{")
            g = self.global_type()
            self.expect("}")
            diags = type_diagnostics(g)
            if diags:
                raise self.error(f"protocol {name}: {diags[0].message}", tok=ntok)
            out[name] = g
        return out


def parse_choreography(text: str, origin: str = "<input>") -> Choreography:
    p = _Parser(text, CHOREO_KEYWORDS, origin)
    c = p.choreography()
    p.expect_eof()
    return c


def parse_global_type(text: str, origin: str = "<input>") -> dict[str, GlobalType]:
    """Parse a protocols file into ``{name: type}`` in file order."""
    return _Parser(text, TYPE_KEYWORDS, origin).protocols()


def parse_type(text: str) -> GlobalType:
    """Parse a bare global type, without the ``protocol`` wrapper."""
    p = _Parser(text, TYPE_KEYWORDS, "<input>")
    g = p.global_type()
    p.expect_eof()
    diags = type_diagnostics(g)
    if diags:
        raise ParseError(diags[0].message, 1, 1)
    return g


# ---------------------------------------------------------------------------
# pretty printing


def format_expr(e: Expr, nested: bool = False) -> str:
    match e:
        case BoolLit(v):
            return "true" if v else "false"
        case IntLit(v):
            return str(v)
        case StrLit(v):
            return json.dumps(v)
        case FileLit(v):
            return "b" + json.dumps(v.decode("latin-1"))
        case Var(var):
            return var.name
        case FnCall(fn, args):
            return f"{fn}({', '.join(format_expr(a) for a in args)})"
        case BinOp(op, left, right):
            sym = {"eq": "==", "add": "+", "concat": "++"}[op]
            s = f"{format_expr(left, True)} {sym} {format_expr(right, True)}"
            return f"({s})" if nested else s
    raise TypeError(f"not an expression: {e!r}")


def format_eta(eta: Eta) -> str:
    match eta:
        case Start(parts, chan, sess):
            return f"start {', '.join(map(str, parts))} on {chan} as {sess}"
        case Com(snd, e, rcv, var, sess):
            # a top-level infix expression needs parens before "->"
            return f"com {snd}.{format_expr(e, True)} -> {rcv}.{var} over {sess}"
        case Sel(snd, rcv, sess, label):
            return f"sel {snd} -> {rcv} : {label} over {sess}"
    raise TypeError(f"not an eta: {eta!r}")


def _format_chor(c: Choreography, ind: str) -> str:
    match c:
        case Inact():
            return "0"
        case Call(var):
            return var.name
        case Seq(eta, Inact()):
            return format_eta(eta)
        case Seq(eta, cont):
            return f"{format_eta(eta)};\n{ind}{_format_chor(cont, ind)}"
        case Cond(at, guard, then, orelse):
            inner = ind + "  "
            return (
                f"if {format_expr(guard)} @ {at} then\n{inner}{_format_chor(then, inner)}\n"
                f"{ind}else\n{inner}{_format_chor(orelse, inner)}"
            )
        case Rec(var, body):
            inner = ind + "  "
            return f"rec {var} {{\n{inner}{_format_chor(body, inner)}\n{ind}}}"
        case Res(sess, body):
            return f"(new {sess}) {_format_chor(body, ind)}"
    raise TypeError(f"not a choreography: {c!r}")


def format_type(g: GlobalType) -> str:
    match g:
        case TEnd():
            return "end"
        case TVar(var):
            return var.name
        case TRec(var, body):
            return f"rec {var} . {format_type(body)}"
        case TCom(p, q, sort, TEnd()):
            return f"{p} -> {q} : <{sort}>"
        case TCom(p, q, sort, cont):
            return f"{p} -> {q} : <{sort}>; {format_type(cont)}"
        case TChoice(p, q, branches):
            inner = ", ".join(f"{lab}: {format_type(b)}" for lab, b in branches)
            return f"{p} -> {q} {{ {inner} }}"
    raise TypeError(f"not a global type: {g!r}")


def format_protocols(protocols: dict[str, GlobalType]) -> str:
    return "".join(f"protocol {name} {{ {format_type(g)} }}\n" for name, g in protocols.items())


def pretty_print(term: Choreography | GlobalType) -> str:
    if isinstance(term, (TCom, TChoice, TEnd, TRec, TVar)):
        return format_type(term)
    return _format_chor(term, "")
