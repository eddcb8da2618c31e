"""Concrete syntax for ``.act`` files: a hand-written recursive descent parser
and the canonical pretty-printer.

Grammar::

    program := method*
    method  := IDENT "(" [IDENT ("," IDENT)*] ")" block
    block   := "{" stmt+ "}"
    stmt    := IDENT ":=" rhs ";" | "await" IDENT ";" | "skip" ";"
             | "return" ["*" | "[" IDENT "]"] IDENT ";"
             | "if" "(" bexp ")" block "else" block
             | "while" "(" bexp ")" block
    rhs     := "new" | IDENT "." "get" | IDENT "!" IDENT "(" args ")"
             | IDENT "(" args ")" | vexp
    vexp    := term (("+" | "-") term)*
    term    := INT | "-" INT | IDENT | "(" vexp ")"
    bexp    := bconj ("||" bconj)* ; bconj := bneg ("&&" bneg)*
    bneg    := "!" bneg | "(" bexp ")" | vexp "==" vexp

``// ...`` comments run to the end of the line. Main gets an implicit
``return __unit;`` when its body does not already end in a return.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import source_lang as ast
from .errors import INT64_MAX, INT64_MIN, ValidationError

KEYWORDS = {"new", "get", "await", "skip", "return", "if", "else", "while"}

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+|//[^\n]*)"
    r"|(?P<int>[0-9]+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>:=|==|&&|\|\||[{}()\[\];,.!*+\-])"
)


class ActSyntaxError(SyntaxError):
    """Parse failure carrying 1-based line and column."""

    def __init__(self, msg, origin, line, col):
        super().__init__(f"{origin}:{line}:{col}: {msg}")
        self.filename = origin
        self.lineno = line
        self.offset = col
        self.line = line
        self.col = col


@dataclass(frozen=True)
class SourceText:
    text: str
    origin: str = "<inline>"


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "op", "eof"
    text: str
    pos: int


def tokenize(text: str, origin: str = "<inline>") -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            line, col = _line_col(text, pos)
            raise ActSyntaxError(f"unexpected character {text[pos]!r}", origin, line, col)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


def _line_col(text, pos):
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


class _Parser:
    def __init__(self, text, origin):
        self.text = text
        self.origin = origin
        self.tokens = tokenize(text, origin)
        self.i = 0
        self.params = ()

    # -- token plumbing

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        line, col = _line_col(self.text, tok.pos)
        raise ActSyntaxError(msg, self.origin, line, col)

    def at(self, text):
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def peek_is(self, offset, text):
        t = self.tokens[min(self.i + offset, len(self.tokens) - 1)]
        return t.kind in ("op", "ident") and t.text == text

    def expect(self, text):
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")
        self.i += 1

    def ident(self, what="identifier"):
        tok = self.tok
        if tok.kind != "ident" or tok.text in KEYWORDS:
            self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        self.i += 1
        return tok.text

    def attr(self, what="attribute"):
        tok = self.tok
        name = self.ident(what)
        if name in self.params:
            self.error(f"parameter {name!r} used where an attribute is required", tok)
        return name

    # -- declarations

    def program(self):
        methods = {}
        main = None
        while self.tok.kind != "eof":
            start = self.tok
            name, params, body = self.method()
            if name == ast.MAIN:
                if main is not None:
                    self.error("duplicate main", start)
                if params:
                    self.error("main takes no parameters", start)
                if not isinstance(ast.flatten(body)[-1], ast.Return):
                    body = ast.seq_concat(body, ast.Return(ast.UNIT_ATTR))
                main = body
            else:
                if name in methods:
                    self.error(f"duplicate method {name!r}", start)
                methods[name] = ast.MethodDecl(name, params, body)
        if main is None:
            self.error("program has no main()")
        return ast.Program(methods, main)

    def method(self):
        name = self.ident("method name")
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.ident("parameter"))
            while self.at(","):
                self.i += 1
                params.append(self.ident("parameter"))
        self.expect(")")
        self.params = tuple(params)
        body = self.block()
        self.params = ()
        return name, tuple(params), body

    def block(self):
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("unterminated block")
            stmts.append(self.stmt())
        if not stmts:
            self.error("empty block (write 'skip;')")
        self.expect("}")
        return ast.seq_of(stmts)

    # -- statements

    def stmt(self):
        tok = self.tok
        if self.at("await"):
            self.i += 1
            s = ast.Await(self.attr("future attribute"))
        elif self.at("skip"):
            self.i += 1
            s = ast.Skip()
        elif self.at("return"):
            self.i += 1
            mark = ast.UNMARKED
            if self.at("*"):
                self.i += 1
                mark = ast.STAR
            elif self.at("["):
                self.i += 1
                mark = ast.WriteBack(self.attr())
                self.expect("]")
            s = ast.Return(self.attr("returned attribute"), mark)
        elif self.at("if"):
            self.i += 1
            self.expect("(")
            cond = self.bexp()
            self.expect(")")
            then = self.block()
            self.expect("else")
            return ast.If(cond, then, self.block())
        elif self.at("while"):
            self.i += 1
            self.expect("(")
            cond = self.bexp()
            self.expect(")")
            return ast.While(cond, self.block())
        elif tok.kind == "ident" and tok.text not in KEYWORDS:
            target = self.attr("assignment target")
            self.expect(":=")
            s = self.rhs(target)
        else:
            self.error(f"expected a statement, found {tok.text or 'end of input'!r}")
        self.expect(";")
        return s

    def rhs(self, target):
        if self.at("new"):
            self.i += 1
            return ast.Assign(target, ast.New())
        if self.tok.kind == "ident" and self.tok.text not in KEYWORDS:
            if self.peek_is(1, ".") and self.peek_is(2, "get"):
                fut = self.attr("future attribute")
                self.i += 2
                return ast.Assign(target, ast.Get(fut))
            if self.peek_is(1, "!"):
                callee = self.attr("callee attribute")
                self.i += 1
                method = self.ident("method name")
                return ast.AsyncCall(target, callee, method, self.args())
            if self.peek_is(1, "("):
                method = self.ident("method name")
                return ast.Assign(target, ast.SyncCall(method, self.args()))
        return ast.Assign(target, self.vexp())

    def args(self):
        self.expect("(")
        out = []
        if not self.at(")"):
            out.append(self.attr("argument attribute"))
            while self.at(","):
                self.i += 1
                out.append(self.attr("argument attribute"))
        self.expect(")")
        return tuple(out)

    # -- expressions

    def vexp(self):
        left = self.term()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.i += 1
            right = self.term()
            left = ast.Add(left, right) if op == "+" else ast.Sub(left, right)
        return left

    def term(self):
        tok = self.tok
        if self.at("("):
            self.i += 1
            v = self.vexp()
            self.expect(")")
            return v
        negative = False
        if self.at("-"):
            self.i += 1
            negative = True
            tok = self.tok
            if tok.kind != "int":
                self.error("expected an integer literal after '-'")
        if tok.kind == "int":
            self.i += 1
            value = -int(tok.text) if negative else int(tok.text)
            if not INT64_MIN <= value <= INT64_MAX:
                self.error(f"integer literal {value} does not fit in 64 bits", tok)
            return ast.IntLit(value)
        name = self.ident("value")
        return ast.Param(name) if name in self.params else ast.Attr(name)

    def bexp(self):
        left = self.bconj()
        while self.at("||"):
            self.i += 1
            left = ast.Or(left, self.bconj())
        return left

    def bconj(self):
        left = self.bneg()
        while self.at("&&"):
            self.i += 1
            left = ast.And(left, self.bneg())
        return left

    def bneg(self):
        if self.at("!"):
            self.i += 1
            return ast.Not(self.bneg())
        if self.at("("):
            saved = self.i
            try:
                self.i += 1
                b = self.bexp()
                self.expect(")")
                return b
            except ActSyntaxError:
                # not a boolean group; reparse as a parenthesised value
                self.i = saved
        left = self.vexp()
        self.expect("==")
        return ast.Eq(left, self.vexp())


def _as_text(src):
    if isinstance(src, SourceText):
        return src.text, src.origin
    if isinstance(src, (bytes, bytearray)):
        try:
            return bytes(src).decode("utf-8"), "<bytes>"
        except UnicodeDecodeError as exc:
            raise ActSyntaxError(f"input is not UTF-8 ({exc.reason})", "<bytes>", 1, 1) from None
    return src, "<inline>"


def parse_program(src) -> ast.Program:
    """Parse and validate a program; raises ActSyntaxError or ValidationError."""
    text, origin = _as_text(src)
    p = _Parser(text, origin)
    try:
        program = p.program()
    except RecursionError:
        raise ActSyntaxError("nesting too deep", origin, 1, 1) from None
    diags = ast.validate(program)
    if diags:
        raise ValidationError(diags)
    return program


def parse_file(path) -> ast.Program:
    with open(path, encoding="utf-8") as fh:
        return parse_program(SourceText(fh.read(), str(path)))


def parse_stmt(src, params=()) -> ast.Stmt:
    """Parse a statement sequence (marked returns allowed); no validation."""
    text, origin = _as_text(src)
    p = _Parser(text, origin)
    p.params = tuple(params)
    stmts = []
    try:
        while p.tok.kind != "eof":
            stmts.append(p.stmt())
    except RecursionError:
        raise ActSyntaxError("nesting too deep", origin, 1, 1) from None
    if not stmts:
        p.error("expected a statement")
    return ast.seq_of(stmts)


# ---------------------------------------------------------------- pretty printing

def pretty_value(v, prec=0) -> str:
    if isinstance(v, (ast.Attr, ast.Param)):
        return v.name
    if isinstance(v, ast.IntLit):
        return str(v.value)
    op = "+" if isinstance(v, ast.Add) else "-"
    text = f"{pretty_value(v.left, 0)} {op} {pretty_value(v.right, 1)}"
    return f"({text})" if prec > 0 else text


def pretty_bool(b, prec=0) -> str:
    if isinstance(b, ast.Eq):
        return f"{pretty_value(b.left)} == {pretty_value(b.right)}"
    if isinstance(b, ast.Not):
        inner = b.operand
        return "!" + (pretty_bool(inner) if isinstance(inner, ast.Not) else f"({pretty_bool(inner)})")
    if isinstance(b, ast.Or):
        text = f"{pretty_bool(b.left, 0)} || {pretty_bool(b.right, 1)}"
        return f"({text})" if prec > 0 else text
    text = f"{pretty_bool(b.left, 1)} && {pretty_bool(b.right, 2)}"
    return f"({text})" if prec > 1 else text


def pretty_atom(s) -> str:
    """One-line rendering of a non-Seq statement without the trailing ';'.

    Compound statements render as their header only; this is the text used
    in trace labels.
    """
    if isinstance(s, ast.Assign):
        e = s.expr
        if isinstance(e, ast.New):
            rhs = "new"
        elif isinstance(e, ast.Get):
            rhs = f"{e.fut}.get"
        elif isinstance(e, ast.SyncCall):
            rhs = f"{e.method}({', '.join(e.args)})"
        else:
            rhs = pretty_value(e)
        return f"{s.attr} := {rhs}"
    if isinstance(s, ast.AsyncCall):
        return f"{s.fut} := {s.callee}!{s.method}({', '.join(s.args)})"
    if isinstance(s, ast.Await):
        return f"await {s.fut}"
    if isinstance(s, ast.Skip):
        return "skip"
    if isinstance(s, ast.Return):
        if s.mark == ast.STAR:
            return f"return* {s.attr}"
        if isinstance(s.mark, ast.WriteBack):
            return f"return[{s.mark.attr}] {s.attr}"
        return f"return {s.attr}"
    if isinstance(s, ast.If):
        return f"if ({pretty_bool(s.cond)})"
    if isinstance(s, ast.While):
        return f"while ({pretty_bool(s.cond)})"
    raise TypeError(f"not an atomic statement: {s!r}")


def pretty_stmt(stmt, indent=1) -> list[str]:
    pad = "  " * indent
    lines = []
    for s in ast.flatten(stmt):
        if isinstance(s, ast.If):
            lines.append(f"{pad}if ({pretty_bool(s.cond)}) {{")
            lines.extend(pretty_stmt(s.then, indent + 1))
            lines.append(f"{pad}}} else {{")
            lines.extend(pretty_stmt(s.orelse, indent + 1))
            lines.append(f"{pad}}}")
        elif isinstance(s, ast.While):
            lines.append(f"{pad}while ({pretty_bool(s.cond)}) {{")
            lines.extend(pretty_stmt(s.body, indent + 1))
            lines.append(f"{pad}}}")
        else:
            lines.append(f"{pad}{pretty_atom(s)};")
    return lines


def pretty(program: ast.Program) -> SourceText:
    chunks = []
    for decl in program.methods.values():
        chunks.append("\n".join([f"{decl.name}({', '.join(decl.params)}) {{",
                                 *pretty_stmt(decl.body), "}"]))
    chunks.append("\n".join(["main() {", *pretty_stmt(program.main), "}"]))
    return SourceText("\n\n".join(chunks) + "\n")
