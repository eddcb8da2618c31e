"""AST of the source actor language.

Statements are immutable dataclasses. Sequences are kept right-nested
(``Seq(a, Seq(b, c))``); the parser only builds that shape and
:func:`canonical` restores it for hand-built trees, so that configurations
coming from the two interpreters can be compared with plain ``==``.

Attribute positions (assignment targets, futures, callees, call arguments,
returned names) are bare strings. Method parameters only ever occur inside
value expressions, as :class:`Param`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from .errors import MalformedBody

UNIT_ATTR = "__unit"
MAIN = "main"


# ---------------------------------------------------------------- values

@dataclass(frozen=True)
class Attr:
    name: str


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Add:
    left: "ValueExpr"
    right: "ValueExpr"


@dataclass(frozen=True)
class Sub:
    left: "ValueExpr"
    right: "ValueExpr"


ValueExpr = Union[Attr, Param, IntLit, Add, Sub]


# ---------------------------------------------------------------- booleans

@dataclass(frozen=True)
class And:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class Or:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class Not:
    operand: "BoolExpr"


@dataclass(frozen=True)
class Eq:
    left: ValueExpr
    right: ValueExpr


BoolExpr = Union[And, Or, Not, Eq]


# ---------------------------------------------------------------- right-hand sides

@dataclass(frozen=True)
class New:
    pass


@dataclass(frozen=True)
class Get:
    fut: str


@dataclass(frozen=True)
class SyncCall:
    method: str
    args: tuple[str, ...]


Expr = Union[Attr, Param, IntLit, Add, Sub, New, Get, SyncCall]


# ---------------------------------------------------------------- return marks

@dataclass(frozen=True)
class Unmarked:
    def __repr__(self):
        return "UNMARKED"


@dataclass(frozen=True)
class Star:
    def __repr__(self):
        return "STAR"


@dataclass(frozen=True)
class WriteBack:
    attr: str


UNMARKED = Unmarked()
STAR = Star()
ReturnMark = Union[Unmarked, Star, WriteBack]


# ---------------------------------------------------------------- statements

@dataclass(frozen=True)
class Assign:
    attr: str
    expr: Expr


@dataclass(frozen=True)
class AsyncCall:
    fut: str
    callee: str
    method: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Await:
    fut: str


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Return:
    attr: str
    mark: ReturnMark = UNMARKED


@dataclass(frozen=True, eq=False)
class Seq:
    first: "Stmt"
    second: "Stmt"

    # long bodies nest deeply to the right; walk the spine instead of recursing
    def __eq__(self, other):
        a, b = self, other
        while isinstance(a, Seq) and isinstance(b, Seq):
            if a is b:
                return True
            if a.first != b.first:
                return False
            a, b = a.second, b.second
        if isinstance(a, Seq) or isinstance(b, Seq):
            return False if isinstance(b, Stmt.__args__) else NotImplemented
        return a == b

    def __hash__(self):
        h, node = 0, self
        while isinstance(node, Seq):
            h = hash((h, node.first))
            node = node.second
        return hash((h, node))


@dataclass(frozen=True)
class If:
    cond: BoolExpr
    then: "Stmt"
    orelse: "Stmt"


@dataclass(frozen=True)
class While:
    cond: BoolExpr
    body: "Stmt"


Stmt = Union[Assign, AsyncCall, Await, Skip, Return, Seq, If, While]


@dataclass(frozen=True)
class MethodDecl:
    name: str
    params: tuple[str, ...]
    body: Stmt


@dataclass(frozen=True)
class Program:
    """``methods`` excludes main; main is the entry body and takes no parameters."""

    methods: dict
    main: Stmt

    def method(self, name: str) -> MethodDecl:
        return self.methods[name]

    def bodies(self) -> Iterator[tuple[str, tuple[str, ...], Stmt]]:
        """Main first, then the declared methods in declaration order."""
        yield MAIN, (), self.main
        for decl in self.methods.values():
            yield decl.name, decl.params, decl.body


# ---------------------------------------------------------------- sequence helpers

def flatten(stmt: Stmt) -> list:
    """The non-Seq statements of ``stmt`` in execution order."""
    out = []
    stack = [stmt]
    while stack:
        s = stack.pop()
        if isinstance(s, Seq):
            stack.append(s.second)
            stack.append(s.first)
        else:
            out.append(s)
    return out


def seq_of(stmts, tail: Stmt | None = None) -> Stmt | None:
    """Right-nested sequence of ``stmts`` followed by ``tail``."""
    acc = tail
    for s in reversed(stmts):
        acc = s if acc is None else Seq(s, acc)
    return acc


def seq_concat(first: Stmt, rest: Stmt | None) -> Stmt:
    return seq_of(flatten(first), rest)


def split_head(stmt: Stmt) -> tuple[Stmt, Stmt | None]:
    """Split off the first atomic statement; Seq is structural, never a step."""
    if not isinstance(stmt, Seq):
        return stmt, None
    first = stmt.first
    if not isinstance(first, Seq):
        return first, stmt.second
    head, rest = split_head(first)
    return head, (stmt.second if rest is None else seq_concat(rest, stmt.second))


def canonical(stmt: Stmt) -> Stmt:
    """Right-nest every sequence, including those inside branches and loops."""
    parts = []
    for s in flatten(stmt):
        if isinstance(s, If):
            s = If(s.cond, canonical(s.then), canonical(s.orelse))
        elif isinstance(s, While):
            s = While(s.cond, canonical(s.body))
        parts.append(s)
    return seq_of(parts)


def walk(stmt: Stmt) -> Iterator[Stmt]:
    """Every atomic or compound statement inside ``stmt`` (Seq nodes skipped)."""
    for s in flatten(stmt):
        yield s
        if isinstance(s, If):
            yield from walk(s.then)
            yield from walk(s.orelse)
        elif isinstance(s, While):
            yield from walk(s.body)


def statement_count(stmt: Stmt) -> int:
    return sum(1 for _ in walk(stmt))


# ---------------------------------------------------------------- write-back marking

def mark_writeback(body: Stmt, mark: ReturnMark) -> Stmt:
    """Replace the mark of the final (unmarked) return of ``body`` with ``mark``.

    Only the last statement of the top-level sequence is inspected; loops and
    branches are left untouched.
    """
    if isinstance(body, Seq):
        return Seq(body.first, mark_writeback(body.second, mark))
    if isinstance(body, Return):
        if body.mark != UNMARKED:
            raise MalformedBody(f"return {body.attr} is already marked {body.mark!r}")
        return Return(body.attr, mark)
    raise MalformedBody(f"method body does not end with a return but with {type(body).__name__}")


# ---------------------------------------------------------------- substitution

def subst_value(v: ValueExpr, env: dict) -> ValueExpr:
    if isinstance(v, Param):
        return IntLit(env[v.name]) if v.name in env else v
    if isinstance(v, Add):
        return Add(subst_value(v.left, env), subst_value(v.right, env))
    if isinstance(v, Sub):
        return Sub(subst_value(v.left, env), subst_value(v.right, env))
    return v


def subst_bool(b: BoolExpr, env: dict) -> BoolExpr:
    if isinstance(b, Eq):
        return Eq(subst_value(b.left, env), subst_value(b.right, env))
    if isinstance(b, Not):
        return Not(subst_bool(b.operand, env))
    return type(b)(subst_bool(b.left, env), subst_bool(b.right, env))


def substitute(stmt: Stmt, env: dict) -> Stmt:
    """Instantiate parameters: every ``Param(r)`` becomes ``IntLit(env[r])``."""
    parts = []
    for s in flatten(stmt):
        if isinstance(s, Assign) and not isinstance(s.expr, (New, Get, SyncCall)):
            s = Assign(s.attr, subst_value(s.expr, env))
        elif isinstance(s, If):
            s = If(subst_bool(s.cond, env), substitute(s.then, env), substitute(s.orelse, env))
        elif isinstance(s, While):
            s = While(subst_bool(s.cond, env), substitute(s.body, env))
        parts.append(s)
    return seq_of(parts)


def instantiate_body(decl: MethodDecl, args, mark: ReturnMark) -> Stmt:
    """Body of ``decl`` with parameters bound to ``args`` and its return marked."""
    env = dict(zip(decl.params, args))
    return mark_writeback(substitute(canonical(decl.body), env), mark)


# ---------------------------------------------------------------- attribute traversal

def value_names(v: ValueExpr) -> Iterator[tuple[str, str]]:
    """(kind, name) pairs in textual order; kind is "attr" or "param"."""
    if isinstance(v, Attr):
        yield "attr", v.name
    elif isinstance(v, Param):
        yield "param", v.name
    elif isinstance(v, (Add, Sub)):
        yield from value_names(v.left)
        yield from value_names(v.right)


def bool_names(b: BoolExpr) -> Iterator[tuple[str, str]]:
    if isinstance(b, Eq):
        yield from value_names(b.left)
        yield from value_names(b.right)
    elif isinstance(b, Not):
        yield from bool_names(b.operand)
    else:
        yield from bool_names(b.left)
        yield from bool_names(b.right)


def stmt_names(stmt: Stmt) -> Iterator[tuple[str, str]]:
    """Attribute and parameter occurrences of ``stmt`` in textual order."""
    for s in flatten(stmt):
        if isinstance(s, Assign):
            yield "attr", s.attr
            e = s.expr
            if isinstance(e, Get):
                yield "attr", e.fut
            elif isinstance(e, SyncCall):
                for a in e.args:
                    yield "attr", a
            elif not isinstance(e, New):
                yield from value_names(e)
        elif isinstance(s, AsyncCall):
            yield "attr", s.fut
            yield "attr", s.callee
            for a in s.args:
                yield "attr", a
        elif isinstance(s, Await):
            yield "attr", s.fut
        elif isinstance(s, Return):
            yield "attr", s.attr
            if isinstance(s.mark, WriteBack):
                yield "attr", s.mark.attr
        elif isinstance(s, If):
            yield from bool_names(s.cond)
            yield from stmt_names(s.then)
            yield from stmt_names(s.orelse)
        elif isinstance(s, While):
            yield from bool_names(s.cond)
            yield from stmt_names(s.body)


def attribute_names(program: Program) -> list[str]:
    """Distinct attribute identifiers by first occurrence, main first."""
    seen = {}
    for _, _, body in program.bodies():
        for kind, name in stmt_names(body):
            if kind == "attr" and name not in seen:
                seen[name] = len(seen)
    return list(seen)


# ---------------------------------------------------------------- validation

@dataclass(frozen=True)
class Diagnostic:
    kind: str
    method: str
    detail: str = ""

    def __str__(self):
        return f"{self.kind} in {self.method}: {self.detail}" if self.detail else f"{self.kind} in {self.method}"


def _called(stmt: Stmt) -> Iterator[tuple[str, int]]:
    for s in walk(stmt):
        if isinstance(s, AsyncCall):
            yield s.method, len(s.args)
        elif isinstance(s, Assign) and isinstance(s.expr, SyncCall):
            yield s.expr.method, len(s.expr.args)


def validate(program: Program) -> list[Diagnostic]:
    diags = []
    for name, params, body in program.bodies():
        if len(set(params)) != len(params):
            diags.append(Diagnostic("DuplicateParam", name, ", ".join(params)))
        pset = set(params)
        for callee, arity in _called(body):
            if callee not in program.methods:
                diags.append(Diagnostic("UnknownMethod", name, callee))
            elif len(program.methods[callee].params) != arity:
                want = len(program.methods[callee].params)
                diags.append(Diagnostic("ArityMismatch", name, f"{callee} takes {want}, given {arity}"))
        targets = []
        for s in walk(body):
            if isinstance(s, Assign) and s.attr in pset:
                diags.append(Diagnostic("AssignToParam", name, s.attr))
                targets.append(s.attr)
            if isinstance(s, Return) and s.mark != UNMARKED:
                diags.append(Diagnostic("MarkedReturn", name, s.attr))
        misused = [ident for kind, ident in stmt_names(body) if kind == "attr" and ident in pset]
        for ident in targets:
            misused.remove(ident)
        diags.extend(Diagnostic("ParamAsAttribute", name, ident) for ident in misused)
        for kind, ident in stmt_names(body):
            if kind == "param" and ident not in pset:
                diags.append(Diagnostic("UnknownParam", name, ident))
        spine = flatten(body)
        nreturns = sum(1 for s in walk(body) if isinstance(s, Return))
        if nreturns == 0:
            diags.append(Diagnostic("MissingReturn", name))
        elif nreturns > 1:
            diags.append(Diagnostic("MultipleReturns", name, str(nreturns)))
        elif not isinstance(spine[-1], Return):
            diags.append(Diagnostic("ReturnNotFinal", name))
    return diags
