"""Random well-formed programs for property tests.

Shape rules that keep every generated program valid and terminating:

* methods are numbered, and both synchronous and asynchronous calls only go
  to higher-numbered methods, so the call graph is acyclic;
* callees of asynchronous calls are objects created earlier in the same
  body at top level, and there are no asynchronous calls inside loops;
* ``await`` and ``get`` only appear at top level, on futures assigned by an
  earlier top-level asynchronous call of the same body;
* loops count down a counter private to the method and nesting depth.

Arithmetic can still overflow through repeated doubling; :func:`generate`
discards such programs and draws again.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import source_lang as ast
from .errors import ValidationError

INT_ATTRS = ("i0", "i1", "i2", "i3")


@dataclass
class _Body:
    index: int
    params: tuple
    objects: list = field(default_factory=list)
    futures: list = field(default_factory=list)
    next_obj: int = 0
    next_fut: int = 0


class _Gen:
    def __init__(self, rng: random.Random, n_methods: int, budget: int):
        self.rng = rng
        self.n_methods = n_methods
        self.arity = [rng.randint(0, 2) for _ in range(n_methods)]
        self.budget = budget

    # -- expressions
    def leaf(self, body):
        r = self.rng.random()
        if body.params and r < 0.25:
            return ast.Param(self.rng.choice(body.params))
        if r < 0.6:
            return ast.Attr(self.rng.choice(INT_ATTRS))
        return ast.IntLit(self.rng.randint(-3, 5))

    def value(self, body):
        if self.rng.random() < 0.4:
            op = self.rng.choice((ast.Add, ast.Sub))
            return op(self.leaf(body), self.leaf(body))
        return self.leaf(body)

    def cond(self, body, depth=0):
        r = self.rng.random()
        if depth < 1 and r < 0.15:
            return ast.Not(self.cond(body, depth + 1))
        if depth < 1 and r < 0.3:
            op = self.rng.choice((ast.And, ast.Or))
            return op(self.cond(body, depth + 1), self.cond(body, depth + 1))
        return ast.Eq(self.value(body), self.value(body))

    def callee_method(self, body):
        later = list(range(body.index + 1, self.n_methods))
        return self.rng.choice(later) if later else None

    def args(self, m):
        return tuple(self.rng.choice(INT_ATTRS) for _ in range(self.arity[m]))

    # -- statements
    def atom(self, body, top, in_loop):
        choices = ["assign", "assign", "skip", "sync", "new"]
        if top and not body.objects:
            choices += ["new"]
        if not in_loop and body.objects:
            choices += ["async", "async", "async"]
        if top and body.futures:
            choices += ["await", "await", "await", "get", "get"]
        kind = self.rng.choice(choices)
        m = self.callee_method(body)
        if kind == "sync" and m is not None:
            return ast.Assign(self.rng.choice(INT_ATTRS), ast.SyncCall(f"m{m}", self.args(m)))
        if kind == "new" and top:
            name = f"o{body.next_obj}"
            body.next_obj += 1
            body.objects.append(name)
            return ast.Assign(name, ast.New())
        if kind == "async" and m is not None:
            name = f"f{body.next_fut}"
            body.next_fut += 1
            if top:
                body.futures.append(name)
            return ast.AsyncCall(name, self.rng.choice(body.objects), f"m{m}", self.args(m))
        if kind == "await":
            return ast.Await(self.rng.choice(body.futures))
        if kind == "get":
            return ast.Assign(self.rng.choice(INT_ATTRS), ast.Get(self.rng.choice(body.futures)))
        if kind == "skip":
            return ast.Skip()
        return ast.Assign(self.rng.choice(INT_ATTRS), self.value(body))

    def block(self, body, depth, top, in_loop, length, floor=0):
        """At most ``length`` statements, never spending the budget below ``floor``."""
        stmts = []
        for _ in range(length):
            if self.budget <= floor:
                break
            self.budget -= 1
            r = self.rng.random()
            if depth < 2 and r < 0.15 and self.budget >= floor + 2:
                then = self.block(body, depth + 1, False, in_loop, self.rng.randint(1, 3), floor + 1)
                orelse = self.block(body, depth + 1, False, in_loop, self.rng.randint(1, 2), floor)
                stmts.append(ast.If(self.cond(body), then, orelse))
            elif depth < 2 and r < 0.27 and self.budget >= floor + 3:
                ctr = f"c{body.index + 1}_{depth}"
                self.budget -= 2
                stmts.append(ast.Assign(ctr, ast.IntLit(self.rng.randint(0, 3))))
                inner = self.block(body, depth + 1, False, True, self.rng.randint(1, 3), floor)
                dec = ast.Assign(ctr, ast.Sub(ast.Attr(ctr), ast.IntLit(1)))
                stmts.append(ast.While(ast.Not(ast.Eq(ast.Attr(ctr), ast.IntLit(0))),
                                       ast.seq_of([*ast.flatten(inner), dec])))
            else:
                stmts.append(self.atom(body, top, in_loop))
        return ast.seq_of(stmts)

    def body(self, index, params, length, is_main):
        b = _Body(index, params)
        block = self.block(b, 0, True, False, length)
        stmts = ast.flatten(block) if block is not None else []
        ret = ast.UNIT_ATTR if is_main else self.rng.choice(INT_ATTRS)
        self.budget -= 1
        return ast.seq_of([*stmts, ast.Return(ret)])


def _draw(rng: random.Random, max_methods: int, max_stmts: int) -> ast.Program:
    n = rng.randint(0, max_methods - 1)
    g = _Gen(rng, n, max_stmts - n - 1)
    main = g.body(-1, (), rng.randint(1, 8), True)
    methods = {}
    for i in range(n):
        params = tuple(f"p{j}" for j in range(g.arity[i]))
        methods[f"m{i}"] = ast.MethodDecl(f"m{i}", params, g.body(i, params, rng.randint(0, 5), False))
    return ast.Program(methods, main)


def program_size(program: ast.Program) -> int:
    return sum(ast.statement_count(body) for _, _, body in program.bodies())


def generate(rng: random.Random | int, max_methods: int = 6, max_stmts: int = 30,
             fuel: int = 10_000) -> ast.Program:
    """A valid program with at most ``max_methods`` bodies (main included)
    and ``max_stmts`` statements whose runtime execution does not overflow."""
    from .compiler import compile_program
    from .runtime import load, run_rt

    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    while True:
        p = _draw(rng, max_methods, max_stmts)
        problems = ast.validate(p)
        if problems:
            raise ValidationError(problems)
        assert program_size(p) <= max_stmts, program_size(p)
        table = compile_program(p)
        try:
            run_rt(load(table), table, fuel)
        except OverflowError:
            continue
        return p
