"""Translation of source statements into continuation trees, and back."""

from __future__ import annotations

from . import source_lang as ast
from . import target_ir as ir
from .errors import IllFormedIR, UnknownAttribute
from .parser import pretty_atom


class _Ctx:
    def __init__(self, layout: dict, params=()):
        self.layout = layout
        self.slots = {p: i for i, p in enumerate(params)}

    def attr(self, name: str) -> int:
        try:
            return self.layout[name]
        except KeyError:
            raise UnknownAttribute(name) from None

    def value(self, v):
        if isinstance(v, ast.Attr):
            return ir.A(self.attr(v.name))
        if isinstance(v, ast.Param):
            if v.name not in self.slots:
                raise UnknownAttribute(f"unknown parameter {v.name!r}")
            return ir.P(self.slots[v.name])
        if isinstance(v, ast.IntLit):
            return ir.I(v.value)
        return (ir.Add if isinstance(v, ast.Add) else ir.Sub)(self.value(v.left), self.value(v.right))

    def cond(self, b):
        if isinstance(b, ast.Eq):
            return ir.Eq(self.value(b.left), self.value(b.right))
        if isinstance(b, ast.Not):
            return ir.Not(self.cond(b.operand))
        return (ir.And if isinstance(b, ast.And) else ir.Or)(self.cond(b.left), self.cond(b.right))

    def rhs(self, e):
        if isinstance(e, ast.New):
            return ir.New()
        if isinstance(e, ast.Get):
            return ir.Get(self.attr(e.fut))
        if isinstance(e, ast.SyncCall):
            return ir.Sync(e.method, tuple(self.attr(a) for a in e.args))
        return ir.Val(self.value(e))

    def stmt(self, s, k, wb):
        # sequences are folded right to left: S1;S2 under k is S1 under (S2 under k)
        for a in reversed(ast.flatten(s)):
            if isinstance(a, ast.Assign):
                k = ir.Assign(self.attr(a.attr), self.rhs(a.expr), k)
            elif isinstance(a, ast.AsyncCall):
                k = ir.Assign(self.attr(a.fut),
                              ir.Async(self.attr(a.callee), a.method, tuple(self.attr(x) for x in a.args)), k)
            elif isinstance(a, ast.Await):
                k = ir.Await(self.attr(a.fut), k)
            elif isinstance(a, ast.Skip):
                k = ir.Skip(k)
            elif isinstance(a, ast.Return):
                if a.mark == ast.UNMARKED:
                    target = wb
                elif a.mark == ast.STAR:
                    target = None
                else:
                    target = self.attr(a.mark.attr)
                k = ir.Return(self.attr(a.attr), target, k)
            elif isinstance(a, ast.If):
                k = ir.If(self.cond(a.cond), self.stmt(a.then, ir.HOLE, wb),
                          self.stmt(a.orelse, ir.HOLE, wb), k)
            elif isinstance(a, ast.While):
                k = ir.While(self.cond(a.cond), self.stmt(a.body, ir.HOLE, wb), k)
            else:
                raise TypeError(f"unexpected statement {a!r}")
        return k


def compile_stmt(s: ast.Stmt, k, wb, layout: dict, params=()):
    """Compile ``s`` so that it runs into ``k``; unmarked returns write back to ``wb``."""
    return _Ctx(layout, params).stmt(s, k, wb)


def attr_layout(program: ast.Program) -> dict:
    return {name: i for i, name in enumerate(ast.attribute_names(program))}


def compile_program(program: ast.Program) -> ir.MethodTable:
    layout = attr_layout(program)
    methods = {}
    for name, params, body in program.bodies():
        template = compile_stmt(body, ir.HOLE, ir.WB_SLOT, layout, params)
        methods[name] = ir.CompiledMethod(name, len(params), template)
    return ir.MethodTable(methods, layout)


# ---------------------------------------------------------------- inverse translation

class Decompiler:
    """Maps continuation trees back to source statements.

    Results are memoized per node, so decompiling a spine whose suffix was
    already seen only costs the new prefix. The memo holds on to the nodes
    it has seen and is dropped wholesale once it grows past ``limit``.
    """

    def __init__(self, names, limit: int = 400_000):
        self.names = list(names)
        self.limit = limit
        self.memo: dict = {}

    def name(self, idx: int) -> str:
        if not 0 <= idx < len(self.names):
            raise IllFormedIR(f"attribute index {idx} out of range")
        return self.names[idx]

    def value(self, v):
        if isinstance(v, ir.A):
            return ast.Attr(self.name(v.idx))
        if isinstance(v, ir.I):
            return ast.IntLit(v.value)
        if isinstance(v, ir.P):
            raise IllFormedIR(f"unbound parameter slot {v.slot}")
        return (ast.Add if isinstance(v, ir.Add) else ast.Sub)(self.value(v.left), self.value(v.right))

    def cond(self, b):
        if isinstance(b, ir.Eq):
            return ast.Eq(self.value(b.left), self.value(b.right))
        if isinstance(b, ir.Not):
            return ast.Not(self.cond(b.operand))
        return (ast.And if isinstance(b, ir.And) else ast.Or)(self.cond(b.left), self.cond(b.right))

    def atom(self, node, branches: bool = True):
        """Source form of a single spine node (its continuation is ignored)."""
        if isinstance(node, ir.Skip):
            return ast.Skip()
        if isinstance(node, ir.Await):
            return ast.Await(self.name(node.attr))
        if isinstance(node, ir.Assign):
            x = self.name(node.attr)
            r = node.rhs
            if isinstance(r, ir.Val):
                return ast.Assign(x, self.value(r.v))
            if isinstance(r, ir.New):
                return ast.Assign(x, ast.New())
            if isinstance(r, ir.Get):
                return ast.Assign(x, ast.Get(self.name(r.fut)))
            if isinstance(r, ir.Async):
                return ast.AsyncCall(x, self.name(r.callee), r.method, tuple(self.name(a) for a in r.args))
            return ast.Assign(x, ast.SyncCall(r.method, tuple(self.name(a) for a in r.args)))
        if isinstance(node, ir.Return):
            if node.wb is None:
                mark = ast.STAR
            elif node.wb is ir.WB_SLOT:
                mark = ast.UNMARKED
            else:
                mark = ast.WriteBack(self.name(node.wb))
            return ast.Return(self.name(node.attr), mark)
        if isinstance(node, ir.If):
            if not branches:
                return ast.If(self.cond(node.cond), ast.Skip(), ast.Skip())
            return ast.If(self.cond(node.cond), self.builder(node.then), self.builder(node.orelse))
        if isinstance(node, ir.While):
            if not branches:
                return ast.While(self.cond(node.cond), ast.Skip())
            return ast.While(self.cond(node.cond), self.builder(node.body))
        raise IllFormedIR(f"not a statement: {node!r}")

    def _walk(self, s):
        nodes = []
        memo = self.memo
        tail, end = None, None
        while True:
            if s is ir.EXIT or s is ir.HOLE:
                end = s
                break
            hit = memo.get(id(s))
            if hit is not None and hit[0] is s:
                tail, end = hit[1], hit[2]
                break
            if not isinstance(s, ir.STMT_TYPES):
                raise IllFormedIR(f"not a statement: {s!r}")
            nodes.append(s)
            s = s.k
        if len(memo) + len(nodes) > self.limit:
            memo.clear()
        for node in reversed(nodes):
            a = self.atom(node)
            tail = a if tail is None else ast.Seq(a, tail)
            memo[id(node)] = (node, tail, end)
        return tail, end

    def builder(self, s):
        body, end = self._walk(s)
        if end is not ir.HOLE:
            raise IllFormedIR("builder does not end in a hole")
        if body is None:
            raise IllFormedIR("empty builder")
        return body

    def stmt(self, s):
        """Source statement of a process continuation; None once it has ended."""
        body, end = self._walk(s)
        if end is ir.HOLE:
            raise IllFormedIR("raw hole in a process continuation")
        return body

    def label(self, node) -> str:
        return pretty_atom(self.atom(node, branches=False))


def stm_to_source(s, table: ir.MethodTable):
    return Decompiler(table.names).stmt(s)
