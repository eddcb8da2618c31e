"""Continuation-passing statement trees executed by the runtime.

Every statement carries its continuation ``k``. Branches and loop bodies are
*builders*: subtrees whose spine ends in the :data:`HOLE` leaf, forced by
:func:`splice` with the continuation they should run into. Attributes are
referred to by their index in the program-wide layout.

Trees are immutable and freely shared. Nodes are compared structurally
(``==``) but are deliberately unhashable, since hashing a long spine would
walk all of it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ArityMismatch, IllFormedIR, UnknownMethod

# ---------------------------------------------------------------- values


@dataclass(frozen=True)
class A:
    idx: int


@dataclass(frozen=True)
class P:
    slot: int


@dataclass(frozen=True)
class I:
    value: int


@dataclass(frozen=True)
class Add:
    left: object
    right: object


@dataclass(frozen=True)
class Sub:
    left: object
    right: object


@dataclass(frozen=True)
class Eq:
    left: object
    right: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class Not:
    operand: object


# ---------------------------------------------------------------- right-hand sides

@dataclass(frozen=True)
class Val:
    v: object


@dataclass(frozen=True)
class New:
    pass


@dataclass(frozen=True)
class Get:
    fut: int


@dataclass(frozen=True)
class Async:
    callee: int
    method: str
    args: tuple[int, ...]


@dataclass(frozen=True)
class Sync:
    method: str
    args: tuple[int, ...]


# ---------------------------------------------------------------- statements

class _Leaf:
    """Singleton leaves: the end of an asynchronous process and a builder hole."""

    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name

    def __reduce__(self):
        return self.name


EXIT = _Leaf("EXIT")
HOLE = _Leaf("HOLE")


class _WbSlot:
    """Placeholder for the write-back target inside a method template."""

    def __repr__(self):
        return "WB_SLOT"

    def __reduce__(self):
        return "WB_SLOT"


WB_SLOT = _WbSlot()


@dataclass(frozen=True, eq=False)
class Skip:
    k: object

    def with_k(self, k):
        return Skip(k)


@dataclass(frozen=True, eq=False)
class Await:
    attr: int
    k: object

    def with_k(self, k):
        return Await(self.attr, k)


@dataclass(frozen=True, eq=False)
class Assign:
    attr: int
    rhs: object
    k: object

    def with_k(self, k):
        return Assign(self.attr, self.rhs, k)


@dataclass(frozen=True, eq=False)
class If:
    cond: object
    then: object
    orelse: object
    k: object

    def with_k(self, k):
        return If(self.cond, self.then, self.orelse, k)


@dataclass(frozen=True, eq=False)
class While:
    cond: object
    body: object
    k: object

    def with_k(self, k):
        return While(self.cond, self.body, k)


@dataclass(frozen=True, eq=False)
class Return:
    """``wb`` is None for an asynchronous return, else the caller's attribute."""

    attr: int
    wb: object
    k: object

    def with_k(self, k):
        return Return(self.attr, self.wb, k)


STMT_TYPES = (Skip, Await, Assign, If, While, Return)


def _payload(s):
    return tuple(getattr(s, f) for f in s.__dataclass_fields__ if f != "k")


def _stmt_eq(a, b):
    # walks the continuation chain iteratively; spines can be long
    while True:
        if a is b:
            return True
        if type(a) is not type(b) or isinstance(a, _Leaf):
            return False if isinstance(b, STMT_TYPES + (_Leaf,)) else NotImplemented
        if _payload(a) != _payload(b):
            return False
        a, b = a.k, b.k


for _cls in STMT_TYPES:
    _cls.__eq__ = _stmt_eq
    _cls.__hash__ = None


def spine(s) -> list:
    """Statements reached by following continuations, up to EXIT or HOLE."""
    out = []
    while s is not EXIT and s is not HOLE:
        if not isinstance(s, STMT_TYPES):
            raise IllFormedIR(f"not a statement: {s!r}")
        out.append(s)
        s = s.k
    return out


def spine_end(s):
    while s is not EXIT and s is not HOLE:
        s = s.k
    return s


def rebuild(nodes, k):
    """Chain ``nodes`` (each re-targeted with ``with_k``) in front of ``k``."""
    for node in reversed(nodes):
        k = node.with_k(k)
    return k


def splice(builder, k):
    """Force a builder: replace the HOLE ending its spine by ``k``."""
    nodes = spine(builder)
    if spine_end(builder) is not HOLE:
        raise IllFormedIR("builder does not end in a hole")
    return rebuild(nodes, k)


def head_form(s) -> tuple:
    """Constructor tag and non-continuation payload of ``s``."""
    if s is EXIT:
        return ("Exit",)
    if s is HOLE:
        return ("Hole",)
    if isinstance(s, Skip):
        return ("Skip",)
    if isinstance(s, Await):
        return ("Await", s.attr)
    if isinstance(s, Assign):
        return ("Assign", s.attr, s.rhs)
    if isinstance(s, If):
        return ("If", s.cond, s.then, s.orelse)
    if isinstance(s, While):
        return ("While", s.cond, s.body)
    if isinstance(s, Return):
        return ("Return", s.attr, s.wb)
    raise IllFormedIR(f"not a statement: {s!r}")


# ---------------------------------------------------------------- methods

@dataclass(frozen=True)
class CompiledMethod:
    """``template`` is the body compiled against HOLE with write-back WB_SLOT."""

    name: str
    arity: int
    template: object


@dataclass
class MethodTable:
    methods: dict
    layout: dict

    @property
    def attr_count(self) -> int:
        return len(self.layout)

    @property
    def names(self) -> list[str]:
        out = [""] * len(self.layout)
        for name, idx in self.layout.items():
            out[idx] = name
        return out


def _subst_v(v, args):
    if isinstance(v, P):
        if v.slot >= len(args):
            raise IllFormedIR(f"parameter slot {v.slot} out of range")
        return I(args[v.slot])
    if isinstance(v, (Add, Sub)):
        return type(v)(_subst_v(v.left, args), _subst_v(v.right, args))
    return v


def _subst_b(b, args):
    if isinstance(b, Not):
        return Not(_subst_b(b.operand, args))
    if isinstance(b, Eq):
        return Eq(_subst_v(b.left, args), _subst_v(b.right, args))
    return type(b)(_subst_b(b.left, args), _subst_b(b.right, args))


def _bind(s, args, wb, k):
    """Bind parameters and the write-back slot, ending the spine in ``k``."""
    nodes = []
    for node in spine(s):
        if isinstance(node, Assign) and isinstance(node.rhs, Val):
            node = Assign(node.attr, Val(_subst_v(node.rhs.v, args)), HOLE)
        elif isinstance(node, If):
            node = If(_subst_b(node.cond, args), _bind(node.then, args, wb, HOLE),
                      _bind(node.orelse, args, wb, HOLE), HOLE)
        elif isinstance(node, While):
            node = While(_subst_b(node.cond, args), _bind(node.body, args, wb, HOLE), HOLE)
        elif isinstance(node, Return) and node.wb is WB_SLOT:
            node = Return(node.attr, wb, HOLE)
        nodes.append(node)
    return rebuild(nodes, k)


def instantiate(table: MethodTable, name: str, args, this, wb, k):
    """Body of method ``name`` applied to ``args``, writing back to ``wb``
    (None for an asynchronous call) and continuing with ``k``.

    ``this`` is accepted for parity with the method signature; attribute
    accesses are resolved against the running object, so it is unused.
    """
    m = table.methods.get(name)
    if m is None:
        raise UnknownMethod(name)
    if len(args) != m.arity:
        raise ArityMismatch(f"{name} expects {m.arity} arguments, got {len(args)}")
    return _bind(m.template, tuple(args), wb, k)


# ---------------------------------------------------------------- s-expression dump

def sexp_value(v) -> str:
    if isinstance(v, A):
        return f"(A {v.idx})"
    if isinstance(v, P):
        return f"(P {v.slot})"
    if isinstance(v, I):
        return f"(I {v.value})"
    if isinstance(v, Not):
        return f"(Not {sexp_value(v.operand)})"
    return f"({type(v).__name__} {sexp_value(v.left)} {sexp_value(v.right)})"


def sexp_rhs(r) -> str:
    if isinstance(r, Val):
        return f"(Val {sexp_value(r.v)})"
    if isinstance(r, New):
        return "New"
    if isinstance(r, Get):
        return f"(Get {r.fut})"
    if isinstance(r, Async):
        return f"(Async {r.callee} {r.method} [{' '.join(map(str, r.args))}])"
    return f"(Sync {r.method} [{' '.join(map(str, r.args))}])"


def _sexp_wb(wb) -> str:
    if wb is None:
        return "Nothing"
    if wb is WB_SLOT:
        return "wb"
    return f"(Just {wb})"


def sexp(s, indent=0) -> str:
    """Stable multi-line rendering; one spine statement per line."""
    pad = "  " * indent
    lines = []
    for node in spine(s):
        if isinstance(node, Skip):
            lines.append(f"{pad}(Skip")
        elif isinstance(node, Await):
            lines.append(f"{pad}(Await {node.attr}")
        elif isinstance(node, Assign):
            lines.append(f"{pad}(Assign {node.attr} {sexp_rhs(node.rhs)}")
        elif isinstance(node, Return):
            lines.append(f"{pad}(Return {node.attr} {_sexp_wb(node.wb)}")
        elif isinstance(node, If):
            lines.append(f"{pad}(If {sexp_value(node.cond)}")
            lines.append(sexp(node.then, indent + 1))
            lines.append(sexp(node.orelse, indent + 1))
        else:
            lines.append(f"{pad}(While {sexp_value(node.cond)}")
            lines.append(sexp(node.body, indent + 1))
    lines.append(f"{pad}{spine_end(s)!r}")
    return "\n".join(lines)


def dump_table(table: MethodTable) -> str:
    out = ["(layout " + " ".join(f"{n}:{i}" for n, i in sorted(table.layout.items(), key=lambda kv: kv[1])) + ")"]
    for m in table.methods.values():
        out.append(f"(method {m.name} {m.arity}")
        out.append(sexp(m.template, 1))
        out.append(")")
    return "\n".join(out) + "\n"
