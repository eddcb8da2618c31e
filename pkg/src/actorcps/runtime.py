"""Deterministic round-robin execution of compiled programs.

The heap keeps objects and futures in two dense arrays indexed by one shared
reference counter, so a reference is either an object or a future, never
both. Each object owns a fixed-size attribute array and a deque of processes.
The scheduler list holds the objects with a non-empty process queue; after
each step it is rotated so that the object after the one that ran goes next.

Every heap mutation goes through :class:`RtHeap` methods, which record the
touched references in ``dirty_objects`` / ``dirty_futures``. Consumers that
mirror the heap (the soundness checker) drain these sets instead of diffing
the whole heap after every step.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from . import target_ir as ir
from .compiler import Decompiler
from .errors import Blocked, DanglingRef, MalformedProcess, check_int64
from .trace import Rule, Spawn, Status, Step, Trace

MAIN_OBJECT = 0
MAIN_DESTINY = 1


@dataclass(frozen=True)
class Unresolved:
    # nothing ever registers as a listener: blocked objects stay scheduled
    listeners: tuple = ()


@dataclass(frozen=True)
class Resolved:
    value: int


@dataclass(frozen=True)
class Proc:
    stmt: object
    destiny: int

    def __eq__(self, other):
        if not isinstance(other, Proc):
            return NotImplemented
        return self.destiny == other.destiny and self.stmt == other.stmt


@dataclass
class ObjCell:
    attrs: list
    procq: deque

    def copy(self) -> "ObjCell":
        return ObjCell(list(self.attrs), deque(self.procq))


class RtHeap:
    def __init__(self, attr_count: int, capacity: int = 8):
        self.attr_count = attr_count
        self.objects: list = [None] * capacity
        self.futures: list = [None] * capacity
        self.counter = 0
        self.dirty_objects: set = set()
        self.dirty_futures: set = set()

    # -- allocation
    def _fresh(self) -> int:
        ref = self.counter
        if ref >= len(self.objects):
            grow = len(self.objects) or 1
            self.objects.extend([None] * grow)
            self.futures.extend([None] * grow)
        self.counter += 1
        return ref

    def new_object(self) -> int:
        ref = self._fresh()
        self.objects[ref] = ObjCell([0] * self.attr_count, deque())
        self.dirty_objects.add(ref)
        return ref

    def new_future(self) -> int:
        ref = self._fresh()
        self.futures[ref] = Unresolved()
        self.dirty_futures.add(ref)
        return ref

    # -- lookup
    def is_object(self, ref) -> bool:
        return isinstance(ref, int) and 0 <= ref < self.counter and self.objects[ref] is not None

    def is_future(self, ref) -> bool:
        return isinstance(ref, int) and 0 <= ref < self.counter and self.futures[ref] is not None

    def obj(self, ref: int) -> ObjCell:
        if not self.is_object(ref):
            raise DanglingRef(f"{ref} is not an object")
        return self.objects[ref]

    def future(self, ref: int):
        if not self.is_future(ref):
            raise DanglingRef(f"{ref} is not a future")
        return self.futures[ref]

    def object_refs(self) -> list[int]:
        return [r for r in range(self.counter) if self.objects[r] is not None]

    def future_refs(self) -> list[int]:
        return [r for r in range(self.counter) if self.futures[r] is not None]

    # -- mutation
    def set_attr(self, o: int, idx: int, value: int) -> None:
        self.objects[o].attrs[idx] = value
        self.dirty_objects.add(o)

    def resolve(self, ref: int, value: int) -> None:
        if isinstance(self.futures[ref], Resolved):
            raise MalformedProcess(f"future {ref} resolved twice")
        self.futures[ref] = Resolved(value)
        self.dirty_futures.add(ref)

    def set_head(self, o: int, proc: Proc) -> None:
        self.objects[o].procq[0] = proc
        self.dirty_objects.add(o)

    def pop_head(self, o: int) -> Proc:
        self.dirty_objects.add(o)
        return self.objects[o].procq.popleft()

    def push(self, o: int, proc: Proc) -> None:
        self.objects[o].procq.append(proc)
        self.dirty_objects.add(o)

    def rotate(self, o: int) -> None:
        q = self.objects[o].procq
        q.append(q.popleft())
        self.dirty_objects.add(o)

    def copy(self) -> "RtHeap":
        h = RtHeap.__new__(RtHeap)
        h.attr_count = self.attr_count
        h.objects = [c.copy() if c is not None else None for c in self.objects]
        h.futures = list(self.futures)
        h.counter = self.counter
        h.dirty_objects = set()
        h.dirty_futures = set()
        return h

    def __eq__(self, other):
        if not isinstance(other, RtHeap):
            return NotImplemented
        n = self.counter
        return (n == other.counter and self.attr_count == other.attr_count
                and self.objects[:n] == other.objects[:n] and self.futures[:n] == other.futures[:n])


@dataclass
class RtConfig:
    heap: RtHeap
    sched: list = field(default_factory=list)

    def copy(self) -> "RtConfig":
        return RtConfig(self.heap.copy(), list(self.sched))


# ---------------------------------------------------------------- scheduler list algebra

def _split(sched, o):
    n = sched.index(o)
    return sched[n + 1:], sched[:n]


def updl(sched, o, activated) -> list:
    after, before = _split(sched, o)
    return after + before + list(activated)


def newq_add(sched, o, y) -> list:
    after, before = _split(sched, o)
    rotated = after + before + [o]
    return rotated if y in sched else rotated + [y]


def newq_del(sched, o, queue) -> list:
    after, before = _split(sched, o)
    return after + before if not queue else after + before + [o]


def _get_blocked(heap: RtHeap, cell: ObjCell) -> bool:
    s = cell.procq[0].stmt
    if isinstance(s, ir.Assign) and isinstance(s.rhs, ir.Get):
        ref = cell.attrs[s.rhs.fut]
        # a dangling reference is not "blocked": eval reports it instead
        return heap.is_future(ref) and isinstance(heap.futures[ref], Unresolved)
    return False


def next_object(heap: RtHeap, sched):
    for o in sched:
        cell = heap.objects[o]
        if cell.procq and not _get_blocked(heap, cell):
            return o
    return None


# ---------------------------------------------------------------- evaluation

def eval_v(attrs, v) -> int:
    if isinstance(v, ir.A):
        return attrs[v.idx]
    if isinstance(v, ir.I):
        return v.value
    if isinstance(v, ir.Add):
        return check_int64(eval_v(attrs, v.left) + eval_v(attrs, v.right))
    if isinstance(v, ir.Sub):
        return check_int64(eval_v(attrs, v.left) - eval_v(attrs, v.right))
    raise MalformedProcess(f"unbound parameter in {v!r}")


def eval_b(attrs, b) -> bool:
    if isinstance(b, ir.Eq):
        return eval_v(attrs, b.left) == eval_v(attrs, b.right)
    if isinstance(b, ir.Not):
        return not eval_b(attrs, b.operand)
    if isinstance(b, ir.And):
        return eval_b(attrs, b.left) and eval_b(attrs, b.right)
    return eval_b(attrs, b.left) or eval_b(attrs, b.right)


def eval(o: int, heap: RtHeap, table: ir.MethodTable, labels: Decompiler | None = None):
    """Execute the next statement of object ``o`` in place.

    Returns ``(step, activated, heap)`` where ``activated`` lists the objects
    to append to the rotated scheduler list.
    """
    labels = labels or Decompiler(table.names)
    cell = heap.obj(o)
    if not cell.procq:
        raise MalformedProcess(f"object {o} has no process")
    proc = cell.procq[0]
    s, dest = proc.stmt, proc.destiny
    if s is ir.EXIT or s is ir.HOLE:
        raise MalformedProcess(f"process of object {o} ended without a return")
    attrs = cell.attrs
    activated = [o]
    spawn = None
    label = labels.label(s)
    nxt = None

    if isinstance(s, ir.Assign):
        r = s.rhs
        nxt = s.k
        if isinstance(r, ir.Val):
            rule = Rule.ASSIGN
            heap.set_attr(o, s.attr, eval_v(attrs, r.v))
        elif isinstance(r, ir.New):
            rule = Rule.NEW
            heap.set_attr(o, s.attr, heap.new_object())
        elif isinstance(r, ir.Get):
            fut = heap.future(attrs[r.fut])
            if not isinstance(fut, Resolved):
                raise Blocked(f"object {o} is blocked on future {attrs[r.fut]}")
            rule = Rule.GET
            heap.set_attr(o, s.attr, fut.value)
        elif isinstance(r, ir.Async):
            rule = Rule.ASYNC
            callee = attrs[r.callee]
            target = heap.obj(callee)
            args = tuple(attrs[a] for a in r.args)
            body = ir.instantiate(table, r.method, args, callee, None, ir.EXIT)
            was_idle = not target.procq
            fut = heap.new_future()
            heap.set_attr(o, s.attr, fut)
            heap.push(callee, Proc(body, fut))
            if callee != o and was_idle:
                activated = [o, callee]
            spawn = Spawn(callee, r.method, fut, args)
        else:
            rule = Rule.SYNC
            args = [attrs[a] for a in r.args]
            nxt = ir.instantiate(table, r.method, args, o, s.attr, s.k)
    elif isinstance(s, ir.Await):
        if isinstance(heap.future(attrs[s.attr]), Resolved):
            rule = Rule.AWAIT_I
            nxt = s.k
        else:
            rule = Rule.AWAIT_II
            heap.rotate(o)
    elif isinstance(s, ir.Return):
        if s.wb is None:
            rule = Rule.RETURN_A
            heap.resolve(dest, attrs[s.attr])
            heap.pop_head(o)
            if not cell.procq:
                activated = []
        else:
            rule = Rule.RETURN_S
            heap.set_attr(o, s.wb, attrs[s.attr])
            nxt = s.k
    elif isinstance(s, ir.Skip):
        rule = Rule.SKIP
        nxt = s.k
    elif isinstance(s, ir.If):
        if eval_b(attrs, s.cond):
            rule, nxt = Rule.IF_T, ir.splice(s.then, s.k)
        else:
            rule, nxt = Rule.IF_F, ir.splice(s.orelse, s.k)
    elif isinstance(s, ir.While):
        if eval_b(attrs, s.cond):
            rule, nxt = Rule.WHILE_T, ir.splice(s.body, s)
        else:
            rule, nxt = Rule.WHILE_F, s.k
    else:
        raise MalformedProcess(f"unexpected statement {s!r}")

    if nxt is not None:
        heap.set_head(o, Proc(nxt, dest))
    return Step(o, rule, label, spawn, tuple(activated)), activated, heap


def load(table: ir.MethodTable) -> RtConfig:
    heap = RtHeap(table.attr_count)
    main = heap.new_object()
    dest = heap.new_future()
    heap.push(main, Proc(ir.instantiate(table, "main", [], main, None, ir.EXIT), dest))
    return RtConfig(heap, [main])


def run_rt(config: RtConfig, table: ir.MethodTable, fuel: int = 1_000_000,
           snapshots: bool = False) -> Trace:
    """Run to completion, deadlock or fuel exhaustion, mutating ``config``.

    With ``snapshots`` the trace carries a copy of the configuration before
    every step plus the final one.
    """
    labels = Decompiler(table.names)
    initial = config.copy()
    shots = [initial] if snapshots else None
    steps = []
    heap = config.heap
    while True:
        o = next_object(heap, config.sched)
        if o is None:
            status = Status.DEADLOCK if config.sched else Status.FINISHED
            break
        if len(steps) >= fuel:
            status = Status.FUEL_EXHAUSTED
            break
        step, activated, heap = eval(o, heap, table, labels)
        config.sched = updl(config.sched, o, activated)
        steps.append(step)
        if snapshots:
            shots.append(config.copy())
    return Trace(steps, status, final=config, snapshots=shots, initial=initial)
