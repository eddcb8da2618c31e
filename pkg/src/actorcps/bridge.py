"""Translations between source and runtime configurations, and the
step-by-step soundness checker built on them.

The checker replays a runtime trace next to the source interpreter. Before
every step the runtime's choice must be an enabled source step with the
same rule and statement; after every step the runtime configuration,
translated back, must equal the source successor.

Comparing whole configurations after every step would cost time linear in
the heap size per step. Instead the checker keeps a :class:`SourceView`, a
translated-back mirror of the runtime heap that is refreshed from the
heap's write journal, and compares only the references either side touched.
Untouched references were equal after the previous step and are still the
same objects on both sides, so the check still covers the whole
configuration. ``full=True`` switches to naive whole-configuration equality
and is used by the tests to cross-check the incremental mode.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from . import source_lang as ast
from . import source_semantics as src
from . import target_ir as ir
from .compiler import Decompiler, compile_program, compile_stmt
from .errors import ActorError, IllFormedIR, UnknownAttribute
from .runtime import (ObjCell, Proc, Resolved, RtConfig, RtHeap, Unresolved,
                      eval as rt_eval, load, next_object, updl)
from .trace import Rule, Status, Trace


# ---------------------------------------------------------------- source -> runtime

def to_target(c: src.SourceConfig, table: ir.MethodTable) -> RtConfig:
    layout = table.layout
    heap = RtHeap(table.attr_count, capacity=max(8, c.heap.count))
    heap.counter = c.heap.count
    for ref, store in c.heap.objects.items():
        attrs = [0] * table.attr_count
        for name, value in store.items():
            if name not in layout:
                raise UnknownAttribute(name)
            attrs[layout[name]] = value
        procs = deque(Proc(compile_stmt(cl.stmt, ir.EXIT, None, layout), cl.destiny)
                      for cl in c.queues.get(ref, ()))
        heap.objects[ref] = ObjCell(attrs, procs)
    for ref, value in c.heap.futures.items():
        heap.futures[ref] = Unresolved() if value is None else Resolved(value)
    sched = [ref for ref in sorted(c.queues) if c.queues[ref]]
    return RtConfig(heap, sched)


# ---------------------------------------------------------------- runtime -> source

def _store(names, attrs) -> dict:
    return {names[i]: v for i, v in enumerate(attrs) if v}


def _queue(dec: Decompiler, procq) -> tuple:
    out = []
    for p in procq:
        stmt = dec.stmt(p.stmt)
        if stmt is None:
            raise IllFormedIR("process continuation ended without a return")
        out.append(src.Closure(stmt, p.destiny))
    return tuple(out)


def _future_value(cell):
    return cell.value if isinstance(cell, Resolved) else None


def from_target(rt: RtConfig, table: ir.MethodTable, decompiler: Decompiler | None = None) -> src.SourceConfig:
    dec = decompiler or Decompiler(table.names)
    heap = rt.heap
    names = dec.names
    objects, queues, futures = {}, {}, {}
    for ref in range(heap.counter):
        cell = heap.objects[ref]
        if cell is not None:
            objects[ref] = _store(names, cell.attrs)
            queues[ref] = _queue(dec, cell.procq)
        fut = heap.futures[ref]
        if fut is not None:
            futures[ref] = _future_value(fut)
    return src.SourceConfig(queues, src.Heap(heap.counter, objects, futures))


class SourceView:
    """Translated-back mirror of a runtime heap, refreshed from its journal."""

    def __init__(self, rt: RtConfig, table: ir.MethodTable, decompiler: Decompiler | None = None):
        self.dec = decompiler or Decompiler(table.names)
        rt.heap.dirty_objects.clear()
        rt.heap.dirty_futures.clear()
        self.config = from_target(rt, table, self.dec)

    def refresh(self, heap: RtHeap) -> set:
        """Apply the pending journal entries; returns the references touched."""
        names = self.dec.names
        c = self.config
        for ref in heap.dirty_objects:
            cell = heap.objects[ref]
            c.heap.objects[ref] = _store(names, cell.attrs)
            c.queues[ref] = _queue(self.dec, cell.procq)
        for ref in heap.dirty_futures:
            c.heap.futures[ref] = _future_value(heap.futures[ref])
        c.heap.count = heap.counter
        touched = heap.dirty_objects | heap.dirty_futures
        heap.dirty_objects.clear()
        heap.dirty_futures.clear()
        return touched


# ---------------------------------------------------------------- checking

@dataclass(frozen=True)
class Failure:
    index: int
    rule: Rule | None
    reason: str

    def __str__(self):
        return f"step {self.index} ({self.rule}): {self.reason}"


@dataclass
class Verdict:
    ok: bool
    failures: list = field(default_factory=list)
    source_trace: Trace | None = None


_MISSING = object()


def _diff(a: src.SourceConfig, b: src.SourceConfig, refs=None) -> str | None:
    """Why ``a`` and ``b`` differ, or None.

    With ``refs`` only those references are compared; the caller guarantees
    that every other entry is unchanged on both sides since they last agreed.
    """
    if a.heap.count != b.heap.count:
        return f"allocation counter {a.heap.count} != {b.heap.count}"
    for what, x, y in (("objects", a.heap.objects, b.heap.objects),
                       ("queues", a.queues, b.queues),
                       ("futures", a.heap.futures, b.heap.futures)):
        if refs is None:
            if x.keys() != y.keys():
                return f"{what} differ in their references"
            keys = x.keys()
        else:
            keys = refs
        for r in keys:
            u, v = x.get(r, _MISSING), y.get(r, _MISSING)
            if u is not v and u != v:
                if u is _MISSING or v is _MISSING:
                    return f"{what} differ in their references ({r})"
                return f"{what}[{r}] differs: {u!r} vs {v!r}"
    return None


def _terminal(config: src.SourceConfig, status: Status) -> str | None:
    busy = any(config.queues.values())
    live = src.enabled_objects(config)
    if status is Status.FINISHED and busy:
        return "runtime finished but source processes remain"
    if status is Status.DEADLOCK and (live or not busy):
        return "runtime deadlocked but the source configuration is not deadlocked"
    if status is Status.FUEL_EXHAUSTED and not live:
        return "runtime ran out of fuel but the source configuration is stuck"
    return None


def check_trace(trace: Trace, program: ast.Program, table: ir.MethodTable | None = None,
                full: bool = False) -> Verdict:
    """Check every step of a runtime trace against the source semantics.

    Uses the trace's snapshots when present, otherwise replays the runtime
    from the initial configuration following the recorded objects. Stops at
    the first failure.
    """
    table = table or compile_program(program)
    if trace.snapshots is not None:
        return _check_snapshots(trace, program, table)

    rt = load(table) if trace.initial is None else trace.initial.copy()
    view = SourceView(rt, table)
    config = src.initial_config(program)
    failures = []
    src_steps = []

    def fail(i, rule, reason):
        failures.append(Failure(i, rule, reason))
        return Verdict(False, failures, Trace(src_steps, trace.status, final=config))

    why = _diff(config, view.config)
    if why:
        return fail(0, None, "initial configurations differ: " + why)

    labels = view.dec
    for i, rec in enumerate(trace.steps):
        expected = next_object(rt.heap, rt.sched)
        if rec.obj != expected:
            return fail(i, rec.rule, f"scheduler selects {expected}, trace has {rec.obj}")
        if not src.enabled(config, rec.obj):
            return fail(i, rec.rule, f"object {rec.obj} is not enabled in the source configuration")
        try:
            nxt, label = src.step(program, config, rec.obj)
            rstep, activated, _ = rt_eval(rec.obj, rt.heap, table, labels)
        except (ActorError, OverflowError) as exc:
            return fail(i, rec.rule, f"{type(exc).__name__}: {exc}")
        for name, got in (("source", label), ("runtime", rstep)):
            if (got.rule, got.stmt, got.spawn) != (rec.rule, rec.stmt, rec.spawn):
                return fail(i, rec.rule, f"{name} step is {got.rule} `{got.stmt}`, trace has {rec.rule} `{rec.stmt}`")
        rt.sched = updl(rt.sched, rec.obj, activated)
        touched = view.refresh(rt.heap)
        if full:
            why = _diff(nxt, from_target(rt, table))
        else:
            why = _diff(nxt, view.config, touched | nxt.touched)
        src_steps.append(label)
        config = nxt
        if why:
            return fail(i, rec.rule, "successor configurations differ: " + why)

    why = _terminal(config, trace.status)
    if why:
        return fail(len(trace.steps), None, why)
    return Verdict(True, [], Trace(src_steps, trace.status, final=config))


def _check_snapshots(trace: Trace, program, table) -> Verdict:
    shots = trace.snapshots
    dec = Decompiler(table.names)
    config = src.initial_config(program)
    failures = []
    src_steps = []

    def fail(i, rule, reason):
        failures.append(Failure(i, rule, reason))
        return Verdict(False, failures, Trace(src_steps, trace.status, final=config))

    if len(shots) != len(trace.steps) + 1:
        return fail(0, None, "snapshot count does not match the number of steps")
    why = _diff(config, from_target(shots[0], table, dec))
    if why:
        return fail(0, None, "initial configurations differ: " + why)
    for i, rec in enumerate(trace.steps):
        before, after = shots[i], shots[i + 1]
        expected = next_object(before.heap, before.sched)
        if rec.obj != expected:
            return fail(i, rec.rule, f"scheduler selects {expected}, trace has {rec.obj}")
        if not src.enabled(config, rec.obj):
            return fail(i, rec.rule, f"object {rec.obj} is not enabled in the source configuration")
        try:
            nxt, label = src.step(program, config, rec.obj)
        except (ActorError, OverflowError) as exc:
            return fail(i, rec.rule, f"{type(exc).__name__}: {exc}")
        if (label.rule, label.stmt, label.spawn) != (rec.rule, rec.stmt, rec.spawn):
            return fail(i, rec.rule, f"source step is {label.rule} `{label.stmt}`")
        if rec.activated is not None and after.sched != updl(before.sched, rec.obj, rec.activated):
            return fail(i, rec.rule, "scheduler list was not updated by rotation")
        src_steps.append(label)
        config = nxt
        why = _diff(nxt, from_target(after, table, dec))
        if why:
            return fail(i, rec.rule, "successor configurations differ: " + why)
    why = _terminal(config, trace.status)
    if why:
        return fail(len(trace.steps), None, why)
    return Verdict(True, [], Trace(src_steps, trace.status, final=config))
