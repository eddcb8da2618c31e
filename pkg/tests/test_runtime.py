from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from actorcps import randprog, runtime
from actorcps import target_ir as ir
from actorcps.compiler import compile_program
from actorcps.errors import Blocked
from actorcps.parser import parse_program
from actorcps.runtime import (Proc, Resolved, RtHeap, Unresolved, load, newq_add,
                              newq_del, next_object, updl)
from actorcps.trace import Rule, Status

from conftest import TRIVIAL, attrs_of, run_rt


def test_scheduler_list_algebra():
    assert newq_add([1, 2, 3], 2, 1) == [3, 1, 2]
    assert newq_add([1, 2], 2, 5) == [1, 2, 5]
    assert newq_del([1, 2, 3], 2, ()) == [3, 1]
    assert newq_del([1, 2, 3], 2, ("p",)) == [3, 1, 2]
    assert updl([1, 2], 1, [1, 4]) == [2, 1, 4]
    assert updl([1, 2, 3], 2, []) == [3, 1]


def test_load_initial_configuration():
    table = compile_program(parse_program(TRIVIAL))
    rt = load(table)
    assert rt.sched == [0]
    assert rt.heap.counter == 2
    assert rt.heap.object_refs() == [0] and rt.heap.future_refs() == [1]
    assert rt.heap.futures[1] == Unresolved()
    assert [p.destiny for p in rt.heap.objects[0].procq] == [1]


def test_trivial_main_finishes_in_two_steps():
    table, trace = run_rt(parse_program(TRIVIAL))
    assert trace.status is Status.FINISHED
    assert list(trace.labels()) == [(0, Rule.SKIP), (0, Rule.RETURN_A)]
    assert trace.final.heap.futures[1] == Resolved(0)
    assert trace.final.sched == []


def test_return_only_main_finishes_in_one_step():
    table, trace = run_rt(parse_program("main() { return __unit; }"))
    assert len(trace.steps) == 1 and trace.status is Status.FINISHED


def test_mapreduce_result(mapreduce):
    table, trace = run_rt(mapreduce)
    assert trace.status is Status.FINISHED
    assert attrs_of(table, trace)["r"] == 42
    assert trace.final.heap.object_refs() == [0, 2, 3]


def test_deadlock_detected(deadlock):
    table, trace = run_rt(deadlock)
    assert trace.status is Status.DEADLOCK
    assert len(trace.steps) == 8
    heap = trace.final.heap
    assert next_object(heap, trace.final.sched) is None
    assert any(heap.objects[o].procq for o in heap.object_refs())


def test_fuel_exhaustion():
    p = parse_program("main() { x := 1; while (x == 1) { skip; } }")
    table, trace = run_rt(p, fuel=50)
    assert trace.status is Status.FUEL_EXHAUSTED and len(trace.steps) == 50


def _single(text):
    table = compile_program(parse_program(text))
    rt = load(table)
    return table, rt


def test_eval_rules_step_by_step():
    table, rt = _single("m() { return y; } main() { x := 2 + 3; o := new; f := o!m(); y := m(); await f; }")
    L = table.layout
    step, act, heap = runtime.eval(0, rt.heap, table)
    assert step.rule is Rule.ASSIGN and heap.objects[0].attrs[L["x"]] == 5 and act == [0]
    step, act, _ = runtime.eval(0, heap, table)
    assert step.rule is Rule.NEW and heap.objects[0].attrs[L["o"]] == 2 and heap.counter == 3
    step, act, _ = runtime.eval(0, heap, table)
    assert step.rule is Rule.ASYNC and act == [0, 2]
    assert step.spawn.callee == 2 and step.spawn.destiny == 3
    assert isinstance(heap.futures[3], Unresolved) and len(heap.objects[2].procq) == 1
    step, act, _ = runtime.eval(0, heap, table)
    assert step.rule is Rule.SYNC
    head = heap.objects[0].procq[0].stmt
    assert head == ir.Return(L["y"], L["y"], head.k)
    step, _, _ = runtime.eval(0, heap, table)
    assert step.rule is Rule.RETURN_S
    step, act, _ = runtime.eval(0, heap, table)
    assert step.rule is Rule.AWAIT_II and act == [0]
    step, act, _ = runtime.eval(2, heap, table)
    assert step.rule is Rule.RETURN_A and act == [] and heap.futures[3] == Resolved(0)
    step, _, _ = runtime.eval(0, heap, table)
    assert step.rule is Rule.AWAIT_I


def test_async_to_busy_callee_does_not_reactivate():
    table, rt = _single("m() { return y; } main() { o := new; f := o!m(); g := o!m(); }")
    heap = rt.heap
    runtime.eval(0, heap, table)
    assert runtime.eval(0, heap, table)[1] == [0, 2]
    assert runtime.eval(0, heap, table)[1] == [0]


def test_self_async_keeps_single_entry():
    table, rt = _single("m() { return y; } main() { me := new; me := 0; f := me!m(); }")
    heap = rt.heap
    runtime.eval(0, heap, table)
    runtime.eval(0, heap, table)
    assert runtime.eval(0, heap, table)[1] == [0]


def test_get_on_unresolved_future_blocks():
    table, rt = _single("m() { return y; } main() { o := new; f := o!m(); x := f.get; }")
    heap = rt.heap
    runtime.eval(0, heap, table)
    runtime.eval(0, heap, table)
    assert next_object(heap, [0, 2]) == 2
    with pytest.raises(Blocked):
        runtime.eval(0, heap, table)


def test_heap_arrays_double():
    h = RtHeap(1, capacity=2)
    refs = [h.new_object() for _ in range(5)]
    assert refs == [0, 1, 2, 3, 4]
    assert len(h.objects) == 8 and len(h.futures) == 8
    assert h.object_refs() == refs


def test_heap_copy_is_independent():
    h = RtHeap(2)
    o = h.new_object()
    h.push(o, Proc(ir.EXIT, 0))
    c = h.copy()
    assert c == h
    h.set_attr(o, 1, 9)
    assert c != h and c.objects[o].attrs == [0, 0]


def _sched_invariants(trace):
    for before, step, after in zip(trace.snapshots, trace.steps, trace.snapshots[1:]):
        assert len(set(after.sched)) == len(after.sched)
        assert after.sched == updl(before.sched, step.obj, step.activated)
        for o in after.heap.object_refs():
            if after.heap.objects[o].procq:
                assert o in after.sched


def test_runtime_is_deterministic(mapreduce):
    a = run_rt(mapreduce)[1]
    b = run_rt(mapreduce)[1]
    assert a.steps == b.steps and a.final.heap == b.final.heap


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_scheduler_invariants_on_random_programs(seed):
    p = randprog.generate(seed, fuel=2_000)
    _, trace = run_rt(p, fuel=2_000, snapshots=True)
    _sched_invariants(trace)
    if trace.status is Status.FINISHED:
        assert not any(trace.final.heap.objects[o].procq for o in trace.final.heap.object_refs())
