from __future__ import annotations

from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from actorcps import bench, bridge, cost
from actorcps.cost import MEMORY, STEPS, CostModel, cost_of_trace
from actorcps.parser import parse_program
from actorcps.trace import Rule, Step

from conftest import run_rt, small_corpus


def _steps(objs, rule=Rule.SKIP):
    return [Step(o, rule, "skip;") for o in objs]


def test_steps_model_counts_steps():
    assert cost_of_trace(_steps([0] * 10), STEPS).per_object == {0: 10}


def test_empty_trace():
    r = cost_of_trace([], STEPS)
    assert r.per_object == {} and r.total == 0


def test_memory_model_on_mapreduce(mapreduce):
    _, trace = run_rt(mapreduce)
    r = cost_of_trace(trace.steps, MEMORY)
    assert r.per_object == {0: 2, 2: 0, 3: 0}
    assert {o: c for o, c in r.per_object.items() if c} == {0: 2}


def test_model_must_be_total():
    with pytest.raises(ValueError):
        CostModel("partial", {Rule.NEW: Fraction(1)})


def test_check_bound_is_non_strict():
    r = cost.CostReport({0: Fraction(5)}, Fraction(5))
    assert cost.check_bound(r, 0, 5)
    assert not cost.check_bound(cost.CostReport({0: Fraction(6)}, Fraction(6)), 0, 5)
    assert cost.check_bound(r, 7, 0)


def _independent_count(steps, model):
    out = Counter()
    for s in steps:
        out[s.obj] += model.weights[s.rule]
    return dict(out)


@pytest.mark.parametrize("name,program", sorted(small_corpus().items()))
def test_preservation_on_corpus(name, program):
    table, trace = run_rt(program)
    verdict = bridge.check_trace(trace, program, table)
    assert verdict.ok
    for model in (STEPS, MEMORY):
        ok, diff = cost.check_preservation(trace.steps, verdict.source_trace.steps, model)
        assert ok and diff == {}
        assert cost_of_trace(trace.steps, model).per_object == _independent_count(verdict.source_trace.steps, model)


def test_missing_step_breaks_preservation(mapreduce):
    table, trace = run_rt(mapreduce)
    src_steps = bridge.check_trace(trace, mapreduce, table).source_trace.steps
    ok, diff = cost.check_preservation(trace.steps[:-1], src_steps, STEPS)
    assert not ok and list(diff) == [trace.steps[-1].obj]


rules = st.sampled_from(list(Rule))
step_lists = st.lists(st.builds(lambda o, r: Step(o, r, ""), st.integers(0, 4), rules), max_size=40)
weights = st.fixed_dictionaries({r: st.fractions(min_value=0, max_value=10, max_denominator=7) for r in Rule})


@settings(max_examples=100, deadline=None)
@given(step_lists, step_lists, weights)
def test_additivity_and_monotonicity(a, b, w):
    m = CostModel("w", w)
    ca, cb, cab = (cost_of_trace(x, m) for x in (a, b, a + b))
    for o in set(ca.per_object) | set(cb.per_object):
        assert cab.per_object[o] == ca.per_object.get(o, 0) + cb.per_object.get(o, 0)
        assert cab.per_object[o] >= ca.per_object.get(o, 0)
    assert cab.total == ca.total + cb.total
    assert cost_of_trace(a, STEPS).total == len(a)


def test_load_model_file(tmp_path):
    f = tmp_path / "m.txt"
    f.write_text("# allocation and messages\nalloc\nNew=1\nAsync = 1/2\n")
    m = cost.load_model(f)
    assert m.name == "alloc"
    assert m.weight(Rule.NEW) == 1 and m.weight(Rule.ASYNC) == Fraction(1, 2)
    assert m.weight(Rule.SKIP) == 0
    f.write_text("bad\nNew\n")
    with pytest.raises(ValueError):
        cost.load_model(f)
    f.write_text("bad\nNope=1\n")
    with pytest.raises(ValueError):
        cost.load_model(f)


def test_read_bounds(tmp_path):
    f = tmp_path / "b.csv"
    f.write_text("program,n,object,bound\nprimes_range,50,0,8675/2\n")
    assert cost.read_bounds(f) == [cost.BoundRow("primes_range", 50, 0, Fraction(8675, 2))]


def test_primes_range_quadratic_bound():
    def cost0(n):
        table, trace = run_rt(bench.gen("primes_range", n), fuel=10**7)
        return cost_of_trace(trace.steps, STEPS)

    k = cost0(10).per_object[0] / Fraction(10 ** 2)
    assert cost.check_bound(cost0(50), 0, 50 ** 2 * k)


def test_sync_cost_is_attributed_to_caller():
    p = parse_program("inc(v) { r := v + 1; return r; } main() { z := inc(z); }")
    _, trace = run_rt(p)
    assert set(cost_of_trace(trace.steps, STEPS).per_object) == {0}
