from __future__ import annotations

from pathlib import Path

import pytest

from actorcps import bench, runtime
from actorcps.compiler import compile_program
from actorcps.parser import parse_file, parse_program

EXAMPLES = Path(__file__).resolve().parents[1] / "src" / "actorcps" / "examples"

TRIVIAL = "main() { skip; }"


@pytest.fixture
def mapreduce():
    return parse_file(EXAMPLES / "mapreduce.act")


@pytest.fixture
def deadlock():
    return parse_file(EXAMPLES / "deadlock.act")


def run_rt(program, fuel=100_000, snapshots=False):
    table = compile_program(program)
    return table, runtime.run_rt(runtime.load(table), table, fuel, snapshots=snapshots)


def attrs_of(table, trace, obj=0):
    return dict(zip(table.names, trace.final.heap.objects[obj].attrs))


def small_corpus():
    """Hand-written programs covering each rule at least once."""
    texts = {
        "trivial": TRIVIAL,
        "branches": "main() { x := 3; if (x == 3 && !(x == 4)) { y := 1; } else { y := 2; } "
                    "while (!(x == 0)) { x := x - 1; } }",
        "self_async": "m(a) { r := a + 1; return r; } main() { me := new; f := me!m(v); await f; y := f.get; }",
        "rotation": "slow() { x := 1; x := 2; x := 3; return x; } fast() { return x; } "
                    "main() { a := new; f := a!slow(); g := a!fast(); await f; await g; r := f.get; s := g.get; }",
        "sync_chain": "inc(v) { r := v + 1; return r; } twice(v) { r := v; r := inc(r); r := inc(r); return r; } "
                      "main() { z := 5; z := twice(z); }",
    }
    out = {name: parse_program(t) for name, t in texts.items()}
    out["mapreduce"] = parse_file(EXAMPLES / "mapreduce.act")
    out["deadlock"] = parse_file(EXAMPLES / "deadlock.act")
    for fam in bench.FAMILIES:
        out[f"{fam}_5"] = bench.gen(fam, 5)
    return out


# ---------------------------------------------------------------- acceptance report

ACCEPTANCE = pytest.StashKey[dict]()
CRITERIA = {
    1: "trace soundness",
    2: "consumption preservation",
    3: "small-model containment",
    4: "mapreduce end to end",
    5: "asymptotic step counts",
    6: "determinism",
    7: "inverse translation identity",
    8: "negative controls",
}


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of an acceptance criterion for the final summary."""
    def record(number: int, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} {number} {CRITERIA[number]}: {detail}"
        request.config.stash[ACCEPTANCE][number] = line
        print(line)
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in CRITERIA:
        terminalreporter.write_line(results.get(n, f"FAIL {n} {CRITERIA[n]}: did not complete"))
