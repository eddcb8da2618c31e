"""Command-line front end.

Exit codes: 0 success, 1 violation or runtime error, 2 usage or parse error,
3 deadlock, 4 fuel exhausted.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import bench, bridge, cost, runtime, source_semantics
from .compiler import compile_program
from .errors import ActorError, ValidationError
from .parser import ActSyntaxError, parse_file
from .target_ir import dump_table
from .trace import Status, Trace, dumps_jsonl, read_jsonl

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_DEADLOCK, EXIT_FUEL = 0, 1, 2, 3, 4
STATUS_EXIT = {Status.FINISHED: EXIT_OK, Status.DEADLOCK: EXIT_DEADLOCK, Status.FUEL_EXHAUSTED: EXIT_FUEL}
DEFAULT_FUEL = 1_000_000


class UsageError(Exception):
    pass


def _out(text: str = "") -> None:
    sys.stdout.write(text + "\n")


def _write(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _read_script(path) -> list[int]:
    """Object references to schedule: whitespace-separated integers, or a
    JSONL trace whose ``obj`` fields are replayed."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        return [json.loads(ln)["obj"] for ln in text.splitlines() if ln.strip()]
    return [int(tok) for tok in text.split()]


def _policy(spec: str | None, seed: int):
    if spec in (None, "random"):
        return source_semantics.RandomPolicy(seed)
    if spec == "rr":
        return source_semantics.RoundRobinPolicy()
    if spec.startswith("script:"):
        return source_semantics.ScriptedPolicy(_read_script(spec[len("script:"):]))
    raise UsageError(f"unknown scheduler {spec!r} (expected rr, random or script:FILE)")


def _run_rt(program, fuel):
    table = compile_program(program)
    return table, runtime.run_rt(runtime.load(table), table, fuel)


def _final_attrs(trace: Trace, sem: str, table=None) -> dict:
    if sem == "rt":
        attrs = trace.final.heap.objects[0].attrs
        return {name: v for name, v in zip(table.names, attrs) if v}
    return dict(trace.final.heap.objects[0])


# ---------------------------------------------------------------- verbs

def cmd_run(args) -> int:
    program = parse_file(args.file)
    if args.sem == "rt":
        if args.scheduler not in (None, "rr"):
            raise UsageError("the runtime semantics always schedules round-robin")
        table, trace = _run_rt(program, args.fuel)
    else:
        table = None
        trace = source_semantics.run(program, _policy(args.scheduler, args.seed), args.fuel)
    if args.trace:
        _write(args.trace, dumps_jsonl(trace.steps))
    counts = trace.per_object_counts()
    _out(f"status {trace.status} steps {len(trace.steps)}")
    _out("steps per object " + " ".join(f"{o}:{counts[o]}" for o in sorted(counts)))
    attrs = _final_attrs(trace, args.sem, table)
    _out("object 0 " + " ".join(f"{k}={v}" for k, v in attrs.items()))
    return STATUS_EXIT[trace.status]


def cmd_compile(args) -> int:
    table = compile_program(parse_file(args.file))
    if args.dump:
        sys.stdout.write(dump_table(table))
    else:
        _out(f"compiled {len(table.methods)} methods, {table.attr_count} attributes")
    return EXIT_OK


def cmd_check(args) -> int:
    program = parse_file(args.file)
    table = compile_program(program)
    if args.replay:
        trace = Trace(read_jsonl(args.replay), Status(args.status))
    else:
        trace = runtime.run_rt(runtime.load(table), table, args.fuel)
    verdict = bridge.check_trace(trace, program, table)
    bad = {f.index: f for f in verdict.failures}
    for i, s in enumerate(trace.steps):
        if i in bad:
            _out(f"FAIL {i} {s.obj} {s.rule} {bad[i].reason}")
            break
        if not args.quiet:
            _out(f"OK {i} {s.obj} {s.rule}")
    if verdict.ok:
        _out(f"SOUND {len(trace.steps)} steps")
        return EXIT_OK
    first = verdict.failures[0]
    if first.index >= len(trace.steps):
        _out(f"FAIL {first.index} {first.reason}")
    _out(f"UNSOUND at {first.index}")
    return EXIT_VIOLATION


def _model(args) -> cost.CostModel:
    if args.model_file:
        return cost.load_model(args.model_file)
    if args.model not in cost.BUILTIN:
        raise UsageError(f"unknown cost model {args.model!r} (built in: {', '.join(cost.BUILTIN)})")
    return cost.BUILTIN[args.model]


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else str(q)


def cmd_cost(args) -> int:
    program = parse_file(args.file)
    model = _model(args)
    table, trace = _run_rt(program, args.fuel)
    report = cost.cost_of_trace(trace.steps, model)
    verdict = bridge.check_trace(trace, program, table)
    preserved = verdict.ok and cost.check_preservation(trace.steps, verdict.source_trace.steps, model)[0]
    _out(f"model {model.name} total {_fmt(report.total)}")
    if args.per_object:
        for o in sorted(report.per_object):
            _out(f"object {o} {_fmt(report.per_object[o])}")
    _out(f"preserved {'yes' if preserved else 'no'}")
    return EXIT_OK if preserved else EXIT_VIOLATION


def cmd_bench(args) -> int:
    if args.family not in bench.FAMILIES:
        raise UsageError(f"unknown family {args.family!r} (expected one of {', '.join(bench.FAMILIES)})")
    if args.source:
        sys.stdout.write(bench.source_text(args.family, args.n))
        return EXIT_OK
    ns = [int(x) for x in args.sweep.split(",")] if args.sweep else [args.n]
    if any(n < 1 for n in ns):
        raise UsageError("n must be at least 1")
    rows = bench.sweep(args.family, ns, _model(args))
    fields = ["family", "n", "steps", "wall_nanos"]
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fields, lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    else:
        w = csv.DictWriter(sys.stdout, fields, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return EXIT_OK


def cmd_bounds(args) -> int:
    model = _model(args)
    target = args.file
    path = Path(target)
    rows = cost.read_bounds(args.bounds)
    names = {target, path.name, path.stem}
    rows = [r for r in rows if r.program in names]
    if not rows:
        raise UsageError(f"no rows for {target!r} in {args.bounds}")
    failed = 0
    cache = {}
    for r in rows:
        key = r.n if target in bench.FAMILIES else None
        if key not in cache:
            program = bench.gen(target, r.n) if target in bench.FAMILIES else parse_file(target)
            cache[key] = cost.cost_of_trace(_run_rt(program, args.fuel)[1].steps, model)
        report = cache[key]
        ok = cost.check_bound(report, r.obj, r.bound)
        used = report.per_object.get(r.obj, Fraction(0))
        _out(f"{'WITHIN' if ok else 'EXCEEDS'} {r.program} n={r.n} object {r.obj} "
             f"cost {_fmt(used)} bound {_fmt(r.bound)}")
        failed += not ok
    return EXIT_OK if not failed else EXIT_VIOLATION


# ---------------------------------------------------------------- wiring

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="actorcps", description="Actor programs, their compiled form, and the checks between them.")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="execute a program")
    p.add_argument("file")
    p.add_argument("--sem", choices=("source", "rt"), default="source")
    p.add_argument("--scheduler", help="rr, random or script:FILE (source semantics only)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.add_argument("--trace", help="write the trace as JSONL")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compile", help="compile and optionally dump the method table")
    p.add_argument("file")
    p.add_argument("--dump", action="store_true")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("check", help="check a runtime trace step by step against the source semantics")
    p.add_argument("file")
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.add_argument("--replay", help="check this JSONL trace instead of a fresh run")
    p.add_argument("--status", default="Finished", choices=[s.value for s in Status],
                   help="how the replayed run ended")
    p.add_argument("--quiet", action="store_true", help="only print failures and the summary")
    p.set_defaults(func=cmd_check)

    def add_model(p):
        p.add_argument("--model", default="steps")
        p.add_argument("--model-file")

    p = sub.add_parser("cost", help="cost of the runtime trace")
    p.add_argument("file")
    add_model(p)
    p.add_argument("--per-object", action="store_true")
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("bench", help="step counts of a benchmark family")
    p.add_argument("family")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--sweep", help="comma-separated list of n")
    p.add_argument("--csv")
    p.add_argument("--source", action="store_true", help="print the generated program instead")
    add_model(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("bounds", help="check per-object costs against upper bounds")
    p.add_argument("file", help="program file or benchmark family")
    p.add_argument("--bounds", required=True)
    add_model(p)
    p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    p.set_defaults(func=cmd_bounds)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ActSyntaxError, ValidationError, UsageError, OSError, ValueError) as exc:
        print(f"actorcps: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ActorError, OverflowError) as exc:
        print(f"actorcps: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    raise SystemExit(main())
