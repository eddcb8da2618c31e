"""Parameterised benchmark programs and step-count sweeps.

The language only has ``==`` comparisons and ``+``/``-`` arithmetic, so the
generators avoid division altogether:

* primality walks the candidate divisor ``d`` down from ``n`` while keeping
  ``n = q*d + r``. Moving to ``d-1`` adds ``q`` to the remainder one unit at
  a time, wrapping when it reaches the divisor. Each remainder is handed to a
  fresh checker object. Summed over all divisors this is about ``n ln n``
  unit steps plus a constant amount of work per divisor.
* primes_range keeps a linked list of divisor objects, one per integer seen
  so far, each with a countdown that hits zero exactly on its multiples.
  Testing every ``i`` walks the whole list, which is quadratic in ``n``.
* logs computes ``floor(log2 i)`` for every ``i`` by doubling up to the
  smallest power of two above ``i``.
"""

from __future__ import annotations

import time

from . import source_lang as ast
from .compiler import compile_program
from .cost import STEPS, CostModel, cost_of_trace
from .parser import parse_program
from .runtime import load, run_rt

FAMILIES = ("primality_low", "primality_high", "logs", "primes_range", "mapreduce")

_STAIRCASE = """\
  j := q;
  d := d - 1;
  if (r == d) { r := 0; q := q + 1; } else { skip; }
  while (!(j == 0)) {
    r := r + 1;
    if (r == d) { r := 0; q := q + 1; } else { skip; }
    j := j - 1;
  }
"""


def _primality(n: int, high: bool) -> str:
    lines = []
    if high:
        lines.append("""\
check(rem, before) {
  res := 0;
  if (rem == 0) { res := 1; } else { skip; }
  pv := before;
  return res;
}
result() { return res; }
previous() { return pv; }
""")
    else:
        lines.append("""\
check(rem) {
  res := 0;
  if (rem == 0) { res := 1; } else { skip; }
  return res;
}
""")
    lines.append(f"""\
main() {{
  n := {n}; d := {n}; q := 1; r := 0; cnt := 0; last := 0;
  while (!(d == 1) && !(d == 2)) {{
{_indent(_STAIRCASE, 2)}
    c := new;
""")
    if high:
        lines.append("""\
    f := c!check(r, last);
    last := c;
  }
  x := last;
  while (!(x == 0)) {
    f := x!result();
    await f;
    y := f.get;
    cnt := cnt + y;
    g := x!previous();
    await g;
    x := g.get;
  }
""")
    else:
        lines.append("""\
    f := c!check(r);
    await f;
    y := f.get;
    cnt := cnt + y;
  }
""")
    lines.append("""\
  prime := 0;
  if (cnt == 0 && !(n == 1)) { prime := 1; } else { skip; }
}
""")
    return "".join(lines)


def _indent(text: str, levels: int) -> str:
    pad = "  " * (levels - 1)
    return "".join(pad + ln + "\n" if ln.strip() else "\n" for ln in text.splitlines())


def _primes_range(n: int) -> str:
    return f"""\
init(v) {{
  d := v;
  c := v;
  return d;
}}
tick() {{
  c := c - 1;
  hit := 0;
  if (c == 0) {{ hit := 1; c := d; }} else {{ skip; }}
  return hit;
}}
next() {{ return nxt; }}
link(x) {{
  nxt := x;
  return nxt;
}}
main() {{
  i := 2; primes := 0; head := 0; tail := 0;
  while (!(i == {n + 1})) {{
    cnt := 0;
    x := head;
    while (!(x == 0)) {{
      f := x!tick();
      h := f.get;
      cnt := cnt + h;
      g := x!next();
      x := g.get;
    }}
    if (cnt == 0) {{ primes := primes + 1; }} else {{ skip; }}
    t := new;
    f := t!init(i);
    u := f.get;
    if (head == 0) {{ head := t; }} else {{ g := tail!link(t); u := g.get; }}
    tail := t;
    i := i + 1;
  }}
}}
"""


def _logs(n: int) -> str:
    return f"""\
log(bound) {{
  p := 1;
  k := 0;
  while (!(p == bound)) {{
    p := p + p;
    k := k + 1;
  }}
  k := k - 1;
  return k;
}}
main() {{
  w := new;
  i := 1; pw := 2; total := 0;
  while (!(i == {n + 1})) {{
    f := w!log(pw);
    await f;
    x := f.get;
    total := total + x;
    i := i + 1;
    if (i == pw) {{ pw := pw + pw; }} else {{ skip; }}
  }}
}}
"""


DESK_VALUES = (4, 38)


def _mapreduce(n: int, values=None) -> str:
    if values is None:
        values = [DESK_VALUES[i] if i < len(DESK_VALUES) else i + 1 for i in range(n)]
    if len(values) != n:
        raise ValueError(f"need {n} values, got {len(values)}")
    ids = range(1, n + 1)
    body = [" ".join(f"v{i} := {v};" for i, v in zip(ids, values))]
    body.append(" ".join(f"node{i} := new;" for i in ids))
    body.append(" ".join(f"f{i} := node{i}!map(v{i});" for i in ids))
    body.append(" ".join(f"await f{i};" for i in ids))
    body.append(" ".join(f"r{i} := f{i}.get;" for i in ids))
    if n == 1:
        body.append("r := r1;")
    else:
        body.append("r := reduce(r1, r2);")
        body.extend(f"r := reduce(r, r{i});" for i in range(3, n + 1))
    body.append("return __unit;")
    main = "\n".join("  " + ln for ln in body)
    return f"""\
map(v) {{
  r := v;
  return r;
}}
reduce(a, b) {{
  r := a + b;
  return r;
}}
main() {{
{main}
}}
"""


def source_text(family: str, n: int, **kw) -> str:
    if n < 1:
        raise ValueError("n must be at least 1")
    if family == "primality_low":
        return _primality(n, high=False)
    if family == "primality_high":
        return _primality(n, high=True)
    if family == "primes_range":
        return _primes_range(n)
    if family == "logs":
        return _logs(n)
    if family == "mapreduce":
        return _mapreduce(n, kw.get("values"))
    raise ValueError(f"unknown benchmark family {family!r}; expected one of {', '.join(FAMILIES)}")


def gen(family: str, n: int, **kw) -> ast.Program:
    return parse_program(source_text(family, n, **kw))


def steps(family: str, n: int, model: CostModel = STEPS, fuel: int = 50_000_000):
    table = compile_program(gen(family, n))
    trace = run_rt(load(table), table, fuel)
    return cost_of_trace(trace.steps, model).total


def sweep(family: str, n_list, model: CostModel = STEPS, repeat: int = 3) -> list[dict]:
    """One row per n: total cost under ``model`` and best-of-``repeat`` wall time."""
    rows = []
    for n in n_list:
        table = compile_program(gen(family, n))
        best = None
        total = None
        for _ in range(repeat):
            start = time.perf_counter_ns()
            trace = run_rt(load(table), table, fuel=50_000_000)
            elapsed = time.perf_counter_ns() - start
            best = elapsed if best is None else min(best, elapsed)
            total = cost_of_trace(trace.steps, model).total
        value = int(total) if total.denominator == 1 else str(total)
        rows.append({"family": family, "n": n, "steps": value, "wall_nanos": best})
    return rows
