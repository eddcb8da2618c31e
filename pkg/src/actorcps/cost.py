"""Per-object trace cost under a statement cost model, and the checks built on it."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction

from .trace import Rule


@dataclass(frozen=True)
class CostModel:
    name: str
    weights: dict

    def __post_init__(self):
        missing = [r for r in Rule if r not in self.weights]
        if missing:
            raise ValueError(f"cost model {self.name!r} has no weight for {', '.join(map(str, missing))}")

    def weight(self, rule: Rule) -> Fraction:
        return self.weights[rule]


def uniform(name: str, value=1) -> CostModel:
    return CostModel(name, {r: Fraction(value) for r in Rule})


STEPS = uniform("steps")
MEMORY = CostModel("memory", {r: Fraction(1 if r is Rule.NEW else 0) for r in Rule})
BUILTIN = {"steps": STEPS, "memory": MEMORY}


def load_model(path) -> CostModel:
    """Read a model file: the first non-blank line is the name, then
    ``Rule=weight`` lines. Rules that are not listed cost 0."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError(f"{path}: empty cost model file")
    weights = {r: Fraction(0) for r in Rule}
    for ln in lines[1:]:
        kind, sep, value = ln.partition("=")
        if not sep:
            raise ValueError(f"{path}: expected kind=weight, got {ln!r}")
        weights[Rule(kind.strip())] = Fraction(value.strip())
    return CostModel(lines[0], weights)


@dataclass(frozen=True)
class CostReport:
    per_object: dict
    total: Fraction


def cost_of_trace(steps, model: CostModel) -> CostReport:
    per = {}
    for s in steps:
        per[s.obj] = per.get(s.obj, Fraction(0)) + model.weight(s.rule)
    return CostReport(per, sum(per.values(), Fraction(0)))


def check_preservation(rt_steps, src_steps, model: CostModel) -> tuple[bool, dict]:
    """Per-object costs of the two traces must be exactly equal.

    The diff maps each mismatching object to its (runtime, source) costs.
    """
    a = cost_of_trace(rt_steps, model).per_object
    b = cost_of_trace(src_steps, model).per_object
    diff = {o: (a.get(o, Fraction(0)), b.get(o, Fraction(0)))
            for o in sorted(a.keys() | b.keys()) if a.get(o) != b.get(o)}
    return not diff, diff


def check_bound(report: CostReport, o: int, bound) -> bool:
    return report.per_object.get(o, Fraction(0)) <= Fraction(bound)


@dataclass(frozen=True)
class BoundRow:
    program: str
    n: int
    obj: int
    bound: Fraction


def read_bounds(path) -> list[BoundRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [BoundRow(r["program"], int(r["n"]), int(r["object"]), Fraction(r["bound"]))
                for r in csv.DictReader(fh)]
