"""Step labels, traces and the JSONL trace format used by both interpreters."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Any


class Rule(str, enum.Enum):
    ASSIGN = "Assign"
    NEW = "New"
    GET = "Get"
    AWAIT_I = "AwaitI"
    AWAIT_II = "AwaitII"
    ASYNC = "Async"
    SYNC = "Sync"
    RETURN_A = "ReturnA"
    RETURN_S = "ReturnS"
    IF_T = "IfT"
    IF_F = "IfF"
    WHILE_T = "WhileT"
    WHILE_F = "WhileF"
    SKIP = "Skip"

    def __str__(self):
        return self.value


class Status(str, enum.Enum):
    FINISHED = "Finished"
    DEADLOCK = "Deadlock"
    FUEL_EXHAUSTED = "FuelExhausted"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Spawn:
    callee: int
    method: str
    destiny: int
    args: tuple[int, ...]


@dataclass(frozen=True)
class Step:
    """One executed statement: the object that ran it, the rule that fired,
    and the statement text. ``activated`` is only filled in by the runtime."""

    obj: int
    rule: Rule
    stmt: str
    spawn: Spawn | None = None
    activated: tuple[int, ...] | None = None

    def to_json(self, i: int) -> dict:
        spawn = None
        if self.spawn is not None:
            s = self.spawn
            spawn = {"callee": s.callee, "method": s.method, "destiny": s.destiny, "args": list(s.args)}
        return {"i": i, "obj": self.obj, "rule": self.rule.value, "stmt": self.stmt, "spawn": spawn}

    @classmethod
    def from_json(cls, rec: dict) -> "Step":
        sp = rec.get("spawn")
        spawn = Spawn(sp["callee"], sp["method"], sp["destiny"], tuple(sp["args"])) if sp else None
        return cls(rec["obj"], Rule(rec["rule"]), rec["stmt"], spawn)


@dataclass
class Trace:
    steps: list
    status: Status
    final: Any = None
    snapshots: list | None = None
    initial: Any = None

    def __len__(self):
        return len(self.steps)

    def labels(self) -> tuple:
        return tuple((s.obj, s.rule) for s in self.steps)

    def per_object_counts(self) -> dict:
        out = {}
        for s in self.steps:
            out[s.obj] = out.get(s.obj, 0) + 1
        return out


def dumps_jsonl(steps) -> str:
    return "".join(json.dumps(s.to_json(i), separators=(",", ":")) + "\n" for i, s in enumerate(steps))


def write_jsonl(steps, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_jsonl(steps))


def read_jsonl(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return [Step.from_json(json.loads(line)) for line in fh if line.strip()]
