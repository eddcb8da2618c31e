"""Nondeterministic small-step semantics of the source language.

A configuration is a map from object references to closure queues plus a
global heap. Steps never mutate their input: :func:`step` returns a new
configuration that shares every untouched dict with the old one, so
configurations are cheap to keep around for exhaustive exploration.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import source_lang as ast
from .errors import (DanglingRef, MalformedProcess, NotEnabled, UnknownMethod,
                     UnknownObject, Explosion, check_int64)
from .parser import pretty_atom
from .trace import Rule, Spawn, Status, Step, Trace

MAIN_OBJECT = 0
MAIN_DESTINY = 1


@dataclass(frozen=True)
class Closure:
    stmt: ast.Stmt
    destiny: int


@dataclass
class Heap:
    """``objects`` maps refs to attribute stores; stores never hold zeros
    (an absent attribute reads as 0). ``futures`` maps refs to their value,
    ``None`` while unresolved."""

    count: int
    objects: dict
    futures: dict


@dataclass
class SourceConfig:
    """``touched`` records the references whose queue, store or future the
    step that produced this configuration changed; it is bookkeeping for
    incremental comparison and takes no part in equality."""

    queues: dict
    heap: Heap
    touched: frozenset = field(default=frozenset(), compare=False, repr=False)


def initial_config(program: ast.Program) -> SourceConfig:
    main = ast.mark_writeback(ast.canonical(program.main), ast.STAR)
    heap = Heap(count=2, objects={MAIN_OBJECT: {}}, futures={MAIN_DESTINY: None})
    return SourceConfig({MAIN_OBJECT: (Closure(main, MAIN_DESTINY),)}, heap)


# ---------------------------------------------------------------- expressions

def eval_value(store: dict, v) -> int:
    if isinstance(v, ast.IntLit):
        return v.value
    if isinstance(v, ast.Attr):
        return store.get(v.name, 0)
    if isinstance(v, ast.Add):
        return check_int64(eval_value(store, v.left) + eval_value(store, v.right))
    if isinstance(v, ast.Sub):
        return check_int64(eval_value(store, v.left) - eval_value(store, v.right))
    if isinstance(v, ast.Param):
        raise ValueError(f"parameter {v.name!r} was never instantiated")
    raise TypeError(f"not a value expression: {v!r}")


def eval_bool(store: dict, b) -> bool:
    if isinstance(b, ast.Eq):
        return eval_value(store, b.left) == eval_value(store, b.right)
    if isinstance(b, ast.Not):
        return not eval_bool(store, b.operand)
    left = eval_bool(store, b.left)
    right = eval_bool(store, b.right)
    return (left and right) if isinstance(b, ast.And) else (left or right)


# ---------------------------------------------------------------- helpers


def _method_body(program, name, args, mark):
    decl = program.methods.get(name)
    if decl is None:
        raise UnknownMethod(name)
    return ast.instantiate_body(decl, args, mark)


def _store_with(store: dict, attr: str, value: int) -> dict:
    new = dict(store)
    if value:
        new[attr] = value
    else:
        new.pop(attr, None)
    return new


def _future_of(heap: Heap, store: dict, attr: str) -> int:
    ref = store.get(attr, 0)
    if ref not in heap.futures:
        raise DanglingRef(f"attribute {attr!r} holds {ref}, which is not a future")
    return ref


def head(config: SourceConfig, o: int):
    """(first atomic statement, rest, destiny) of o's active process."""
    if o not in config.queues:
        raise UnknownObject(o)
    q = config.queues[o]
    if not q:
        return None
    first, rest = ast.split_head(q[0].stmt)
    return first, rest, q[0].destiny


def enabled(config: SourceConfig, o: int) -> bool:
    h = head(config, o)
    if h is None:
        return False
    first = h[0]
    if isinstance(first, ast.Assign) and isinstance(first.expr, ast.Get):
        store = config.heap.objects[o]
        ref = store.get(first.expr.fut, 0)
        # a non-future here is reported by step() as DanglingRef
        return ref not in config.heap.futures or config.heap.futures[ref] is not None
    return True


def enabled_objects(config: SourceConfig) -> list[int]:
    return [o for o in sorted(config.queues) if enabled(config, o)]


# ---------------------------------------------------------------- one step

def step(program: ast.Program, config: SourceConfig, o: int) -> tuple[SourceConfig, Step]:
    """Apply the one rule that matches the head statement of object ``o``."""
    h = head(config, o)
    if h is None:
        raise NotEnabled(f"object {o} has no process")
    first, rest, dest = h
    heap = config.heap
    store = heap.objects[o]
    queue = config.queues[o]
    queues = dict(config.queues)
    objects = heap.objects
    futures = heap.futures
    count = heap.count
    spawn = None

    def cont(stmt):
        if stmt is None:
            raise MalformedProcess(f"process of object {o} ends without a return")
        return Closure(stmt, dest)

    if isinstance(first, ast.Assign):
        e = first.expr
        objects = dict(objects)
        if isinstance(e, ast.New):
            rule = Rule.NEW
            objects[count] = {}
            queues[count] = ()
            objects[o] = _store_with(store, first.attr, count)
            count += 1
            new_head = cont(rest)
        elif isinstance(e, ast.Get):
            ref = _future_of(heap, store, e.fut)
            if futures[ref] is None:
                raise NotEnabled(f"object {o} is blocked on future {ref}")
            rule = Rule.GET
            objects[o] = _store_with(store, first.attr, futures[ref])
            new_head = cont(rest)
        elif isinstance(e, ast.SyncCall):
            rule = Rule.SYNC
            args = [store.get(a, 0) for a in e.args]
            body = _method_body(program, e.method, args, ast.WriteBack(first.attr))
            objects = heap.objects
            new_head = Closure(ast.seq_concat(body, rest), dest)
        else:
            rule = Rule.ASSIGN
            objects[o] = _store_with(store, first.attr, eval_value(store, e))
            new_head = cont(rest)
        queues[o] = (new_head,) + queue[1:]
    elif isinstance(first, ast.AsyncCall):
        rule = Rule.ASYNC
        callee = store.get(first.callee, 0)
        if callee not in objects:
            raise DanglingRef(f"attribute {first.callee!r} holds {callee}, which is not an object")
        args = tuple(store.get(a, 0) for a in first.args)
        body = _method_body(program, first.method, args, ast.STAR)
        fut = count
        count += 1
        futures = dict(futures)
        futures[fut] = None
        objects = dict(objects)
        objects[o] = _store_with(store, first.fut, fut)
        queues[o] = (cont(rest),) + queue[1:]
        queues[callee] = queues[callee] + (Closure(body, fut),)
        spawn = Spawn(callee, first.method, fut, args)
    elif isinstance(first, ast.Await):
        ref = _future_of(heap, store, first.fut)
        if futures[ref] is not None:
            rule = Rule.AWAIT_I
            queues[o] = (cont(rest),) + queue[1:]
        else:
            rule = Rule.AWAIT_II
            queues[o] = queue[1:] + (queue[0],)
    elif isinstance(first, ast.Return):
        mark = first.mark
        value = store.get(first.attr, 0)
        if mark == ast.STAR:
            rule = Rule.RETURN_A
            futures = dict(futures)
            futures[dest] = value
            queues[o] = queue[1:]
        elif isinstance(mark, ast.WriteBack):
            rule = Rule.RETURN_S
            objects = dict(objects)
            objects[o] = _store_with(store, mark.attr, value)
            queues[o] = (cont(rest),) + queue[1:]
        else:
            raise MalformedProcess(f"unmarked return {first.attr!r} reached at run time")
    elif isinstance(first, ast.Skip):
        rule = Rule.SKIP
        queues[o] = (cont(rest),) + queue[1:]
    elif isinstance(first, ast.If):
        taken = eval_bool(store, first.cond)
        rule = Rule.IF_T if taken else Rule.IF_F
        branch = first.then if taken else first.orelse
        queues[o] = (cont(ast.seq_concat(branch, rest)),) + queue[1:]
    elif isinstance(first, ast.While):
        if eval_bool(store, first.cond):
            rule = Rule.WHILE_T
            queues[o] = (cont(ast.seq_concat(first.body, ast.Seq(first, rest) if rest is not None else first)),) + queue[1:]
        else:
            rule = Rule.WHILE_F
            queues[o] = (cont(rest),) + queue[1:]
    else:
        raise TypeError(f"unexpected statement {first!r}")

    touched = {o, *range(heap.count, count)}
    if spawn is not None:
        touched.add(spawn.callee)
    if rule is Rule.RETURN_A:
        touched.add(dest)
    new = SourceConfig(queues, Heap(count, objects, futures), frozenset(touched))
    return new, Step(o, rule, pretty_atom(first), spawn)


# ---------------------------------------------------------------- scheduling policies

class RandomPolicy:
    def __init__(self, seed=0):
        self.rng = random.Random(seed)

    def __call__(self, config, enabled_refs, index):
        return self.rng.choice(enabled_refs)


class RoundRobinPolicy:
    """Cycle over enabled objects in ascending reference order."""

    def __init__(self):
        self.last = None

    def __call__(self, config, enabled_refs, index):
        choice = enabled_refs[0]
        if self.last is not None:
            later = [o for o in enabled_refs if o > self.last]
            if later:
                choice = later[0]
        self.last = choice
        return choice


class ScriptedPolicy:
    """Replay a fixed list of object references."""

    def __init__(self, refs):
        self.refs = list(refs)

    def __call__(self, config, enabled_refs, index):
        if index >= len(self.refs):
            raise NotEnabled(f"script exhausted at step {index}")
        o = self.refs[index]
        if o not in enabled_refs:
            raise NotEnabled(f"scripted object {o} is not enabled at step {index}")
        return o


def run(program: ast.Program, policy=None, fuel: int = 1_000_000) -> Trace:
    policy = policy or RandomPolicy(0)
    config = initial_config(program)
    start = config
    steps = []
    while True:
        refs = enabled_objects(config)
        if not refs:
            busy = any(config.queues.values())
            status = Status.DEADLOCK if busy else Status.FINISHED
            break
        if len(steps) >= fuel:
            status = Status.FUEL_EXHAUSTED
            break
        o = policy(config, refs, len(steps))
        config, label = step(program, config, o)
        steps.append(label)
    return Trace(steps, status, final=config, initial=start)


def enumerate_traces(program: ast.Program, fuel: int, max_traces: int = 10_000) -> list[Trace]:
    """Every maximal trace of at most ``fuel`` steps, one per label sequence."""
    found = {}
    stack = [(initial_config(program), ())]
    while stack:
        config, steps = stack.pop()
        refs = enabled_objects(config) if len(steps) < fuel else []
        if not refs:
            key = tuple((s.obj, s.rule, s.stmt) for s in steps)
            if key not in found:
                if len(found) >= max_traces:
                    raise Explosion(f"more than {max_traces} traces")
                if len(steps) >= fuel and enabled_objects(config):
                    status = Status.FUEL_EXHAUSTED
                elif any(config.queues.values()):
                    status = Status.DEADLOCK
                else:
                    status = Status.FINISHED
                found[key] = Trace(list(steps), status, final=config)
            continue
        for o in reversed(refs):
            nxt, label = step(program, config, o)
            stack.append((nxt, steps + (label,)))
    return list(found.values())
