"""Exception hierarchy shared by the interpreters, compiler and checkers."""

from __future__ import annotations


class ActorError(Exception):
    """Base class for all runtime-level failures of this package."""


class MalformedBody(ActorError):
    """A method body does not end in a single unmarked return."""


class ValidationError(ActorError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"program is not well formed: {lines}")


class UnknownObject(ActorError):
    pass


class NotEnabled(ActorError):
    pass


class DanglingRef(ActorError):
    """An attribute used as a callee or future does not hold a reference of that kind."""


class MalformedProcess(ActorError):
    """A process ran out of statements without reaching a return."""


class UnknownMethod(ActorError):
    pass


class ArityMismatch(ActorError):
    pass


class UnknownAttribute(ActorError):
    pass


class IllFormedIR(ActorError):
    pass


class Blocked(ActorError):
    """eval was asked to run an object whose head is a get on an unresolved future."""


class Explosion(ActorError):
    """Exhaustive trace enumeration exceeded its budget."""


INT64_MIN = -(1 << 63)
INT64_MAX = (1 << 63) - 1


def check_int64(value: int) -> int:
    if value < INT64_MIN or value > INT64_MAX:
        raise OverflowError(f"64-bit integer overflow: {value}")
    return value
