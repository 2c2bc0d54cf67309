"""Exception hierarchy shared by every flowcat module."""

from __future__ import annotations


class FlowcatError(Exception):
    """Base class for all errors raised by flowcat."""


class DimensionError(FlowcatError, ValueError):
    pass


class NonFiniteError(FlowcatError, ValueError):
    pass


class ParseError(FlowcatError, ValueError):
    """Malformed expression source.

    ``position`` is the 0-based character offset where parsing failed.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.message = message
        self.position = position


class UnboundVariableError(FlowcatError, KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"unbound variable {self.name!r}"


class DomainError(FlowcatError, ArithmeticError):
    """An arithmetic operation was applied outside its real domain."""

    def __init__(self, operation: str, value: object):
        super().__init__(f"domain error in {operation} at {value!r}")
        self.operation = operation
        self.value = value


class OrbitError(FlowcatError):
    """An orbit left the box bounds of its space."""


class RecurrenceError(FlowcatError):
    """No section crossing was found inside the search horizon."""


class CatalogError(FlowcatError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "catalog error"


class ConfigError(FlowcatError, ValueError):
    pass


class SystemMismatchError(FlowcatError, ValueError):
    pass


class PreconditionError(FlowcatError):
    """A gating law check failed; ``report`` holds the failing CheckReport."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
