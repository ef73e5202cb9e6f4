"""Exception hierarchy.

Every error raised by this package derives from :class:`CalcError`, so
callers (in particular the CLI) can map failures to outcomes without
catching builtins.
"""

from __future__ import annotations


class CalcError(Exception):
    """Base class for all errors raised by trigcalc."""


class ParseError(CalcError):
    """Syntax error in the expression text.

    Carries the 0-based byte offset of the offending position and the set
    of token descriptions that would have been accepted there.
    """

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = tuple(expected)
        detail = f"{message} at offset {offset}"
        if expected:
            detail += " (expected " + ", ".join(expected) + ")"
        super().__init__(detail)


class EvalError(CalcError):
    """Base class for evaluation failures."""


class DomainError(EvalError):
    """Evaluation left the function's domain (e.g. division by zero).

    ``subtree`` is the expression node whose evaluation failed.
    """

    def __init__(self, message: str, subtree=None):
        self.subtree = subtree
        super().__init__(message)


class UnboundParameterError(EvalError):
    """A free parameter had no binding in the evaluation environment."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound parameter {name!r}")


class ArgumentError(CalcError):
    """An argument violated a documented precondition."""


class ConstraintError(CalcError):
    """A parameter environment violated a registered entry's constraints."""


class ContractError(CalcError):
    """An operation was invoked outside its contract (e.g. unverified entry)."""


class ConfigurationError(CalcError):
    """Invalid configuration, or a constraint sampler that cannot make progress."""
