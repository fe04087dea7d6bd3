"""Error hierarchy shared by the codec, expression layer, engine and service.

Every error that can cross the wire carries one of the fixed envelope codes.
"""

from __future__ import annotations

ERROR_CODES = (
    "AuthFailed",
    "Forbidden",
    "UnknownTable",
    "UnknownField",
    "BadExpression",
    "BadOperation",
    "ConstraintViolation",
    "NotFound",
    "MalformedMessage",
)


class RspError(Exception):
    """Base class for protocol-level failures reported through an ErrorEnvelope."""

    code = "MalformedMessage"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


class MalformedMessage(RspError):
    code = "MalformedMessage"


class AuthFailed(RspError):
    code = "AuthFailed"

    def __init__(self, message: str = "invalid user name or password"):
        super().__init__(message)


class Forbidden(RspError):
    code = "Forbidden"


class UnknownTable(RspError):
    code = "UnknownTable"


class UnknownField(RspError):
    code = "UnknownField"


class BadOperation(RspError):
    code = "BadOperation"


class ConstraintViolation(RspError):
    code = "ConstraintViolation"


class NotFound(RspError):
    code = "NotFound"


class BadExpression(RspError):
    """Syntax or typing error in a filter/order expression.

    ``position`` is the 0-based character offset of the offending token (or
    None for binding errors) and ``expected`` the set of token kinds that
    would have been accepted there.
    """

    code = "BadExpression"

    def __init__(self, message: str, position: int | None = None, expected: frozenset[str] = frozenset()):
        if position is not None:
            message = f"{message} at position {position}"
        if expected:
            message = f"{message}; expected one of: {', '.join(sorted(expected))}"
        super().__init__(message)
        self.position = position
        self.expected = frozenset(expected)


ERROR_CLASSES: dict[str, type[RspError]] = {
    cls.code: cls
    for cls in (
        MalformedMessage,
        AuthFailed,
        Forbidden,
        UnknownTable,
        UnknownField,
        BadExpression,
        BadOperation,
        ConstraintViolation,
        NotFound,
    )
}


class InvariantViolation(ValueError):
    """Raised by ``encode`` when asked to serialize a message that breaks its own invariants."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


class CorruptCell(ValueError):
    """A stored cell does not parse under its column's canonical encoding (a provider bug)."""


class FixtureError(ValueError):
    """The fixture document violates a store invariant."""
