"""Exception types shared across the package.

Every domain error derives from CartAssistError so the HTTP layer can map
exceptions to structured error payloads by class name.
"""

from __future__ import annotations


class CartAssistError(Exception):
    """Base class for all domain errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class ParseError(CartAssistError):
    """A store or scenario document failed to parse."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class ValidationError(CartAssistError):
    """A parsed store breaks invariants.  Carries every violation, not just the first."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


class UnknownMarker(CartAssistError):
    pass


class UnknownProduct(CartAssistError):
    pass


class DimensionMismatch(CartAssistError):
    pass


class ZeroVector(CartAssistError):
    pass


class EmptyText(CartAssistError):
    pass


class ProviderFailure(CartAssistError):
    """A remote client adapter failed (never raised by mocks)."""


class NoPath(CartAssistError):
    pass


class InvalidCell(CartAssistError):
    pass


class EmptyUtterance(CartAssistError):
    pass


class StreamClosed(CartAssistError):
    pass


class ScriptError(CartAssistError):
    pass


class ConfigError(CartAssistError):
    pass
