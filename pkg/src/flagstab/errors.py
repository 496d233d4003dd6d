"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations


class FlagstabError(Exception):
    """Base class; ``code`` is the process exit status used by the CLI."""

    code = 2
    kind = "error"

    def payload(self) -> dict:
        """Machine-readable form written to stderr by the CLI."""
        doc = {"error": self.kind, "message": str(self), "exit_code": self.code}
        for attr in ("field", "condition", "invariant"):
            value = getattr(self, attr, None)
            if value is not None:
                doc[attr] = value
        if hasattr(self, "to_json"):
            doc.update(self.to_json())
        return doc


class InputError(FlagstabError, ValueError):
    """Malformed or mismatched input (dimensions, schemas, syntax)."""

    kind = "input_error"

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class PreconditionError(FlagstabError, ValueError):
    """A mathematical precondition of an operation does not hold."""

    kind = "precondition_error"

    def __init__(self, message: str, condition: str | None = None):
        super().__init__(message)
        self.condition = condition


class InvariantError(FlagstabError, RuntimeError):
    """An internal invariant was violated; never raised on valid input."""

    code = 3
    kind = "invariant_breach"

    def __init__(self, message: str, invariant: str):
        super().__init__(message)
        self.invariant = invariant
