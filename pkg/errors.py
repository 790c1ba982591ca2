#!/usr/bin/env python3
"""
cinf-lift - Error Types

Every failure raised by the engine derives from CinfLiftError and carries
the process exit code the command line reports for it, plus a short error
code naming the kind of failure.
"""

from typing import Any, Optional


class CinfLiftError(Exception):
    """Base class for all engine errors."""

    exit_code = 3
    code = "internal"

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.message = message
        self.witness = witness

    def to_dict(self) -> dict:
        data = {"error": type(self).__name__, "code": self.code, "message": self.message}
        if self.witness is not None:
            data["witness"] = str(self.witness)
        return data


class InputError(CinfLiftError):
    """Malformed user input or arguments outside an operation's domain."""

    exit_code = 2
    code = "input"


class PreconditionError(InputError):
    """An operation's precondition does not hold; `witness` shows why."""

    code = "precondition"


class ParseError(InputError):
    """Syntax error in an algebra or structure file."""

    code = "syntax"

    def __init__(self, message: str, line: int = 0, column: int = 0,
                 path: Optional[str] = None, witness: Any = None):
        location = f"{path or '<input>'}:{line}:{column}"
        super().__init__(f"{location}: {message}", witness)
        self.line = line
        self.column = column
        self.path = path


class DegreeError(ParseError):
    """A parsed term has the wrong order or internal degree."""

    code = "degree"


class ValidationError(InputError):
    """Parsed data violates an algebraic axiom (associativity, pairing, ...)."""

    code = "validation"


class TruncationError(InputError):
    """A product would exceed the declared truncation order."""

    code = "truncation"


class InternalInvariantError(CinfLiftError):
    """A proven identity failed; this always indicates a bug."""

    exit_code = 3
    code = "invariant"
