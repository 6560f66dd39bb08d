"""Exception hierarchy shared by services, parsers and the CLI."""
from typing import Optional


class GraphFormsError(Exception):
    """Base class for every error raised by the toolkit."""


class InputError(GraphFormsError, ValueError):
    """Malformed or inconsistent input (CLI exit code 2)."""


class ParseError(InputError):
    """Text that does not follow one of the line-oriented formats."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None) -> None:
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class ReferentialError(InputError):
    """A record refers to a vertex, edge or graph that does not exist."""


class PreconditionError(InputError):
    """An operation was called outside its documented domain."""


class DomainError(PreconditionError):
    """A coordinate lies outside the interval a function is defined on."""


class NonDifferentiableError(PreconditionError):
    """Differentiation requested on a function of smoothness order 0."""


class MathematicalFailure(GraphFormsError):
    """Well-formed input on which a mathematical requirement fails (CLI exit code 1)."""


class NotHarmonicError(MathematicalFailure):
    """A map lacks the harmonicity an operation requires."""


class IncompatibleMapsError(MathematicalFailure):
    """Maps whose middle graphs do not agree cannot be composed."""


class InvalidActionError(MathematicalFailure):
    """A group action is not closed, not harmonic or moves the boundary."""


class CertificateError(MathematicalFailure):
    """No exact local pullback certificate exists at the requested point."""


class TropicalizationError(MathematicalFailure):
    """Tropicalization data is inconsistent or lacks integral slopes."""
