"""Exception types raised across the package."""

from __future__ import annotations


class TrackCountError(Exception):
    """Base class for all package errors."""


class ValidationError(TrackCountError, ValueError):
    """A value violates a domain invariant."""


class ParseError(TrackCountError, ValueError):
    """A track file line could not be parsed."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class DuplicateRecordError(ParseError):
    """Two records share the same (frame, id) pair."""


class UndefinedMetricError(TrackCountError, ArithmeticError):
    """A metric has no defined value for the given input (e.g. empty ground truth)."""
