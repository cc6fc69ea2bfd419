"""Error types raised by the core modules."""

from __future__ import annotations

from typing import Optional


class DoubleRankError(ValueError):
    """Base class for every domain error."""


class EmptySetError(DoubleRankError):
    pass


class NegativeCountError(DoubleRankError):
    pass


class InvalidSpecError(DoubleRankError):
    pass


class NotSubsetError(DoubleRankError):
    pass


class BadGridError(DoubleRankError):
    pass


class NonMonotoneError(DoubleRankError):
    pass


class TooFewPointsError(DoubleRankError):
    pass


class ZeroCountError(DoubleRankError):
    pass


class NoConvergenceError(DoubleRankError):
    pass


class DegenerateFitError(DoubleRankError):
    pass


class DegenerateSetError(DoubleRankError):
    pass


class NonPositiveDofError(DoubleRankError):
    pass


class BadPercentileError(DoubleRankError):
    pass


class BadCountsError(DoubleRankError):
    pass


class BadWindowError(DoubleRankError):
    pass


class ConfigError(DoubleRankError):
    pass


class ParseError(DoubleRankError):
    """Malformed input file; ``line`` is 1-based and counts the header row."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[str] = None) -> None:
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column '{column}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
