"""Exception and warning types raised across the package."""

from __future__ import annotations


class LeobufError(Exception):
    """Base class for package errors."""


class DegenerateChainError(LeobufError, ValueError):
    """Two-state chain with alpha = beta = 0 has no unique stationary law."""


class InstabilityError(LeobufError, ValueError):
    """Mean arrival rate is not below the mean service rate."""


class NoBracketError(LeobufError, RuntimeError):
    """Root bracket expansion exceeded its upper limit."""


class SumMismatchError(LeobufError, ValueError):
    pass


class UntrackedThresholdError(LeobufError, KeyError):
    pass


class ThresholdMismatchError(LeobufError, ValueError):
    pass


class ConfigError(LeobufError, ValueError):
    """Bad configuration text or value.

    ``key`` names the offending field and ``line`` the 1-based line number
    when the error came from parsing a file.
    """

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if key is not None:
            prefix += f"{key}: "
        super().__init__(prefix + message)
        self.key = key
        self.line = line


class TruncationWarning(UserWarning):
    """Truncated chain puts non-negligible mass on its boundary."""
