"""Exception hierarchy.

Callers that want to distinguish bad inputs from numerical trouble can catch
ValidationError / ConfigError / BudgetError separately from NumericError.
Everything derives from SemcommError so `except SemcommError` is a safe net.
"""

from __future__ import annotations


class SemcommError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SemcommError, ValueError):
    """A value violates a documented precondition (mass, shape, range)."""


class ConfigError(SemcommError, ValueError):
    """A config document or CLI argument set is malformed or inconsistent."""


class BudgetError(ConfigError):
    """A requested exact computation exceeds its enumeration budget."""


class NumericError(SemcommError):
    """A numerical routine produced an untrustworthy result."""


class ConvergenceError(NumericError):
    """An iterative solver ran out of iterations before meeting tolerance.

    Carries the best iterate so far, so callers can inspect how close the
    run got before deciding whether to retry with a looser tolerance.
    """

    def __init__(self, message: str, *, best=None, gap: float | None = None):
        super().__init__(message)
        self.best = best
        self.gap = gap
