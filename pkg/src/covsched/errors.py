"""Exception hierarchy shared across the package.

Every error raised by the library derives from :class:`CovschedError` so CLI
code can map failures onto exit codes without enumerating modules.
"""

from __future__ import annotations


class CovschedError(Exception):
    """Base class for all library errors."""


class ParameterError(CovschedError):
    """An argument is out of its documented range or malformed."""


class ValidationError(CovschedError):
    """A constructed object violates a structural invariant."""


class SchemaError(CovschedError):
    """A serialized document is missing or mistypes a required field."""


class DomainError(CovschedError):
    """A numeric input leaves the domain of an operation (e.g. not PSD)."""


class AssemblyError(CovschedError):
    """Optimization program assembly failed (constant matrices not usable)."""


class SolverFailure(CovschedError):
    """The conic solver did not return a usable solution."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats


class ConditioningError(CovschedError):
    """A matrix that must be inverted is numerically singular."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class BudgetError(CovschedError):
    """An enumeration would exceed the configured budget."""

    def __init__(self, message, required=None, budget=None):
        super().__init__(message)
        self.required = required
        self.budget = budget
