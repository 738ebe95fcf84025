"""Exception types shared across the toolkit."""

from __future__ import annotations

from dataclasses import dataclass


class CurtailError(Exception):
    """Base class for all toolkit-specific errors."""


@dataclass(frozen=True)
class ValidationIssue:
    """One validation violation: a machine-readable kind plus a message."""

    kind: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


class InvalidInstanceError(CurtailError):
    """Raised by validate(); carries the complete list of violations found."""

    def __init__(self, issues: list[ValidationIssue]):
        self.issues = list(issues)
        lines = "; ".join(str(i) for i in self.issues)
        super().__init__(f"invalid instance ({len(self.issues)} issue(s)): {lines}")


class IndexOutOfRangeError(CurtailError):
    """A schedule refers to a strategy index outside [0, num_strategies)."""


class ZeroTargetError(CurtailError):
    """A rounding-based solver needs every interval target to be positive."""


class EpsilonOutOfRangeError(CurtailError):
    """The approximation parameter must lie in (0, 1]."""


class InconsistentTableError(CurtailError):
    """A backtrack step found no strategy reproducing a table entry.

    Signals an implementation bug, not bad input.
    """


class NumericalBreakdownError(CurtailError):
    """The LP solver hit its iteration cap or lost feasibility to roundoff."""


class LpInfeasibleError(CurtailError):
    """The fairness relaxation has no feasible point."""


class MissingBudgetsError(CurtailError):
    """The requested operation needs per-node budgets on the instance."""


class GuaranteeViolationError(CurtailError):
    """A mathematically guaranteed bound failed; signals an implementation bug."""


class TooLargeError(CurtailError):
    """The instance exceeds an oracle's enumeration or table cap."""


class TraceTooShortError(CurtailError):
    """The radiance trace does not cover the requested horizon."""


class DegenerateSamplesError(CurtailError):
    """A least-squares fit needs more, or more varied, samples."""


class UndefinedMetricError(CurtailError):
    """The metric has no value on this input (for example an all-zero vector)."""
