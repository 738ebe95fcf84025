"""Discrete curtailment scheduling for load and solar fleets.

Pick one curtailment strategy per node per interval so every interval
reaches its reduction target, the horizon total respects an aggregate
cap, and optional per-node budget bands hold, at minimum total cost.

Solvers: :func:`curtail.dp.solve` (near-optimal rounding scheme),
:func:`curtail.fairness.solve_fair` (budget bands via relaxation),
:func:`curtail.online.solve_step` (interval at a time), and
:mod:`curtail.oracle` (exact references for small instances).  The
:mod:`curtail.estimators` module wraps these in scikit-learn style
fit/predict classes.
"""

from . import dp, fairness, metrics, online, oracle, scenarios, serialize, simplex
from .errors import (
    CurtailError,
    DegenerateSamplesError,
    EpsilonOutOfRangeError,
    GuaranteeViolationError,
    InconsistentTableError,
    IndexOutOfRangeError,
    InvalidInstanceError,
    LpInfeasibleError,
    MissingBudgetsError,
    NumericalBreakdownError,
    TooLargeError,
    TraceTooShortError,
    UndefinedMetricError,
    ValidationIssue,
    ZeroTargetError,
)
from .estimators import ExactBalancer, FairBalancer, MinCostBalancer, OnlineBalancer
from .model import (
    DEFAULT_TOLERANCE,
    CurtailmentInstance,
    EvaluationReport,
    Schedule,
    evaluate,
    validate,
    validation_issues,
)
from .scenarios import ScenarioSpec, generate, proportional_budgets

__version__ = "0.1.0"

__all__ = [
    "CurtailError",
    "CurtailmentInstance",
    "DEFAULT_TOLERANCE",
    "DegenerateSamplesError",
    "EpsilonOutOfRangeError",
    "EvaluationReport",
    "ExactBalancer",
    "FairBalancer",
    "GuaranteeViolationError",
    "InconsistentTableError",
    "IndexOutOfRangeError",
    "InvalidInstanceError",
    "LpInfeasibleError",
    "MinCostBalancer",
    "MissingBudgetsError",
    "NumericalBreakdownError",
    "OnlineBalancer",
    "ScenarioSpec",
    "Schedule",
    "TooLargeError",
    "TraceTooShortError",
    "UndefinedMetricError",
    "ValidationIssue",
    "ZeroTargetError",
    "dp",
    "evaluate",
    "fairness",
    "generate",
    "metrics",
    "online",
    "oracle",
    "proportional_budgets",
    "scenarios",
    "serialize",
    "simplex",
    "validate",
    "validation_issues",
]
