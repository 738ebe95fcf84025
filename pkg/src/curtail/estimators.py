"""Estimator facades over the functional solvers.

These follow the scikit-learn convention for unsupervised estimators:
construction stores hyperparameters untouched, ``fit(instance)`` runs the
solver and exposes results through trailing-underscore attributes, and
``get_params``/``set_params``/``clone`` work as usual because everything
derives from :class:`sklearn.base.BaseEstimator`.

All four fit against a :class:`~curtail.model.CurtailmentInstance` rather
than an (n_samples, n_features) matrix; ``y`` is accepted and ignored.
After a successful fit:

``feasible_``   bool, whether a schedule meeting the constraints was found
``schedule_``   Schedule, or None when infeasible
``cost_``       float total cost, or None
``report_``     EvaluationReport for the chosen schedule, or None
``solution_``   the solver-specific result object, always set
"""

from __future__ import annotations

from sklearn.base import BaseEstimator

from . import dp, fairness, online, oracle
from .errors import LpInfeasibleError
from .model import DEFAULT_TOLERANCE, CurtailmentInstance, evaluate


class _ScheduleMixin:
    """Shared post-fit plumbing: evaluate + expose the standard attributes."""

    def _finish(self, instance: CurtailmentInstance, solution, schedule, cost) -> None:
        self.solution_ = solution
        self.instance_ = instance
        if schedule is None:
            self.feasible_ = False
            self.schedule_ = None
            self.cost_ = None
            self.report_ = None
            return
        self.feasible_ = True
        self.schedule_ = schedule
        self.cost_ = float(cost)
        self.report_ = evaluate(instance, schedule)

    def fit_predict(self, instance: CurtailmentInstance, y=None):
        """Fit and return the assignment matrix, or None when infeasible."""
        self.fit(instance, y)
        return None if self.schedule_ is None else self.schedule_.assignment

    def __sklearn_is_fitted__(self) -> bool:
        return hasattr(self, "solution_")


class MinCostBalancer(_ScheduleMixin, BaseEstimator):
    """Near-optimal offline scheduling via the rounded aggregation table.

    Guarantees (when feasible): every interval reaches at least (1 - epsilon)
    of its target and the horizon total stays within (1 + epsilon) of the cap,
    at a cost no higher than the best schedule meeting the targets exactly.

    >>> MinCostBalancer(epsilon=0.1).fit(instance).cost_
    """

    def __init__(self, epsilon: float = 0.1, tolerance: float = DEFAULT_TOLERANCE):
        self.epsilon = epsilon
        self.tolerance = tolerance

    def fit(self, instance: CurtailmentInstance, y=None):
        solution = dp.solve(instance, self.epsilon, tolerance=self.tolerance)
        schedule = solution.schedule if solution.feasible else None
        self._finish(instance, solution, schedule, solution.cost)
        return self


class FairBalancer(_ScheduleMixin, BaseEstimator):
    """Budget-aware scheduling via relaxation and midpoint rounding.

    Requires per-node budgets on the instance.  An infeasible relaxation is
    reported through ``feasible_ = False`` rather than an exception; other
    solver failures propagate.
    """

    def __init__(
        self,
        cost_kind: str = "linear",
        tolerance: float = DEFAULT_TOLERANCE,
        lp_tolerance: float = 1e-7,
    ):
        self.cost_kind = cost_kind
        self.tolerance = tolerance
        self.lp_tolerance = lp_tolerance

    def fit(self, instance: CurtailmentInstance, y=None):
        config = fairness.FairnessConfig(
            cost_kind=self.cost_kind,
            tolerance=self.tolerance,
            lp_tolerance=self.lp_tolerance,
        )
        try:
            solution = fairness.solve_fair(instance, config=config)
        except LpInfeasibleError:
            self._finish(instance, None, None, None)
            return self
        self._finish(instance, solution, solution.schedule, solution.report.total_cost)
        return self


class OnlineBalancer(_ScheduleMixin, BaseEstimator):
    """Interval-at-a-time scheduling with prorated per-node ceilings.

    ``fit`` replays a full instance through the per-interval step solver;
    ``step`` exposes single-interval use against a standing context.
    """

    def __init__(
        self,
        epsilon: float = 0.1,
        strict_filter: bool = False,
        tolerance: float = DEFAULT_TOLERANCE,
    ):
        self.epsilon = epsilon
        self.strict_filter = strict_filter
        self.tolerance = tolerance

    def fit(self, instance: CurtailmentInstance, y=None):
        outcome = online.run_horizon(
            instance,
            self.epsilon,
            strict_filter=self.strict_filter,
            tolerance=self.tolerance,
        )
        schedule = outcome.schedule if outcome.status == "solved" else None
        cost = outcome.total_cost if schedule is not None else None
        self._finish(instance, outcome, schedule, cost)
        return self

    def step(self, context: online.OnlineContext, step: online.OnlineStep):
        return online.solve_step(
            context,
            step,
            self.epsilon,
            strict_filter=self.strict_filter,
            tolerance=self.tolerance,
        )


class ExactBalancer(_ScheduleMixin, BaseEstimator):
    """Exact reference solver for small instances.

    problem="plain" ignores budgets, "fair" enforces them, "auto" picks by
    whether the instance carries budgets.  Enumeration cost grows as
    strategies ** (nodes * intervals); fits beyond ``enumeration_cap``
    combinations raise rather than run forever.
    """

    def __init__(self, problem: str = "auto", enumeration_cap: int = 10_000_000,
                 tolerance: float = DEFAULT_TOLERANCE):
        self.problem = problem
        self.enumeration_cap = enumeration_cap
        self.tolerance = tolerance

    def fit(self, instance: CurtailmentInstance, y=None):
        solution = oracle.brute_force(
            instance,
            self.problem,
            enumeration_cap=self.enumeration_cap,
            tolerance=self.tolerance,
        )
        schedule = solution.schedule if solution.feasible else None
        self._finish(instance, solution, schedule, solution.cost)
        return self
