"""Evaluation metrics: dispersion, guarantee checks, and scaling fits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateSamplesError, UndefinedMetricError
from .model import CurtailmentInstance, EvaluationReport, Schedule, evaluate


def gini(values) -> float:
    """Population Gini coefficient of a non-negative vector.

    Pairwise mean absolute difference over twice the mean, with the
    population n^2 denominator: sum |v_i - v_j| / (2 n^2 mean). Zero for a
    single value or a perfectly even vector; undefined (raises) when the
    mean is zero, since dispersion of nothing has no scale.
    """
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if v.size == 0:
        raise UndefinedMetricError("gini needs at least one value")
    if np.any(v < 0):
        raise ValueError("gini is defined for non-negative values")
    total = float(v.sum())
    if total <= 0.0:
        raise UndefinedMetricError("gini is undefined when every value is zero")
    s = np.sort(v)
    n = s.size
    ranks = np.arange(1, n + 1)
    # Sorted-rank identity for the pairwise-difference sum; clamp the
    # cancellation noise an even vector can leave just below zero.
    return max(0.0, float((2.0 * np.sum(ranks * s)) / (n * total) - (n + 1.0) / n))


@dataclass(frozen=True)
class BoundCheck:
    """One guarantee: the promised bound, what was observed, and the verdict.

    `observed` is None when the ratio's denominator is zero (nothing to
    compare against); such checks pass vacuously.  `applicable` is False
    when the guarantee's precondition failed (for example a zero-gap
    down-rounding), in which case the check also passes vacuously but the
    observation is still recorded.
    """

    name: str
    bound: Optional[float]
    observed: Optional[float]
    passed: bool
    applicable: bool = True

    @property
    def slack(self) -> Optional[float]:
        if self.bound is None or self.observed is None:
            return None
        return self.observed - self.bound

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "bound": self.bound,
            "observed": self.observed,
            "passed": self.passed,
            "applicable": self.applicable,
            "slack": self.slack,
        }


def dp_bounds(
    instance: CurtailmentInstance,
    report: EvaluationReport,
    epsilon: float,
    *,
    tolerance: float = 1e-6,
) -> list[BoundCheck]:
    """Approximation-scheduler promises: interval floors within (1 - epsilon),
    aggregate within (1 + epsilon) of the cap. `tolerance` is relative."""
    checks = []

    factors = [f for f in report.target_factors if f is not None]
    ok = True
    for t in range(instance.num_intervals):
        target = float(instance.interval_targets[t])
        achieved = float(report.per_interval_curtailment[t])
        if achieved + tolerance * (1.0 + target) < (1.0 - epsilon) * target:
            ok = False
    checks.append(
        BoundCheck(
            name="interval_floor",
            bound=1.0 - epsilon,
            observed=min(factors) if factors else None,
            passed=ok,
        )
    )

    cap = instance.aggregate_cap
    if report.cap_factor is None:
        passed = report.aggregate_curtailment <= tolerance
    else:
        passed = report.aggregate_curtailment <= (1.0 + epsilon) * cap + tolerance * (1.0 + cap)
    checks.append(
        BoundCheck(
            name="aggregate_cap",
            bound=1.0 + epsilon,
            observed=report.cap_factor,
            passed=bool(passed),
        )
    )
    return checks


def fair_bounds(
    instance: CurtailmentInstance,
    report: EvaluationReport,
    lp_optimum: float,
    *,
    cost_kind: str = "linear",
    spacing: Optional[float] = None,
    lower_guarantee: bool = True,
    tolerance: float = 1e-6,
) -> list[BoundCheck]:
    """Fair-scheduler promises relative to the relaxation optimum.

    Upper sides (cost factor, twice the cap, twice each ceiling) hold
    unconditionally; the 1/k lower sides apply only when no positive
    expected value rounded down to zero (`lower_guarantee`).
    """
    from .fairness import COST_FACTOR_BOUNDS, spacing_factor

    if spacing is None:
        spacing = spacing_factor(instance)
    checks = []

    factor_bound = COST_FACTOR_BOUNDS.get(cost_kind)
    if factor_bound is not None:
        if abs(lp_optimum) <= tolerance:
            observed = None
            passed = report.total_cost <= tolerance
        else:
            observed = report.total_cost / lp_optimum
            passed = report.total_cost <= factor_bound * lp_optimum + tolerance * (1.0 + abs(lp_optimum))
        checks.append(BoundCheck(name="cost_factor", bound=factor_bound, observed=observed, passed=bool(passed)))

    cap = instance.aggregate_cap
    checks.append(
        BoundCheck(
            name="aggregate_double_cap",
            bound=2.0,
            observed=report.cap_factor,
            passed=bool(
                report.aggregate_curtailment <= 2.0 * cap + tolerance * (1.0 + cap)
            ),
        )
    )

    if instance.budgets is not None:
        uppers = [u for (_, u) in (report.budget_factors or ()) if u is not None]
        ok = True
        for b in range(instance.num_nodes):
            ceiling = float(instance.budgets[b, 1])
            achieved = float(report.per_node_curtailment[b])
            if achieved > 2.0 * ceiling + tolerance * (1.0 + ceiling):
                ok = False
        checks.append(
            BoundCheck(
                name="node_ceiling_double",
                bound=2.0,
                observed=max(uppers) if uppers else None,
                passed=ok,
            )
        )

    floor_factors = [f for f in report.target_factors if f is not None]
    ok = True
    for t in range(instance.num_intervals):
        target = float(instance.interval_targets[t])
        achieved = float(report.per_interval_curtailment[t])
        if achieved * spacing + tolerance * (1.0 + target) < target:
            ok = False
    checks.append(
        BoundCheck(
            name="interval_floor_spacing",
            bound=1.0 / spacing,
            observed=min(floor_factors) if floor_factors else None,
            passed=ok if lower_guarantee else True,
            applicable=lower_guarantee,
        )
    )

    if instance.budgets is not None:
        lowers = [l for (l, _) in (report.budget_factors or ()) if l is not None]
        ok = True
        for b in range(instance.num_nodes):
            floor = float(instance.budgets[b, 0]) * float(instance.budgets[b, 1])
            if floor <= 0.0:
                continue
            achieved = float(report.per_node_curtailment[b])
            if achieved * spacing + tolerance * (1.0 + floor) < floor:
                ok = False
        checks.append(
            BoundCheck(
                name="node_floor_spacing",
                bound=1.0 / spacing,
                observed=min(lowers) if lowers else None,
                passed=ok if lower_guarantee else True,
                applicable=lower_guarantee,
            )
        )
    return checks


def bound_report(
    instance: CurtailmentInstance,
    schedule: Schedule,
    *,
    epsilon: Optional[float] = None,
    lp_optimum: Optional[float] = None,
    cost_kind: str = "linear",
    spacing: Optional[float] = None,
    lower_guarantee: bool = True,
    tolerance: float = 1e-6,
) -> list[BoundCheck]:
    """Evaluate a schedule and check it against one solver's promises.

    Pass `epsilon` for the approximation scheduler's bounds, or
    `lp_optimum` (plus cost_kind/spacing context) for the fair
    scheduler's.  Exactly one of the two selects the family.
    """
    if (epsilon is None) == (lp_optimum is None):
        raise ValueError("pass exactly one of epsilon (approximation) or lp_optimum (fairness)")
    report = evaluate(instance, schedule)
    if epsilon is not None:
        return dp_bounds(instance, report, epsilon, tolerance=tolerance)
    return fair_bounds(
        instance,
        report,
        lp_optimum,
        cost_kind=cost_kind,
        spacing=spacing,
        lower_guarantee=lower_guarantee,
        tolerance=tolerance,
    )


def scaling_fit(sizes: Sequence[float], values: Sequence[float]) -> tuple:
    """Least-squares slope and intercept of log(values) against log(sizes).

    The slope is the empirical scaling exponent.  Needs at least three
    samples, all positive, with at least two distinct sizes.
    """
    s = np.asarray(sizes, dtype=np.float64).reshape(-1)
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if s.size != v.size:
        raise DegenerateSamplesError("sizes and values must pair up")
    if s.size < 3:
        raise DegenerateSamplesError("a scaling fit needs at least three samples")
    if np.any(s <= 0.0) or np.any(v <= 0.0):
        raise DegenerateSamplesError("a log-log fit needs positive sizes and values")
    if np.unique(s).size < 2:
        raise DegenerateSamplesError("all sizes are identical; the slope is undefined")
    slope, intercept = np.polyfit(np.log(s), np.log(v), 1)
    return float(slope), float(intercept)
