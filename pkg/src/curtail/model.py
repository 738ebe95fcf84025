"""Problem data, schedules, validation, and schedule evaluation.

A curtailment instance covers `num_intervals` time intervals and
`num_nodes` nodes; each node offers `num_strategies` discrete strategies
per interval.  Strategy j at node b in interval t curtails
``curtailment[t, b, j]`` kWh at cost ``cost[t, b, j]``.  A schedule picks
exactly one strategy per (interval, node) slot.  Interval targets are
floors on the curtailment summed across nodes; the aggregate cap bounds
the total over the whole horizon; optional per-node budgets (alpha_b, B_b)
band each node's horizon total inside [alpha_b * B_b, B_b].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    IndexOutOfRangeError,
    InvalidInstanceError,
    ValidationIssue,
)

# Absolute comparison slack, in kWh, used wherever float curtailments meet
# constraints. Small relative to any realistic curtailment value.
DEFAULT_TOLERANCE = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CurtailmentInstance:
    """Immutable problem data.

    Arrays are coerced to float64 and frozen. Construction only coerces;
    semantic checks live in :func:`validate` so that every violation of a
    malformed instance can be reported at once.
    """

    num_nodes: int
    num_strategies: int
    num_intervals: int
    curtailment: np.ndarray  # (T, M, N) kWh
    cost: np.ndarray  # (T, M, N)
    interval_targets: np.ndarray  # (T,) kWh floors
    aggregate_cap: float  # kWh ceiling over the horizon
    budgets: Optional[np.ndarray] = None  # (M, 2) rows (alpha_b, B_b)

    def __post_init__(self):
        try:
            object.__setattr__(self, "curtailment", _readonly(np.asarray(self.curtailment, dtype=np.float64)))
            object.__setattr__(self, "cost", _readonly(np.asarray(self.cost, dtype=np.float64)))
            object.__setattr__(self, "interval_targets", _readonly(np.asarray(self.interval_targets, dtype=np.float64)))
            object.__setattr__(self, "aggregate_cap", float(self.aggregate_cap))
            if self.budgets is not None:
                object.__setattr__(self, "budgets", _readonly(np.asarray(self.budgets, dtype=np.float64)))
        except (TypeError, ValueError) as exc:
            raise InvalidInstanceError(
                [ValidationIssue("shape_mismatch", f"array field not coercible to a float array: {exc}")]
            ) from exc

    @property
    def has_budgets(self) -> bool:
        return self.budgets is not None


@dataclass(frozen=True, eq=False)
class Schedule:
    """One strategy index per (interval, node) slot, shape (T, M)."""

    assignment: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.assignment)
        if a.ndim != 2:
            raise IndexOutOfRangeError(f"assignment must be 2-D (intervals x nodes), got ndim={a.ndim}")
        object.__setattr__(self, "assignment", _readonly(a.astype(np.int64)))

    @property
    def num_intervals(self) -> int:
        return self.assignment.shape[0]

    @property
    def num_nodes(self) -> int:
        return self.assignment.shape[1]


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    """Achieved curtailment, cost, and constraint ratios for one schedule.

    Violation factors are achieved/required ratios; a ratio with a zero
    denominator is None (undefined), never an arbitrary sentinel number.
    `budget_factors` rows are (achieved/floor, achieved/ceiling) per node,
    or None when the instance has no budgets.
    """

    total_cost: float
    per_interval_curtailment: np.ndarray  # (T,)
    aggregate_curtailment: float
    per_node_curtailment: np.ndarray  # (M,)
    target_factors: tuple  # per interval: achieved/target or None
    cap_factor: Optional[float]  # aggregate/cap or None
    budget_factors: Optional[tuple] = None  # per node: (lower, upper) ratios

    def __post_init__(self):
        object.__setattr__(self, "per_interval_curtailment", _readonly(np.asarray(self.per_interval_curtailment, dtype=np.float64)))
        object.__setattr__(self, "per_node_curtailment", _readonly(np.asarray(self.per_node_curtailment, dtype=np.float64)))


# ---------------------------------------------------------------------------
# validation


def validation_issues(instance: CurtailmentInstance, *, tolerance: float = DEFAULT_TOLERANCE) -> list[ValidationIssue]:
    """Collect every violation; an empty list means the instance is valid.

    Checks, in order: dimension signs, array shapes, finiteness,
    non-negativity, the mandatory zero-curtailment zero-cost default
    strategy at index 0, target/cap consistency (sum of floors must not
    exceed the cap), and budget rows (alpha in [0, 1], B >= 0, floors
    summing within the cap). A zero interval target is allowed here; the
    rounding-based solvers reject it at solve time.
    """
    issues: list[ValidationIssue] = []
    M, N, T = instance.num_nodes, instance.num_strategies, instance.num_intervals

    if M <= 0 or N <= 0 or T <= 0:
        issues.append(ValidationIssue("shape_mismatch", f"dimensions must be positive, got nodes={M} strategies={N} intervals={T}"))
        return issues

    expected = (T, M, N)
    for name in ("curtailment", "cost"):
        a = getattr(instance, name)
        if a.shape != expected:
            issues.append(ValidationIssue("shape_mismatch", f"{name} has shape {a.shape}, expected {expected}"))
    if instance.interval_targets.shape != (T,):
        issues.append(ValidationIssue("shape_mismatch", f"interval_targets has shape {instance.interval_targets.shape}, expected ({T},)"))
    if instance.budgets is not None and instance.budgets.shape != (M, 2):
        issues.append(ValidationIssue("shape_mismatch", f"budgets has shape {instance.budgets.shape}, expected ({M}, 2)"))
    if issues:
        # Remaining checks index into the arrays; shapes must be right first.
        return issues

    for name in ("curtailment", "cost", "interval_targets"):
        a = getattr(instance, name)
        if not np.all(np.isfinite(a)):
            issues.append(ValidationIssue("non_finite", f"{name} contains non-finite entries"))
    if not np.isfinite(instance.aggregate_cap):
        issues.append(ValidationIssue("non_finite", "aggregate_cap is not finite"))
    if instance.budgets is not None and not np.all(np.isfinite(instance.budgets)):
        issues.append(ValidationIssue("non_finite", "budgets contain non-finite entries"))
    if issues:
        return issues

    for name in ("curtailment", "cost", "interval_targets"):
        a = getattr(instance, name)
        if np.any(a < -tolerance):
            issues.append(ValidationIssue("negative_value", f"{name} contains negative entries"))
    if instance.aggregate_cap < -tolerance:
        issues.append(ValidationIssue("negative_value", "aggregate_cap is negative"))

    bad_default = (np.abs(instance.curtailment[:, :, 0]) > tolerance) | (np.abs(instance.cost[:, :, 0]) > tolerance)
    if np.any(bad_default):
        t, b = np.argwhere(bad_default)[0]
        issues.append(
            ValidationIssue(
                "missing_default",
                f"strategy 0 must curtail nothing at no cost; node {b} interval {t} has "
                f"(curtailment={instance.curtailment[t, b, 0]}, cost={instance.cost[t, b, 0]})",
            )
        )

    total_floor = float(np.sum(instance.interval_targets))
    if total_floor > instance.aggregate_cap + tolerance:
        issues.append(
            ValidationIssue(
                "targets_exceed_cap",
                f"interval targets sum to {total_floor}, above the aggregate cap {instance.aggregate_cap}",
            )
        )

    if instance.budgets is not None:
        alphas = instance.budgets[:, 0]
        ceilings = instance.budgets[:, 1]
        if np.any(alphas < -tolerance) or np.any(alphas > 1.0 + tolerance):
            issues.append(ValidationIssue("bad_budget", "budget fractions must lie in [0, 1]"))
        if np.any(ceilings < -tolerance):
            issues.append(ValidationIssue("bad_budget", "budget ceilings must be non-negative"))
        floor_sum = float(np.sum(np.clip(alphas, 0.0, 1.0) * np.maximum(ceilings, 0.0)))
        if floor_sum > instance.aggregate_cap + tolerance:
            issues.append(
                ValidationIssue(
                    "bad_budget",
                    f"budget floors sum to {floor_sum}, above the aggregate cap {instance.aggregate_cap}",
                )
            )

    return issues


def validate(instance: CurtailmentInstance, *, tolerance: float = DEFAULT_TOLERANCE) -> CurtailmentInstance:
    """Return the instance unchanged if valid, else raise with every issue.

    Idempotent: validating a validated instance finds nothing new.
    """
    issues = validation_issues(instance, tolerance=tolerance)
    if issues:
        raise InvalidInstanceError(issues)
    return instance


# ---------------------------------------------------------------------------
# evaluation


def _ratio(value: float, denom: float, tolerance: float):
    if abs(denom) <= tolerance:
        return None
    return value / denom


def evaluate(instance: CurtailmentInstance, schedule: Schedule, *, tolerance: float = DEFAULT_TOLERANCE) -> EvaluationReport:
    """Total cost, achieved curtailments, and violation factors for a schedule.

    Pure accounting: no constraint is enforced here, only measured.
    Raises IndexOutOfRangeError when the schedule's shape does not match
    the instance or an index falls outside [0, num_strategies).
    """
    M, N, T = instance.num_nodes, instance.num_strategies, instance.num_intervals
    a = schedule.assignment
    if a.shape != (T, M):
        raise IndexOutOfRangeError(f"schedule shape {a.shape} does not match instance ({T}, {M})")
    if np.any(a < 0) or np.any(a >= N):
        raise IndexOutOfRangeError(f"strategy indices must lie in [0, {N})")

    t_idx = np.arange(T)[:, None]
    b_idx = np.arange(M)[None, :]
    chosen_curtailment = instance.curtailment[t_idx, b_idx, a]  # (T, M)
    chosen_cost = instance.cost[t_idx, b_idx, a]

    per_interval = chosen_curtailment.sum(axis=1)
    per_node = chosen_curtailment.sum(axis=0)
    aggregate = float(per_interval.sum())
    total_cost = float(chosen_cost.sum())

    target_factors = tuple(
        _ratio(float(per_interval[t]), float(instance.interval_targets[t]), tolerance) for t in range(T)
    )
    cap_factor = _ratio(aggregate, instance.aggregate_cap, tolerance)

    budget_factors = None
    if instance.budgets is not None:
        rows = []
        for b in range(M):
            alpha_b, ceiling = float(instance.budgets[b, 0]), float(instance.budgets[b, 1])
            achieved = float(per_node[b])
            rows.append((_ratio(achieved, alpha_b * ceiling, tolerance), _ratio(achieved, ceiling, tolerance)))
        budget_factors = tuple(rows)

    return EvaluationReport(
        total_cost=total_cost,
        per_interval_curtailment=per_interval,
        aggregate_curtailment=aggregate,
        per_node_curtailment=per_node,
        target_factors=target_factors,
        cap_factor=cap_factor,
        budget_factors=budget_factors,
    )
