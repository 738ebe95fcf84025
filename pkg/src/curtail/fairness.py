"""Budget-banded scheduling via LP relaxation and midpoint rounding.

The discrete problem with per-node budget bands is relaxed to an LP over
mixture weights x[t, b, j] in [0, 1] (one convexity row per slot).  Each
slot's expected curtailment is then rounded to the nearest available
strategy value, ties upward.  Consequences of the midpoint rule:

* a slot never rounds up past twice its expected value, so the achieved
  aggregate stays within 2x the cap and each node within 2x its ceiling;
* with linear costs the rounded cost is at most 2x the relaxation
  optimum, with quadratic (pure gamma^2 scaling) at most 4x;
* rounding down loses at most a factor k where k bounds
  (next/previous + 1)/2 over consecutive positive strategy values, so
  interval floors hold within 1/k and node floors within 1/k - unless a
  slot with positive expected curtailment rounds down across a zero gap,
  which voids the lower-side guarantee (recorded, never asserted).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import GuaranteeViolationError, LpInfeasibleError, MissingBudgetsError
from .model import (
    DEFAULT_TOLERANCE,
    CurtailmentInstance,
    EvaluationReport,
    Schedule,
    evaluate,
    validate,
)
from .simplex import LinearProgram, LpSolution, solve_lp

COST_KINDS = ("linear", "quadratic", "custom")

# Rounded-cost factor over the relaxation optimum, by cost kind.
COST_FACTOR_BOUNDS = {"linear": 2.0, "quadratic": 4.0, "custom": None}


@dataclass(frozen=True)
class FairnessConfig:
    """Declares how strategy costs scale with curtailment.

    The cost arrays are opaque numbers; the caller states their shape so
    the matching rounded-cost guarantee can be asserted ("custom" asserts
    none).  `lp_tolerance` is the relative feasibility tolerance passed to
    the LP solver.
    """

    cost_kind: str = "linear"
    tolerance: float = DEFAULT_TOLERANCE
    lp_tolerance: float = 1e-7

    def __post_init__(self):
        if self.cost_kind not in COST_KINDS:
            raise ValueError(f"cost_kind must be one of {COST_KINDS}, got {self.cost_kind!r}")


def variable_index(instance: CurtailmentInstance, t: int, b: int, j: int) -> int:
    """Column of x[t, b, j] in the relaxation: slots vary fastest by j."""
    return (t * instance.num_nodes + b) * instance.num_strategies + j


def build_relaxation(instance: CurtailmentInstance) -> LinearProgram:
    """LP over mixture weights; budget rows only when the instance has budgets.

    Rows, in order: one convexity equality per (interval, node) slot, one
    target floor per interval, the aggregate cap, then per budgeted node a
    ceiling row and (when the floor is positive) a floor row.
    """
    M, N, T = instance.num_nodes, instance.num_strategies, instance.num_intervals
    n = T * M * N
    gamma = instance.curtailment.reshape(T, M * N)

    rows: list[np.ndarray] = []
    senses: list[str] = []
    rhs: list[float] = []

    for t in range(T):
        for b in range(M):
            row = np.zeros(n)
            start = variable_index(instance, t, b, 0)
            row[start : start + N] = 1.0
            rows.append(row)
            senses.append("eq")
            rhs.append(1.0)

    for t in range(T):
        row = np.zeros(n)
        row[t * M * N : (t + 1) * M * N] = gamma[t]
        rows.append(row)
        senses.append("ge")
        rhs.append(float(instance.interval_targets[t]))

    cap_row = instance.curtailment.reshape(-1).copy()
    rows.append(cap_row)
    senses.append("le")
    rhs.append(instance.aggregate_cap)

    if instance.budgets is not None:
        for b in range(M):
            node_row = np.zeros(n)
            for t in range(T):
                start = variable_index(instance, t, b, 0)
                node_row[start : start + N] = instance.curtailment[t, b]
            alpha_b, ceiling = float(instance.budgets[b, 0]), float(instance.budgets[b, 1])
            rows.append(node_row)
            senses.append("le")
            rhs.append(ceiling)
            floor = alpha_b * ceiling
            if floor > 0.0:
                rows.append(node_row.copy())
                senses.append("ge")
                rhs.append(floor)

    return LinearProgram(
        objective=instance.cost.reshape(-1).copy(),
        lhs=np.vstack(rows),
        senses=tuple(senses),
        rhs=np.asarray(rhs),
        lower=np.zeros(n),
        upper=np.ones(n),
    )


def solve_relaxation(instance: CurtailmentInstance, *, lp_tolerance: float = 1e-7) -> LpSolution:
    return solve_lp(build_relaxation(instance), tolerance=lp_tolerance)


def expected_curtailment(instance: CurtailmentInstance, x: np.ndarray) -> np.ndarray:
    """Per-slot expected curtailment of a relaxation point, shape (T, M).

    Tiny negative weights from solver tolerance are clipped to zero.
    """
    M, N, T = instance.num_nodes, instance.num_strategies, instance.num_intervals
    weights = np.clip(np.asarray(x, dtype=np.float64).reshape(T, M, N), 0.0, None)
    return np.sum(weights * instance.curtailment, axis=2)


@dataclass(frozen=True, eq=False)
class RoundingOutcome:
    """Schedule plus the events that matter to the lower-side guarantee."""

    schedule: Schedule
    rounded_values: np.ndarray  # (T, M) chosen curtailment per slot
    zero_drop_slots: tuple  # (t, b) slots that rounded a positive value to 0


def round_expected(
    instance: CurtailmentInstance,
    expected: np.ndarray,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
) -> RoundingOutcome:
    """Round each slot's expected value to a strategy value, ties upward.

    The bracket is taken over the slot's sorted distinct strategy values;
    expected values are clamped into [smallest, largest].  Among
    strategies sharing the chosen value the cheapest (then lowest) index
    wins.
    """
    M, T = instance.num_nodes, instance.num_intervals
    assignment = np.empty((T, M), dtype=np.int64)
    chosen_values = np.empty((T, M))
    zero_drops = []
    for t in range(T):
        for b in range(M):
            values = np.unique(instance.curtailment[t, b])
            g = min(max(float(expected[t, b]), float(values[0])), float(values[-1]))
            pos = int(np.searchsorted(values, g, side="left"))
            if pos == 0:
                chosen = float(values[0])
            elif pos == values.size:
                chosen = float(values[-1])
            else:
                below, above = float(values[pos - 1]), float(values[pos])
                chosen = above if (g - below) >= (above - g) else below
            if chosen <= tolerance and float(expected[t, b]) > tolerance:
                zero_drops.append((t, b))
            matches = np.nonzero(instance.curtailment[t, b] == chosen)[0]
            j = int(matches[np.argmin(instance.cost[t, b][matches])])
            assignment[t, b] = j
            chosen_values[t, b] = instance.curtailment[t, b, j]
    return RoundingOutcome(
        schedule=Schedule(assignment=assignment),
        rounded_values=chosen_values,
        zero_drop_slots=tuple(zero_drops),
    )


def spacing_factor(instance: CurtailmentInstance) -> float:
    """Smallest k with next <= (2k - 1) * previous over positive value pairs.

    Computed per slot over sorted distinct positive strategy values; 1.0
    when no slot has two positive values.  Gaps that start at zero are
    excluded - they are the zero-drop events, not a spacing matter.
    """
    k = 1.0
    for t in range(instance.num_intervals):
        for b in range(instance.num_nodes):
            values = np.unique(instance.curtailment[t, b])
            positive = values[values > 0.0]
            if positive.size >= 2:
                ratios = positive[1:] / positive[:-1]
                k = max(k, float(np.max((ratios + 1.0) / 2.0)))
    return k


@dataclass(frozen=True, eq=False)
class FairSolution:
    """Rounded schedule, its report, and the guarantee bookkeeping."""

    schedule: Schedule
    report: EvaluationReport
    lp_optimum: float
    lp_x: np.ndarray
    cost_kind: str
    cost_factor_bound: Optional[float]  # 2, 4, or None for custom
    spacing: float  # factor k from spacing_factor()
    lower_guarantee: bool  # False when a zero-drop event occurred
    zero_drop_slots: tuple


def solve_fair(instance: CurtailmentInstance, config: FairnessConfig = FairnessConfig()) -> FairSolution:
    """Relax, solve, round; assert the guarantees the theory promises.

    Requires budgets on the instance (the plain problem has cheaper
    solvers).  Raises LpInfeasibleError when the relaxation is infeasible,
    and GuaranteeViolationError when an asserted bound fails.  The
    aggregate and per-node bounds hold for any data, so tripping one of
    those means a bug.  The cost-factor bound additionally presumes costs
    really are the declared kind (proportional to value, or to its
    square); declaring "linear" over an arbitrary cost table can fail the
    assertion legitimately.  Use "custom" when no such structure holds.
    """
    validate(instance, tolerance=config.tolerance)
    if instance.budgets is None:
        raise MissingBudgetsError("fair scheduling needs per-node budgets; none are set")

    lp_solution = solve_relaxation(instance, lp_tolerance=config.lp_tolerance)
    if lp_solution.status == "infeasible":
        raise LpInfeasibleError("the budget-banded relaxation has no feasible point")
    if lp_solution.status != "optimal":
        raise GuaranteeViolationError(
            f"relaxation reported {lp_solution.status}; a box-bounded program cannot be unbounded"
        )

    expected = expected_curtailment(instance, lp_solution.x)
    outcome = round_expected(instance, expected, tolerance=config.tolerance)
    report = evaluate(instance, outcome.schedule, tolerance=config.tolerance)

    lp_optimum = float(lp_solution.objective)
    slack = 1e-7
    cap = instance.aggregate_cap
    if report.aggregate_curtailment > 2.0 * cap + slack * (1.0 + cap):
        raise GuaranteeViolationError(
            f"aggregate {report.aggregate_curtailment} exceeds twice the cap {cap}"
        )
    for b in range(instance.num_nodes):
        ceiling = float(instance.budgets[b, 1])
        if float(report.per_node_curtailment[b]) > 2.0 * ceiling + slack * (1.0 + ceiling):
            raise GuaranteeViolationError(f"node {b} exceeds twice its ceiling {ceiling}")
    bound = COST_FACTOR_BOUNDS[config.cost_kind]
    if bound is not None and report.total_cost > bound * lp_optimum + slack * (1.0 + abs(lp_optimum)):
        raise GuaranteeViolationError(
            f"cost {report.total_cost} exceeds {bound}x the relaxation optimum {lp_optimum}"
        )

    return FairSolution(
        schedule=outcome.schedule,
        report=report,
        lp_optimum=lp_optimum,
        lp_x=lp_solution.x,
        cost_kind=config.cost_kind,
        cost_factor_bound=bound,
        spacing=spacing_factor(instance),
        lower_guarantee=not outcome.zero_drop_slots,
        zero_drop_slots=outcome.zero_drop_slots,
    )
