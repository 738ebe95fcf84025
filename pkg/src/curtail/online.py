"""Greedy per-interval scheduling when targets arrive one at a time.

Horizon-level limits are prorated onto each arriving interval by its
share of the forecast target total: with realized target g, the interval
gets an upper target (cap / forecast_total) * g and per-node budgets
(B_b / forecast_total) * g, floors scaled by alpha_b.  Strategies outside
a node's prorated band are dropped, a single-interval rounding table is
built over what remains, and the cheapest rounded amount inside
[g, upper target] wins.  No cost guarantee; the point is bounded |regret|
in practice, measured against the offline fair solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dp import _exact_ceil_div, _table_from_arrays
from .errors import (
    EpsilonOutOfRangeError,
    MissingBudgetsError,
    ZeroTargetError,
)
from .model import (
    DEFAULT_TOLERANCE,
    CurtailmentInstance,
    EvaluationReport,
    Schedule,
    evaluate,
    validate,
)


@dataclass(frozen=True, eq=False)
class OnlineContext:
    """Horizon constants known up front: cap, forecast total, budgets."""

    num_nodes: int
    aggregate_cap: float
    target_total: float  # forecast sum of interval targets
    budgets: np.ndarray  # (M, 2) rows (alpha_b, B_b)

    def __post_init__(self):
        budgets = np.asarray(self.budgets, dtype=np.float64)
        if budgets.shape != (self.num_nodes, 2):
            raise MissingBudgetsError(
                f"budgets must have shape ({self.num_nodes}, 2), got {budgets.shape}"
            )
        budgets.setflags(write=False)
        object.__setattr__(self, "budgets", budgets)
        if self.target_total <= 0.0:
            raise ZeroTargetError("the forecast target total must be positive")


@dataclass(frozen=True, eq=False)
class OnlineStep:
    """One arriving interval: realized target plus that interval's menus."""

    target: float
    curtailment: np.ndarray  # (M, N)
    cost: np.ndarray  # (M, N)

    def __post_init__(self):
        c = np.asarray(self.curtailment, dtype=np.float64)
        k = np.asarray(self.cost, dtype=np.float64)
        if c.ndim != 2 or k.shape != c.shape:
            raise ValueError("curtailment and cost must be matching 2-D arrays")
        c.setflags(write=False)
        k.setflags(write=False)
        object.__setattr__(self, "curtailment", c)
        object.__setattr__(self, "cost", k)


@dataclass(frozen=True, eq=False)
class OnlineBounds:
    """Prorated per-interval limits derived from the context and one step."""

    target_lower: float  # the realized target itself
    target_upper: float  # (cap / forecast_total) * realized target
    node_ceilings: np.ndarray  # (M,)
    node_floors: np.ndarray  # (M,)


def derive_bounds(context: OnlineContext, step: OnlineStep) -> OnlineBounds:
    """Prorate the horizon cap and budgets onto this interval.

    Ratios are formed first and then multiplied by the realized target,
    exactly as stated: upper = (cap / total) * target.
    """
    g = float(step.target)
    upper = (context.aggregate_cap / context.target_total) * g
    ceilings = (context.budgets[:, 1] / context.target_total) * g
    floors = context.budgets[:, 0] * ceilings
    ceilings.setflags(write=False)
    floors.setflags(write=False)
    return OnlineBounds(target_lower=g, target_upper=upper, node_ceilings=ceilings, node_floors=floors)


@dataclass(frozen=True, eq=False)
class OnlineStepSolution:
    status: str  # "solved" or "infeasible"
    assignment: Optional[np.ndarray]  # (M,) strategy indices
    cost: Optional[float]
    curtailment: Optional[float]
    bounds: OnlineBounds

    @property
    def feasible(self) -> bool:
        return self.status == "solved"


def solve_step(
    context: OnlineContext,
    step: OnlineStep,
    epsilon: float,
    *,
    strict_filter: bool = False,
    tolerance: float = DEFAULT_TOLERANCE,
) -> OnlineStepSolution:
    """Pick this interval's strategies: cheapest rounded amount in the band.

    By default the zero-curtailment strategies survive the band filter
    even when a node's floor is positive, so a node can always sit out;
    `strict_filter` drops them too (a node with an empty menu then forces
    an infeasible step).  Infeasible steps are values, not exceptions.
    """
    if not (0.0 < epsilon <= 1.0):
        raise EpsilonOutOfRangeError(f"epsilon must lie in (0, 1], got {epsilon}")
    M = context.num_nodes
    if step.curtailment.shape[0] != M:
        raise ValueError(f"step has {step.curtailment.shape[0]} nodes, context has {M}")
    g = float(step.target)
    if g <= 0.0:
        raise ZeroTargetError("the realized interval target must be positive")
    if np.any(step.curtailment < -tolerance) or np.any(step.cost < -tolerance):
        raise ValueError("curtailments and costs must be non-negative")

    bounds = derive_bounds(context, step)
    unit = epsilon * g / M
    cap_units = _exact_ceil_div(bounds.target_upper, unit)
    floor_units = _exact_ceil_div(g, unit)

    in_band = (step.curtailment >= bounds.node_floors[:, None] - tolerance) & (
        step.curtailment <= bounds.node_ceilings[:, None] + tolerance
    )
    if not strict_filter:
        in_band |= step.curtailment <= tolerance

    units = np.empty(step.curtailment.shape, dtype=np.int64)
    flat_vals = step.curtailment.reshape(-1)
    flat_keep = in_band.reshape(-1)
    flat_units = units.reshape(-1)
    for i in range(flat_vals.size):
        # Filtered-out strategies get an amount past the table cap, which
        # the table builder skips.
        flat_units[i] = _exact_ceil_div(float(flat_vals[i]), unit) if flat_keep[i] else cap_units + 1

    table = _table_from_arrays(0, units, step.cost, cap_units)
    totals = table.totals()
    reachable = np.isfinite(totals)
    reachable[: min(floor_units, reachable.size)] = False
    options = np.nonzero(reachable)[0]
    if options.size == 0:
        return OnlineStepSolution(status="infeasible", assignment=None, cost=None, curtailment=None, bounds=bounds)

    # argmin keeps the smallest rounded amount among cost ties.
    pick = int(options[np.argmin(totals[options])])
    from .dp import reconstruct_interval

    assignment = reconstruct_interval(table, float(totals[pick]), pick)
    achieved = float(step.curtailment[np.arange(M), assignment].sum())
    cost = float(step.cost[np.arange(M), assignment].sum())
    return OnlineStepSolution(
        status="solved", assignment=assignment, cost=cost, curtailment=achieved, bounds=bounds
    )


def context_from_instance(instance: CurtailmentInstance) -> OnlineContext:
    """Horizon constants for replaying an instance interval by interval."""
    if instance.budgets is None:
        raise MissingBudgetsError("online proration needs per-node budgets")
    return OnlineContext(
        num_nodes=instance.num_nodes,
        aggregate_cap=instance.aggregate_cap,
        target_total=float(np.sum(instance.interval_targets)),
        budgets=instance.budgets,
    )


@dataclass(frozen=True, eq=False)
class OnlineHorizonOutcome:
    status: str  # "solved" or "infeasible"
    schedule: Optional[Schedule]
    report: Optional[EvaluationReport]
    steps: tuple  # every OnlineStepSolution up to and including the failure
    failed_interval: Optional[int]

    @property
    def feasible(self) -> bool:
        return self.status == "solved"

    @property
    def total_cost(self) -> Optional[float]:
        return self.report.total_cost if self.report is not None else None


def run_horizon(
    instance: CurtailmentInstance,
    epsilon: float,
    *,
    context: Optional[OnlineContext] = None,
    strict_filter: bool = False,
    tolerance: float = DEFAULT_TOLERANCE,
) -> OnlineHorizonOutcome:
    """Replay an instance's intervals through the online scheduler.

    The context defaults to the instance's own cap, target sum, and
    budgets, i.e. a perfect forecast of the totals but no lookahead into
    per-interval menus.  Stops at the first infeasible step.
    """
    validate(instance, tolerance=tolerance)
    if context is None:
        context = context_from_instance(instance)
    steps = []
    rows = []
    for t in range(instance.num_intervals):
        step = OnlineStep(
            target=float(instance.interval_targets[t]),
            curtailment=instance.curtailment[t],
            cost=instance.cost[t],
        )
        result = solve_step(context, step, epsilon, strict_filter=strict_filter, tolerance=tolerance)
        steps.append(result)
        if not result.feasible:
            return OnlineHorizonOutcome(
                status="infeasible",
                schedule=None,
                report=None,
                steps=tuple(steps),
                failed_interval=t,
            )
        rows.append(result.assignment)
    schedule = Schedule(assignment=np.stack(rows))
    report = evaluate(instance, schedule, tolerance=tolerance)
    return OnlineHorizonOutcome(
        status="solved", schedule=schedule, report=report, steps=tuple(steps), failed_interval=None
    )
