"""Exact small-instance solvers used as ground truth in tests.

`brute_force` enumerates every schedule (capped); `exact_dp` reuses the
rounding scheduler with the step forced to 1 on integer data, where
rounding is lossless and the search space equals the exact feasible set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import dp
from .errors import MissingBudgetsError, TooLargeError
from .model import DEFAULT_TOLERANCE, CurtailmentInstance, Schedule, evaluate, validate

PROBLEMS = ("auto", "plain", "fair")


@dataclass(frozen=True, eq=False)
class OracleSolution:
    status: str  # "solved" or "infeasible"
    schedule: Optional[Schedule]
    cost: Optional[float]

    @property
    def feasible(self) -> bool:
        return self.status == "solved"


def _resolve_problem(instance: CurtailmentInstance, problem: str) -> str:
    if problem not in PROBLEMS:
        raise ValueError(f"problem must be one of {PROBLEMS}, got {problem!r}")
    if problem == "auto":
        return "fair" if instance.budgets is not None else "plain"
    return problem


def brute_force(
    instance: CurtailmentInstance,
    problem: str = "auto",
    *,
    enumeration_cap: int = 10_000_000,
    tolerance: float = DEFAULT_TOLERANCE,
    chunk_size: int = 1 << 16,
) -> OracleSolution:
    """Exhaustive minimum over all num_strategies ** (nodes * intervals)
    schedules.

    "plain" enforces interval floors and the aggregate cap; "fair" adds the
    per-node budget bands ("auto" picks by whether budgets are present).
    Cost ties break lexicographically by flattened assignment.  Instances
    with more schedules than `enumeration_cap` raise TooLargeError.
    """
    validate(instance, tolerance=tolerance)
    mode = _resolve_problem(instance, problem)
    if mode == "fair" and instance.budgets is None:
        raise MissingBudgetsError("fair enumeration needs budgets on the instance")

    M, N, T = instance.num_nodes, instance.num_strategies, instance.num_intervals
    slots = M * T
    size = N**slots
    if size > enumeration_cap:
        raise TooLargeError(f"{size} schedules exceed the enumeration cap {enumeration_cap}")

    # Slot s maps to (interval s // M, node s % M); the first slot is the
    # most significant digit, so ascending flat index = lexicographic
    # order over the flattened assignment.
    powers = (N ** np.arange(slots - 1, -1, -1)).astype(np.int64)
    t_of_slot = np.arange(slots) // M
    b_of_slot = np.arange(slots) % M

    targets = instance.interval_targets
    cap = instance.aggregate_cap
    if mode == "fair":
        floors = instance.budgets[:, 0] * instance.budgets[:, 1]
        ceilings = instance.budgets[:, 1]

    best_cost = np.inf
    best_index = -1
    for start in range(0, size, chunk_size):
        stop = min(start + chunk_size, size)
        idx = np.arange(start, stop, dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % N  # (chunk, slots)

        values = np.empty((idx.size, slots))
        costs = np.empty((idx.size, slots))
        for s in range(slots):
            values[:, s] = instance.curtailment[t_of_slot[s], b_of_slot[s], digits[:, s]]
            costs[:, s] = instance.cost[t_of_slot[s], b_of_slot[s], digits[:, s]]

        per_interval = values.reshape(idx.size, T, M).sum(axis=2)
        aggregate = per_interval.sum(axis=1)
        total = costs.sum(axis=1)

        feasible = np.all(per_interval >= targets[None, :] - tolerance, axis=1)
        feasible &= aggregate <= cap + tolerance
        if mode == "fair":
            per_node = values.reshape(idx.size, T, M).sum(axis=1)
            feasible &= np.all(per_node >= floors[None, :] - tolerance, axis=1)
            feasible &= np.all(per_node <= ceilings[None, :] + tolerance, axis=1)

        if np.any(feasible):
            masked = np.where(feasible, total, np.inf)
            local = int(np.argmin(masked))  # first minimum = lowest index
            if masked[local] < best_cost:
                best_cost = float(masked[local])
                best_index = start + local

    if best_index < 0:
        return OracleSolution(status="infeasible", schedule=None, cost=None)

    digits = (best_index // powers) % N
    schedule = Schedule(assignment=digits.reshape(T, M))
    # Report the cost through evaluate so every consumer sums in one order.
    cost = evaluate(instance, schedule, tolerance=tolerance).total_cost
    return OracleSolution(status="solved", schedule=schedule, cost=cost)


def exact_dp(
    instance: CurtailmentInstance,
    *,
    table_cap: int = 1_000_000,
    tolerance: float = DEFAULT_TOLERANCE,
) -> OracleSolution:
    """Exact plain-problem optimum on integer-valued curtailment data.

    Tables are indexed by whole kWh, so every curtailment, target, and the
    cap must be integral; the cap must not exceed `table_cap` entries.
    Budgets, if present, are ignored (the plain problem).  All-zero
    targets are fine here: the empty schedule costs 0.
    """
    validate(instance, tolerance=tolerance)
    for name in ("curtailment", "interval_targets"):
        a = getattr(instance, name)
        if not np.array_equal(a, np.rint(a)):
            raise ValueError(f"exact tables need integer values; {name} has fractional entries")
    if instance.aggregate_cap != round(instance.aggregate_cap):
        raise ValueError("exact tables need an integer aggregate cap")
    if instance.aggregate_cap > table_cap:
        raise TooLargeError(f"cap {instance.aggregate_cap} exceeds the table cap {table_cap}")

    solution = dp.solve(instance, epsilon=1.0, tolerance=tolerance, step_override=1.0)
    if not solution.feasible:
        return OracleSolution(status="infeasible", schedule=None, cost=None)
    cost = evaluate(instance, solution.schedule, tolerance=tolerance).total_cost
    return OracleSolution(status="solved", schedule=solution.schedule, cost=cost)
