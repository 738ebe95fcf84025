"""Rounded two-level dynamic-programming scheduler.

Curtailment values are rounded up to integer multiples of a step
``step = epsilon * min_target / num_nodes``.  A per-interval table gives
the cheapest way for a prefix of nodes to reach each rounded amount
exactly; a horizon table composes the per-interval optima across
intervals.  The returned schedule meets every interval target to within a
(1 - epsilon) factor and the aggregate cap to within (1 + epsilon), and
its cost never exceeds the exact discrete optimum: the working cap is
widened from ceil(cap/step) to floor((1 + epsilon) * cap / step), which
is provably still within the (1 + epsilon) aggregate bound and is wide
enough to cover the rounded image of every exactly-feasible schedule
(the rounding waste is below one unit per nonzero slot, at most
num_nodes * num_intervals units total, and
epsilon * cap / step >= num_nodes * num_intervals whenever the targets
sum within the cap).

Per-interval tables are independent of one another and may be built in
parallel; this implementation builds them sequentially for determinism.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import (
    EpsilonOutOfRangeError,
    InconsistentTableError,
    ZeroTargetError,
)
from .model import DEFAULT_TOLERANCE, CurtailmentInstance, Schedule, validate

INFEASIBLE = np.inf


def _exact_ceil_div(value: float, step: float) -> int:
    # Rational arithmetic so that value/step <= result < value/step + 1
    # holds exactly; float division could cross an integer boundary.
    q = Fraction(value) / Fraction(step)
    return int(-((-q) // 1))


def _exact_floor_scaled(scale_num: Fraction, value: float, step: float) -> int:
    return int((scale_num * Fraction(value) / Fraction(step)) // 1)


@dataclass(frozen=True, eq=False)
class ScaledInstance:
    """Instance curtailments, targets, and cap in integer rounding units.

    ``step`` is the kWh size of one unit; every kWh quantity x maps to
    ceil(x / step), computed in exact rational arithmetic. ``cap_units``
    is the rounded aggregate cap itself; solvers may search a wider
    working cap (see module docstring).
    """

    step: float
    epsilon: float
    curtailment_units: np.ndarray  # (T, M, N) int64
    target_units: np.ndarray  # (T,) int64
    cap_units: int


def scale_instance(
    instance: CurtailmentInstance,
    epsilon: float,
    *,
    step_override: Optional[float] = None,
) -> ScaledInstance:
    """Round every curtailment quantity up to integer step multiples.

    The step is epsilon * (smallest interval target) / num_nodes; epsilon
    must lie in (0, 1] and every target must be positive, otherwise the
    step would be zero.  ``step_override`` replaces the derived step (the
    exactness hook: step 1.0 on integer data makes rounding lossless) and
    skips the positive-target requirement.
    """
    if not (0.0 < epsilon <= 1.0):
        raise EpsilonOutOfRangeError(f"epsilon must lie in (0, 1], got {epsilon}")
    if step_override is None:
        min_target = float(np.min(instance.interval_targets))
        if min_target <= 0.0:
            raise ZeroTargetError(
                "every interval target must be positive: the rounding step scales with the smallest target"
            )
        step = epsilon * min_target / instance.num_nodes
    else:
        step = float(step_override)
        if step <= 0.0:
            raise ValueError(f"step override must be positive, got {step}")

    flat = instance.curtailment.reshape(-1)
    units = np.fromiter(
        (_exact_ceil_div(float(v), step) for v in flat), dtype=np.int64, count=flat.size
    ).reshape(instance.curtailment.shape)
    targets = np.fromiter(
        (_exact_ceil_div(float(v), step) for v in instance.interval_targets),
        dtype=np.int64,
        count=instance.num_intervals,
    )
    cap_units = _exact_ceil_div(instance.aggregate_cap, step)
    units.setflags(write=False)
    targets.setflags(write=False)
    return ScaledInstance(
        step=step,
        epsilon=epsilon,
        curtailment_units=units,
        target_units=targets,
        cap_units=cap_units,
    )


@dataclass(frozen=True, eq=False)
class IntervalCostTable:
    """Cheapest cost for node prefixes to reach each rounded amount exactly.

    ``cost[b, u]`` is the least cost over nodes 1..b whose rounded
    curtailments sum to exactly u units (inf where unreachable); row 0 is
    the empty prefix.  ``choice[b, u]`` is the strategy index node b uses
    in that optimum, -1 where unreachable; ties take the lowest index.
    """

    interval: int
    cost: np.ndarray  # (M+1, K+1) float64
    choice: np.ndarray  # (M+1, K+1) int32
    units: np.ndarray  # (M, N) int64, rounded curtailments this interval
    strategy_cost: np.ndarray  # (M, N) float64

    @property
    def num_nodes(self) -> int:
        return self.units.shape[0]

    def totals(self) -> np.ndarray:
        """Cost row for the full node set, one entry per rounded amount."""
        return self.cost[self.num_nodes]


def _table_from_arrays(interval: int, units: np.ndarray, costs: np.ndarray, cap: int) -> IntervalCostTable:
    M, N = units.shape
    K = int(cap)
    cost = np.full((M + 1, K + 1), INFEASIBLE)
    choice = np.full((M + 1, K + 1), -1, dtype=np.int32)
    cost[0, 0] = 0.0
    stack = np.empty((N, K + 1))
    for b in range(1, M + 1):
        stack.fill(INFEASIBLE)
        for j in range(N):
            u = int(units[b - 1, j])
            c = float(costs[b - 1, j])
            if 0 <= u <= K:
                stack[j, u:] = cost[b - 1, : K + 1 - u] + c
        # argmin keeps the first (lowest-index) strategy on cost ties.
        cost[b] = stack.min(axis=0)
        choice[b] = stack.argmin(axis=0).astype(np.int32)
        choice[b][~np.isfinite(cost[b])] = -1
    cost.setflags(write=False)
    choice.setflags(write=False)
    units = np.array(units, dtype=np.int64)
    units.setflags(write=False)
    costs = np.array(costs, dtype=np.float64)
    costs.setflags(write=False)
    return IntervalCostTable(interval=interval, cost=cost, choice=choice, units=units, strategy_cost=costs)


def build_interval_table(
    scaled: ScaledInstance,
    instance: CurtailmentInstance,
    t: int,
    *,
    cap: Optional[int] = None,
) -> IntervalCostTable:
    """Build the per-interval table for interval t up to ``cap`` units.

    The cap defaults to the rounded aggregate cap; amounts above it can
    never appear in a returned schedule.
    """
    K = scaled.cap_units if cap is None else int(cap)
    return _table_from_arrays(t, scaled.curtailment_units[t], instance.cost[t], K)


def reconstruct_interval(table: IntervalCostTable, cost_value: float, units: int) -> np.ndarray:
    """Recover one strategy index per node for a reachable (cost, units) entry.

    Walks the stored choices from the last node back to the first,
    subtracting each chosen strategy's units.  Any dead end, leftover
    units, or cost mismatch raises InconsistentTableError: the table
    promised an entry it cannot reproduce, which is an implementation bug.
    """
    M = table.num_nodes
    u = int(units)
    if u < 0 or u >= table.cost.shape[1]:
        raise InconsistentTableError(f"units {u} outside table range [0, {table.cost.shape[1] - 1}]")
    if not np.isfinite(table.cost[M, u]):
        raise InconsistentTableError(f"entry ({u} units) is marked unreachable")
    out = np.empty(M, dtype=np.int64)
    for b in range(M, 0, -1):
        j = int(table.choice[b, u])
        if j < 0:
            raise InconsistentTableError(f"no stored choice at node {b}, {u} units")
        out[b - 1] = j
        u -= int(table.units[b - 1, j])
        if u < 0:
            raise InconsistentTableError(f"choice at node {b} overshoots the remaining {u} units")
    if u != 0:
        raise InconsistentTableError(f"{u} units left over after visiting every node")
    total = float(table.strategy_cost[np.arange(M), out].sum())
    if abs(total - cost_value) > 1e-9 * max(1.0, abs(cost_value)):
        raise InconsistentTableError(
            f"reconstructed cost {total} does not reproduce the table entry {cost_value}"
        )
    return out


def _reconstruct_by_argmin(table: IntervalCostTable, cost_value: float, units: int) -> np.ndarray:
    """Reconstruction that re-derives each choice by scanning strategies.

    Cross-check used by the test suite: must agree with the stored-choice
    walk, including the lowest-index tie rule.
    """
    M = table.num_nodes
    u = int(units)
    out = np.empty(M, dtype=np.int64)
    for b in range(M, 0, -1):
        best_j, best_c = -1, INFEASIBLE
        for j in range(table.units.shape[1]):
            uj = int(table.units[b - 1, j])
            if uj > u:
                continue
            c = table.cost[b - 1, u - uj] + float(table.strategy_cost[b - 1, j])
            if c < best_c:
                best_c, best_j = c, j
        if best_j < 0:
            raise InconsistentTableError(f"no strategy reproduces the entry at node {b}, {u} units")
        out[b - 1] = best_j
        u -= int(table.units[b - 1, best_j])
    if u != 0:
        raise InconsistentTableError(f"{u} units left over after visiting every node")
    return out


@dataclass(frozen=True, eq=False)
class HorizonCostTable:
    """Cheapest cost to reach each rounded aggregate after a prefix of intervals.

    ``cost[t, u]`` covers intervals 1..t; ``choice[t, u]`` indexes into
    that interval's candidate list (per-interval optima meeting the
    interval's rounded target), -1 where unreachable.
    """

    cost: np.ndarray  # (T+1, K+1)
    choice: np.ndarray  # (T+1, K+1) int32
    candidate_units: tuple  # per interval: int64 array of rounded amounts
    candidate_costs: tuple  # per interval: float64 array of costs


def build_horizon_table(scaled: ScaledInstance, tables: list, *, cap: Optional[int] = None) -> HorizonCostTable:
    K = scaled.cap_units if cap is None else int(cap)
    T = len(tables)
    cost = np.full((T + 1, K + 1), INFEASIBLE)
    choice = np.full((T + 1, K + 1), -1, dtype=np.int32)
    cost[0, 0] = 0.0
    cand_units = []
    cand_costs = []
    for t in range(T):
        totals = tables[t].totals()
        reachable = np.isfinite(totals[: K + 1])
        reachable[: min(int(scaled.target_units[t]), K + 1)] = False
        us = np.nonzero(reachable)[0].astype(np.int64)
        cs = totals[us]
        cand_units.append(us)
        cand_costs.append(cs)
        prev = cost[t]
        new_cost = np.full(K + 1, INFEASIBLE)
        new_choice = np.full(K + 1, -1, dtype=np.int32)
        for i in range(us.size):
            u_i = int(us[i])
            shifted = np.full(K + 1, INFEASIBLE)
            shifted[u_i:] = prev[: K + 1 - u_i] + float(cs[i])
            # Strict comparison keeps the earlier (smaller-amount) candidate
            # on ties.
            better = shifted < new_cost
            new_cost[better] = shifted[better]
            new_choice[better] = i
        cost[t + 1] = new_cost
        choice[t + 1] = new_choice
    cost.setflags(write=False)
    choice.setflags(write=False)
    return HorizonCostTable(
        cost=cost,
        choice=choice,
        candidate_units=tuple(cand_units),
        candidate_costs=tuple(cand_costs),
    )


@dataclass(frozen=True, eq=False)
class DpSolution:
    """Solver outcome; infeasibility is a value here, not an exception.

    ``interval_units``/``interval_costs`` record the chosen per-interval
    rounded amounts and costs (the trace).  ``step`` is the kWh size of
    one rounding unit.
    """

    status: str  # "solved" or "infeasible"
    schedule: Optional[Schedule]
    cost: Optional[float]
    interval_units: Optional[tuple]
    interval_costs: Optional[tuple]
    step: float
    epsilon: float

    @property
    def feasible(self) -> bool:
        return self.status == "solved"

    def trace_to_dict(self) -> dict:
        intervals = None
        if self.feasible:
            intervals = [
                {"cost": float(c), "units": int(u)}
                for c, u in zip(self.interval_costs, self.interval_units)
            ]
        return {
            "status": self.status,
            "step": self.step,
            "epsilon": self.epsilon,
            "intervals": intervals,
        }


def _working_cap(instance: CurtailmentInstance, scaled: ScaledInstance, extend: bool) -> int:
    if not extend:
        return scaled.cap_units
    widened = _exact_floor_scaled(
        Fraction(1) + Fraction(scaled.epsilon), instance.aggregate_cap, scaled.step
    )
    return max(scaled.cap_units, widened)


def solve(
    instance: CurtailmentInstance,
    epsilon: float,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    step_override: Optional[float] = None,
) -> DpSolution:
    """Pick one strategy per (interval, node) slot, minimizing total cost.

    Guarantees on a "solved" result: every interval's achieved curtailment
    is at least (1 - epsilon) times its target, the aggregate is at most
    (1 + epsilon) times the cap, and the cost is at most the exact
    discrete optimum.  Budgets on the instance, if any, are ignored by
    this solver.

    With ``step_override`` the widened working cap is disabled, so on
    integer data with step 1.0 the search space equals the exact discrete
    feasible set and the result matches the exact oracle.
    """
    validate(instance, tolerance=tolerance)
    scaled = scale_instance(instance, epsilon, step_override=step_override)
    cap = _working_cap(instance, scaled, extend=step_override is None)

    tables = [
        build_interval_table(scaled, instance, t, cap=cap)
        for t in range(instance.num_intervals)
    ]
    horizon = build_horizon_table(scaled, tables, cap=cap)

    final = horizon.cost[instance.num_intervals]
    if not np.any(np.isfinite(final)):
        return DpSolution(
            status="infeasible",
            schedule=None,
            cost=None,
            interval_units=None,
            interval_costs=None,
            step=scaled.step,
            epsilon=epsilon,
        )
    # argmin takes the first minimum, i.e. the smallest rounded aggregate
    # among cost ties.
    best_u = int(np.argmin(final))
    total_cost = float(final[best_u])

    assignment = np.empty((instance.num_intervals, instance.num_nodes), dtype=np.int64)
    interval_units = []
    interval_costs = []
    u_cur = best_u
    for t in range(instance.num_intervals, 0, -1):
        i = int(horizon.choice[t, u_cur])
        if i < 0:
            raise InconsistentTableError(f"no stored interval choice at interval {t}, {u_cur} units")
        u_t = int(horizon.candidate_units[t - 1][i])
        c_t = float(horizon.candidate_costs[t - 1][i])
        assignment[t - 1] = reconstruct_interval(tables[t - 1], c_t, u_t)
        interval_units.append(u_t)
        interval_costs.append(c_t)
        u_cur -= u_t
    if u_cur != 0:
        raise InconsistentTableError(f"{u_cur} units left over after unwinding every interval")
    interval_units.reverse()
    interval_costs.reverse()

    rebuilt = float(np.sum(interval_costs))
    if abs(rebuilt - total_cost) > 1e-9 * max(1.0, abs(total_cost)):
        raise InconsistentTableError(
            f"per-interval costs sum to {rebuilt}, horizon table claims {total_cost}"
        )

    return DpSolution(
        status="solved",
        schedule=Schedule(assignment=assignment),
        cost=total_cost,
        interval_units=tuple(interval_units),
        interval_costs=tuple(interval_costs),
        step=scaled.step,
        epsilon=epsilon,
    )
