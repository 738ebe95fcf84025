"""Seeded synthetic instance generation: load, solar, and mixed fleets.

Load mode samples each node a menu of curtailment values log-uniformly
inside `load_value_range` (a stand-in distribution; swap the range or the
whole generator for real menus), constant across the horizon, then
rescales all values per interval so the fleet's per-interval capacity is
exactly `capacity_margin` times that interval's target.  Margins well
above 1 give comfortably solvable instances; margins near 1 keep total
capacity below the aggregate cap, which is what makes high budget floors
infeasible (the fairness sweep's breakpoint).

Solar mode derives each node's hourly curtailable energy from a radiance
trace (W/m^2), panel area, and conversion yield:
kWh = radiance * area * yield / 1000 per hour.  A node offers the fixed
curtailment fractions {0, 1/8, 1/4, 1/2, 3/4, 1} of that energy; hours
split into four 15-minute intervals, each carrying a quarter of the
hourly value.  Targets are clamped to `solar_target_fraction` of
per-interval capacity so night hours cannot make the instance infeasible.

Costs are `cost_coefficient * value` (linear) or
`cost_coefficient * value ** 2` (quadratic), computed exactly from the
final values.  Generation is deterministic per seed; nodes could be
sampled in parallel from per-node spawned seeds, but this implementation
draws sequentially from one stream for simplicity.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import TraceTooShortError
from .model import CurtailmentInstance, validate

MODES = ("load", "solar", "mixed")
SOLAR_FRACTIONS = (0.0, 0.125, 0.25, 0.5, 0.75, 1.0)
INTERVALS_PER_HOUR = 4


@dataclass(frozen=True)
class ScenarioSpec:
    """Everything a generation run depends on, seed included."""

    seed: int = 0
    num_nodes: int = 20
    num_intervals: int = 16
    mode: str = "load"
    target_range: tuple = (500.0, 1000.0)  # (L, U): interval targets ~ U[L/T, U/T], cap = U
    cost_kind: str = "quadratic"
    cost_coefficient: float = 2.0
    num_strategies: int = 6  # includes the zero default; fixed at 6 in solar mode
    load_value_range: tuple = (1.0, 25.0)  # log-uniform kWh menu range (stand-in)
    capacity_margin: float = 2.0  # per-interval capacity / target after rescale
    pv_area_range: tuple = (10.0, 20.0)  # m^2
    pv_yield_range: tuple = (0.05, 0.15)
    radiance: Optional[tuple] = None  # hourly W/m^2; None = synthetic clear sky
    solar_target_fraction: float = 0.8
    alpha: Optional[float] = None  # attach proportional budgets when set

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.cost_kind not in ("linear", "quadratic"):
            raise ValueError(f"cost_kind must be linear or quadratic, got {self.cost_kind!r}")
        lo, hi = self.target_range
        if not (0.0 < lo <= hi):
            raise ValueError(f"target_range needs 0 < L <= U, got {self.target_range}")
        if self.num_nodes < 1 or self.num_intervals < 1:
            raise ValueError("need at least one node and one interval")
        if self.num_strategies < 2:
            raise ValueError("need the zero default plus at least one real strategy")
        if self.capacity_margin < 1.0:
            raise ValueError("capacity_margin below 1 makes some interval unsatisfiable")
        if not (0.0 < self.solar_target_fraction <= 1.0):
            raise ValueError("solar_target_fraction must lie in (0, 1]")
        if self.alpha is not None and not (0.0 <= self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        vlo, vhi = self.load_value_range
        if not (0.0 < vlo <= vhi):
            raise ValueError(f"load_value_range needs 0 < lo <= hi, got {self.load_value_range}")
        if self.radiance is not None:
            object.__setattr__(self, "radiance", tuple(float(r) for r in self.radiance))


def clear_sky_trace(hours: int, *, peak: float = 1000.0) -> tuple:
    """Synthetic clear-sky radiance: a positive half-sine over the horizon."""
    return tuple(peak * math.sin(math.pi * (h + 0.5) / hours) for h in range(hours))


def load_radiance_csv(path: str) -> tuple:
    """Read an `hour,wm2` CSV into an hourly trace.

    Hours must be exactly 0..H-1 (any order in the file); radiance must be
    non-negative and finite.
    """
    rows = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["hour", "wm2"]:
            raise ValueError(f"expected header 'hour,wm2', got {reader.fieldnames}")
        for row in reader:
            hour = int(row["hour"])
            value = float(row["wm2"])
            if hour in rows:
                raise ValueError(f"hour {hour} appears twice")
            if not (value >= 0.0 and math.isfinite(value)):
                raise ValueError(f"radiance at hour {hour} must be finite and non-negative, got {value}")
            rows[hour] = value
    if not rows:
        raise ValueError("the radiance file has no data rows")
    hours = sorted(rows)
    if hours != list(range(len(hours))):
        raise ValueError(f"hours must be consecutive from 0, got {hours}")
    return tuple(rows[h] for h in hours)


def proportional_budgets(instance: CurtailmentInstance, alpha: float) -> CurtailmentInstance:
    """Attach budgets B_b proportional to each node's horizon capacity.

    B_b = (capacity_b / total capacity) * cap, capacity_b being the sum
    over intervals of the node's largest strategy value; every node gets
    the same floor fraction alpha.  Budgets sum to the cap exactly (up to
    float addition), so the cap never conflicts with the ceilings.
    """
    if not (0.0 <= alpha <= 1.0):
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    capacity = instance.curtailment.max(axis=2).sum(axis=0)  # (M,)
    total = float(capacity.sum())
    if total <= 0.0:
        raise ValueError("no node can curtail anything; budgets are undefined")
    ceilings = capacity / total * instance.aggregate_cap
    budgets = np.column_stack([np.full(instance.num_nodes, float(alpha)), ceilings])
    return replace(instance, budgets=budgets)


def _costs_from_values(values: np.ndarray, kind: str, coefficient: float) -> np.ndarray:
    if kind == "linear":
        return coefficient * values
    return coefficient * values * values


def _draw_targets(rng: np.random.Generator, spec: ScenarioSpec) -> np.ndarray:
    lo, hi = spec.target_range
    per = (lo / spec.num_intervals, hi / spec.num_intervals)
    return rng.uniform(per[0], per[1], size=spec.num_intervals)


def _load_menus(rng: np.random.Generator, spec: ScenarioSpec, num_nodes: int) -> np.ndarray:
    """Per-node ascending menus, zero default first, constant across intervals."""
    vlo, vhi = spec.load_value_range
    sampled = np.exp(rng.uniform(math.log(vlo), math.log(vhi), size=(num_nodes, spec.num_strategies - 1)))
    sampled.sort(axis=1)
    return np.concatenate([np.zeros((num_nodes, 1)), sampled], axis=1)  # (M, N)


def _solar_menus(rng: np.random.Generator, spec: ScenarioSpec, num_nodes: int) -> np.ndarray:
    """Per-interval menus from radiance * area * yield, shape (T, M, 6)."""
    hours_needed = -(-spec.num_intervals // INTERVALS_PER_HOUR)
    trace = spec.radiance if spec.radiance is not None else clear_sky_trace(hours_needed)
    if len(trace) < hours_needed:
        raise TraceTooShortError(
            f"{spec.num_intervals} intervals need {hours_needed} radiance hours, trace has {len(trace)}"
        )
    area = rng.uniform(*spec.pv_area_range, size=num_nodes)
    conversion = rng.uniform(*spec.pv_yield_range, size=num_nodes)
    fractions = np.asarray(SOLAR_FRACTIONS)
    menus = np.empty((spec.num_intervals, num_nodes, fractions.size))
    for t in range(spec.num_intervals):
        hourly_kwh = np.asarray(trace[t // INTERVALS_PER_HOUR]) * area * conversion / 1000.0
        menus[t] = hourly_kwh[:, None] * fractions[None, :] / INTERVALS_PER_HOUR
    return menus


def _finish(spec: ScenarioSpec, values: np.ndarray, targets: np.ndarray) -> CurtailmentInstance:
    instance = CurtailmentInstance(
        num_nodes=values.shape[1],
        num_strategies=values.shape[2],
        num_intervals=values.shape[0],
        curtailment=values,
        cost=_costs_from_values(values, spec.cost_kind, spec.cost_coefficient),
        interval_targets=targets,
        aggregate_cap=float(spec.target_range[1]),
    )
    if spec.alpha is not None:
        instance = proportional_budgets(instance, spec.alpha)
    return validate(instance)


def generate_load(spec: ScenarioSpec) -> CurtailmentInstance:
    rng = np.random.default_rng(spec.seed)
    targets = _draw_targets(rng, spec)
    menus = _load_menus(rng, spec, spec.num_nodes)  # (M, N)
    raw_capacity = float(menus.max(axis=1).sum())
    values = np.empty((spec.num_intervals, spec.num_nodes, spec.num_strategies))
    for t in range(spec.num_intervals):
        # Per-interval capacity lands exactly on margin * target.
        values[t] = menus * (spec.capacity_margin * targets[t] / raw_capacity)
    return _finish(spec, values, targets)


def generate_solar(spec: ScenarioSpec) -> CurtailmentInstance:
    rng = np.random.default_rng(spec.seed)
    wanted = _draw_targets(rng, spec)
    values = _solar_menus(rng, spec, spec.num_nodes)
    capacity = values.max(axis=2).sum(axis=1)  # (T,)
    targets = np.minimum(wanted, spec.solar_target_fraction * capacity)
    return _finish(spec, values, targets)


def generate_mixed(spec: ScenarioSpec) -> CurtailmentInstance:
    """First half of the fleet load-style, second half solar-style.

    Load menus are rescaled per interval to cover half the wanted target
    at the margin; the final targets are clamped to
    `solar_target_fraction` of the combined capacity.
    """
    rng = np.random.default_rng(spec.seed)
    wanted = _draw_targets(rng, spec)
    load_count = (spec.num_nodes + 1) // 2
    solar_count = spec.num_nodes - load_count
    if solar_count == 0:
        return generate_load(spec)
    menus = _load_menus(rng, spec, load_count)
    if spec.num_strategies != len(SOLAR_FRACTIONS):
        raise ValueError(
            f"mixed mode needs num_strategies == {len(SOLAR_FRACTIONS)} to match the solar menu width"
        )
    solar_values = _solar_menus(rng, spec, solar_count)
    raw_capacity = float(menus.max(axis=1).sum())
    values = np.empty((spec.num_intervals, spec.num_nodes, spec.num_strategies))
    for t in range(spec.num_intervals):
        values[t, :load_count] = menus * (spec.capacity_margin * (wanted[t] / 2.0) / raw_capacity)
        values[t, load_count:] = solar_values[t]
    capacity = values.max(axis=2).sum(axis=1)
    targets = np.minimum(wanted, spec.solar_target_fraction * capacity)
    return _finish(spec, values, targets)


def generate(spec: ScenarioSpec) -> CurtailmentInstance:
    """Dispatch on mode; every generated instance passes validation."""
    if spec.mode == "load":
        return generate_load(spec)
    if spec.mode == "solar":
        return generate_solar(spec)
    return generate_mixed(spec)
