"""Instance builders shared across test modules."""

import numpy as np

from curtail.model import CurtailmentInstance


def plain_instance(targets=(7.0,), cap=10.0, budgets=None) -> CurtailmentInstance:
    """Two nodes, two strategies: values [[0,5],[0,4]], costs [[0,50],[0,32]].

    The default single-interval form has exactly four schedules, of which
    only (5, 4) meets the target of 7; its cost is 82.
    """
    T = len(targets)
    return CurtailmentInstance(
        num_nodes=2,
        num_strategies=2,
        num_intervals=T,
        curtailment=[[[0.0, 5.0], [0.0, 4.0]]] * T,
        cost=[[[0.0, 50.0], [0.0, 32.0]]] * T,
        interval_targets=list(targets),
        aggregate_cap=cap,
        budgets=budgets,
    )


def two_interval_instance(cap=18.0) -> CurtailmentInstance:
    """The T=2 copy: both intervals need 7, minimum feasible aggregate is 18."""
    return plain_instance(targets=(7.0, 7.0), cap=cap)


def random_integer_instance(rng: np.random.Generator, *, max_nodes=4, max_strategies=3,
                            max_intervals=3, max_value=9, budgets=False) -> CurtailmentInstance:
    """Small integer-valued instance; usually but not always feasible.

    Values and costs are non-negative integers stored as floats; strategy 0
    is the zero default.  Targets stay at or below each interval's capacity
    and the cap at or above the sum of targets, but discrete overshoot can
    still make the cap unreachable, so callers must treat infeasible as a
    legitimate answer (the oracles still have to agree on it).
    """
    M = int(rng.integers(1, max_nodes + 1))
    N = int(rng.integers(2, max_strategies + 1))
    T = int(rng.integers(1, max_intervals + 1))
    values = rng.integers(0, max_value + 1, size=(T, M, N)).astype(float)
    values[:, :, 0] = 0.0
    costs = rng.integers(0, 50, size=(T, M, N)).astype(float)
    costs[:, :, 0] = 0.0
    capacity = values.max(axis=2).sum(axis=1)  # (T,)
    targets = np.floor(capacity * rng.uniform(0.3, 1.0, size=T))
    cap = float(np.ceil(targets.sum() * float(rng.uniform(1.0, 1.5)))) + float(rng.integers(0, 3))
    kwargs = {}
    if budgets:
        shares = values.max(axis=2).sum(axis=0)  # (M,)
        total = shares.sum()
        if total <= 0:
            ceilings = np.full(M, cap)
        else:
            ceilings = np.ceil(shares / total * cap * 2.0)
        kwargs["budgets"] = np.column_stack([np.zeros(M), ceilings])
    return CurtailmentInstance(
        num_nodes=M,
        num_strategies=N,
        num_intervals=T,
        curtailment=values,
        cost=costs,
        interval_targets=targets,
        aggregate_cap=cap,
        **kwargs,
    )
