import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from curtail import metrics
from curtail.errors import DegenerateSamplesError, UndefinedMetricError
from curtail.fairness import FairnessConfig, solve_fair
from curtail.metrics import BoundCheck, bound_report, dp_bounds, fair_bounds, gini, scaling_fit
from curtail.model import Schedule, evaluate

from helpers import plain_instance


def test_gini_frozen_values():
    assert gini([5.0, 5.0, 5.0]) == 0.0
    assert gini([7.0]) == 0.0
    # one-hot over n values: (n - 1) / n
    assert gini([0.0, 0.0, 0.0, 8.0]) == pytest.approx(0.75)
    # uniform ladder 1..4: pairwise sum 20, mean 2.5 -> 20 / (2 * 16 * 2.5)
    assert gini([1.0, 2.0, 3.0, 4.0]) == pytest.approx(0.25)


def test_gini_rejects_bad_input():
    with pytest.raises(UndefinedMetricError):
        gini([])
    with pytest.raises(UndefinedMetricError):
        gini([0.0, 0.0])
    with pytest.raises(ValueError):
        gini([1.0, -1.0])


@given(st.lists(st.floats(min_value=0.0, max_value=1e6), min_size=2, max_size=20)
       .filter(lambda v: sum(v) > 1e-9))
def test_gini_invariances(values):
    base = gini(values)
    assert 0.0 <= base <= 1.0
    # scale-free and order-free
    assert gini([3.0 * v for v in values]) == pytest.approx(base, abs=1e-9)
    assert gini(list(reversed(values))) == pytest.approx(base, abs=1e-9)


def test_bound_check_slack_and_dict():
    check = BoundCheck(name="x", bound=2.0, observed=1.5, passed=True)
    assert check.slack == -0.5
    assert check.to_dict() == {
        "name": "x", "bound": 2.0, "observed": 1.5,
        "passed": True, "applicable": True, "slack": -0.5,
    }
    vacuous = BoundCheck(name="y", bound=None, observed=None, passed=True, applicable=False)
    assert vacuous.slack is None


def checks_by_name(checks):
    return {c.name: c for c in checks}


def test_dp_bounds_pass_and_fail():
    inst = plain_instance()  # target 7, cap 10
    good = evaluate(inst, Schedule(assignment=[[1, 1]]))  # 9 curtailed
    named = checks_by_name(dp_bounds(inst, good, 0.1))
    assert named["interval_floor"].passed
    assert named["interval_floor"].observed == pytest.approx(9.0 / 7.0)
    assert named["aggregate_cap"].passed

    # 5 curtailed misses (1 - 0.1) * 7 = 6.3
    short = evaluate(inst, Schedule(assignment=[[1, 0]]))
    named = checks_by_name(dp_bounds(inst, short, 0.1))
    assert not named["interval_floor"].passed
    # but a loose epsilon forgives it: (1 - 0.5) * 7 = 3.5 <= 5
    named = checks_by_name(dp_bounds(inst, short, 0.5))
    assert named["interval_floor"].passed


def test_dp_bounds_cap_side():
    inst = plain_instance(cap=8.5)  # 9 > (1 + 0.05) * 8.5 = 8.925
    report = evaluate(inst, Schedule(assignment=[[1, 1]]))
    named = checks_by_name(dp_bounds(inst, report, 0.05))
    assert not named["aggregate_cap"].passed
    named = checks_by_name(dp_bounds(inst, report, 0.1))  # 9.35 clears it
    assert named["aggregate_cap"].passed


def test_fair_bounds_worked_example():
    inst = plain_instance(budgets=[[0.0, 6.0], [0.0, 5.0]])
    sol = solve_fair(inst, FairnessConfig(cost_kind="linear"))
    named = checks_by_name(
        fair_bounds(inst, sol.report, sol.lp_optimum,
                    cost_kind="linear", spacing=sol.spacing,
                    lower_guarantee=sol.lower_guarantee)
    )
    assert named["cost_factor"].passed
    assert named["cost_factor"].bound == 2.0
    assert named["aggregate_double_cap"].passed
    assert named["node_ceiling_double"].passed
    assert named["interval_floor_spacing"].passed


def test_fair_bounds_custom_kind_drops_cost_check():
    inst = plain_instance(budgets=[[0.0, 6.0], [0.0, 5.0]])
    sol = solve_fair(inst, FairnessConfig(cost_kind="custom"))
    names = {c.name for c in fair_bounds(inst, sol.report, sol.lp_optimum,
                                         cost_kind="custom", spacing=sol.spacing)}
    assert "cost_factor" not in names
    assert "node_ceiling_double" in names


def test_fair_bounds_lower_guarantee_voided():
    inst = plain_instance(budgets=[[0.0, 6.0], [0.0, 5.0]])
    report = evaluate(inst, Schedule(assignment=[[0, 0]]))  # curtails nothing
    named = checks_by_name(
        fair_bounds(inst, report, 1.0, cost_kind="custom", lower_guarantee=False)
    )
    floor = named["interval_floor_spacing"]
    assert floor.passed and not floor.applicable
    # with the guarantee claimed, the same schedule fails the floor
    named = checks_by_name(
        fair_bounds(inst, report, 1.0, cost_kind="custom", lower_guarantee=True)
    )
    assert not named["interval_floor_spacing"].passed


def test_bound_report_selects_family():
    inst = plain_instance()
    schedule = Schedule(assignment=[[1, 1]])
    dp_names = {c.name for c in bound_report(inst, schedule, epsilon=0.1)}
    assert dp_names == {"interval_floor", "aggregate_cap"}
    fair_names = {c.name for c in bound_report(inst, schedule, lp_optimum=62.0)}
    assert "cost_factor" in fair_names
    with pytest.raises(ValueError):
        bound_report(inst, schedule)
    with pytest.raises(ValueError):
        bound_report(inst, schedule, epsilon=0.1, lp_optimum=62.0)


def test_scaling_fit_recovers_exact_exponent():
    sizes = [10.0, 20.0, 40.0, 80.0]
    slope, intercept = scaling_fit(sizes, [3.0 * s ** 2 for s in sizes])
    assert slope == pytest.approx(2.0, abs=1e-9)
    assert intercept == pytest.approx(np.log(3.0), abs=1e-9)


@pytest.mark.parametrize("sizes,values", [
    ([1.0, 2.0], [1.0, 4.0]),            # too few
    ([1.0, 2.0, 3.0], [1.0, 4.0]),       # length mismatch
    ([1.0, 2.0, 0.0], [1.0, 4.0, 9.0]),  # non-positive size
    ([1.0, 2.0, 3.0], [1.0, 0.0, 9.0]),  # non-positive value
    ([2.0, 2.0, 2.0], [1.0, 2.0, 3.0]),  # no size spread
])
def test_scaling_fit_rejects_degenerate_samples(sizes, values):
    with pytest.raises(DegenerateSamplesError):
        scaling_fit(sizes, values)
