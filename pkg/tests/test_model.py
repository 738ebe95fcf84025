import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curtail.errors import IndexOutOfRangeError, InvalidInstanceError
from curtail.model import CurtailmentInstance, Schedule, evaluate, validate, validation_issues

from helpers import plain_instance


def test_arrays_are_coerced_and_read_only():
    inst = plain_instance()
    assert inst.curtailment.dtype == np.float64
    assert not inst.curtailment.flags.writeable
    assert not inst.interval_targets.flags.writeable
    with pytest.raises(ValueError):
        inst.curtailment[0, 0, 0] = 1.0


def test_ragged_input_rejected():
    with pytest.raises(InvalidInstanceError):
        CurtailmentInstance(
            num_nodes=2,
            num_strategies=2,
            num_intervals=1,
            curtailment=[[[0.0, 5.0], [0.0]]],
            cost=[[[0.0, 50.0], [0.0, 32.0]]],
            interval_targets=[7.0],
            aggregate_cap=10.0,
        )


def test_validate_returns_instance():
    inst = plain_instance()
    assert validate(inst) is inst
    # idempotent: a second pass sees the same clean result
    assert validation_issues(inst) == []


def _issue_kinds(**overrides):
    base = dict(
        num_nodes=2,
        num_strategies=2,
        num_intervals=1,
        curtailment=[[[0.0, 5.0], [0.0, 4.0]]],
        cost=[[[0.0, 50.0], [0.0, 32.0]]],
        interval_targets=[7.0],
        aggregate_cap=10.0,
        budgets=None,
    )
    base.update(overrides)
    inst = CurtailmentInstance(**base)
    return {issue.kind for issue in validation_issues(inst)}


def test_shape_mismatch_detected():
    assert "shape_mismatch" in _issue_kinds(num_nodes=3)


def test_non_finite_detected():
    assert "non_finite" in _issue_kinds(curtailment=[[[0.0, np.inf], [0.0, 4.0]]])


def test_negative_value_detected():
    assert "negative_value" in _issue_kinds(cost=[[[0.0, -1.0], [0.0, 32.0]]])
    assert "negative_value" in _issue_kinds(interval_targets=[-7.0])


def test_missing_default_detected():
    # strategy 0 must be the zero-curtailment zero-cost default
    assert "missing_default" in _issue_kinds(curtailment=[[[1.0, 5.0], [0.0, 4.0]]])
    assert "missing_default" in _issue_kinds(cost=[[[2.0, 50.0], [0.0, 32.0]]])


def test_targets_exceed_cap_detected():
    assert "targets_exceed_cap" in _issue_kinds(interval_targets=[11.0])


def test_bad_budget_detected():
    assert "bad_budget" in _issue_kinds(budgets=[[1.5, 5.0], [0.0, 4.0]])
    assert "bad_budget" in _issue_kinds(budgets=[[0.0, -1.0], [0.0, 4.0]])


def test_validate_raises_with_all_issues():
    inst = CurtailmentInstance(
        num_nodes=2,
        num_strategies=2,
        num_intervals=1,
        curtailment=[[[0.0, 5.0], [0.0, 4.0]]],
        cost=[[[0.0, -50.0], [0.0, 32.0]]],
        interval_targets=[11.0],
        aggregate_cap=10.0,
    )
    with pytest.raises(InvalidInstanceError) as err:
        validate(inst)
    kinds = {issue.kind for issue in err.value.issues}
    assert kinds == {"negative_value", "targets_exceed_cap"}


def test_evaluate_worked_example():
    inst = plain_instance()
    report = evaluate(inst, Schedule(assignment=[[1, 1]]))
    assert report.total_cost == 82.0
    assert report.aggregate_curtailment == 9.0
    assert report.per_interval_curtailment.tolist() == [9.0]
    assert report.per_node_curtailment.tolist() == [5.0, 4.0]
    assert report.target_factors == (9.0 / 7.0,)
    assert report.cap_factor == 0.9
    assert report.budget_factors is None


def test_evaluate_zero_target_factor_is_none():
    inst = plain_instance(targets=(0.0,))
    report = evaluate(inst, Schedule(assignment=[[0, 0]]))
    assert report.target_factors == (None,)
    assert report.total_cost == 0.0


def test_evaluate_budget_factors():
    inst = plain_instance(budgets=[[0.5, 5.0], [0.0, 4.0]])
    report = evaluate(inst, Schedule(assignment=[[1, 1]]))
    lower, upper = report.budget_factors[0]
    assert lower == 5.0 / 2.5  # achieved over the floor alpha * B
    assert upper == 1.0
    assert report.budget_factors[1] == (None, 1.0)  # zero floor has no ratio


def test_evaluate_rejects_bad_indices():
    inst = plain_instance()
    with pytest.raises(IndexOutOfRangeError):
        evaluate(inst, Schedule(assignment=[[1, 2]]))
    with pytest.raises(IndexOutOfRangeError):
        evaluate(inst, Schedule(assignment=[[1, 1], [1, 1]]))


@settings(deadline=None, max_examples=50)
@given(
    st.lists(st.integers(min_value=0, max_value=1), min_size=2, max_size=2),
    st.lists(st.integers(min_value=0, max_value=1), min_size=2, max_size=2),
)
def test_evaluate_adds_up_per_interval(a, b):
    # The two-interval report must be the slot-wise sum of the one-interval ones.
    inst2 = plain_instance(targets=(7.0, 7.0), cap=100.0)
    inst1 = plain_instance(cap=100.0)
    whole = evaluate(inst2, Schedule(assignment=[a, b]))
    parts = [evaluate(inst1, Schedule(assignment=[row])) for row in (a, b)]
    assert whole.total_cost == parts[0].total_cost + parts[1].total_cost
    assert whole.aggregate_curtailment == (
        parts[0].aggregate_curtailment + parts[1].aggregate_curtailment
    )
    assert whole.per_node_curtailment.tolist() == (
        parts[0].per_node_curtailment + parts[1].per_node_curtailment
    ).tolist()
