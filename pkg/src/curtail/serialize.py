"""JSON and CSV serialization for instances, schedules, and reports.

Documents produced here are deterministic: keys are sorted and floats use
Python's shortest round-trip repr, so identical inputs give identical bytes.
Formats are described in docs/formats.md.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Optional

import numpy as np

from .model import CurtailmentInstance, EvaluationReport, Schedule


def _listify(a: np.ndarray):
    return a.tolist()


def instance_to_dict(instance: CurtailmentInstance) -> dict:
    doc = {
        "num_nodes": instance.num_nodes,
        "num_strategies": instance.num_strategies,
        "num_intervals": instance.num_intervals,
        "curtailment": _listify(instance.curtailment),
        "cost": _listify(instance.cost),
        "interval_targets": _listify(instance.interval_targets),
        "aggregate_cap": instance.aggregate_cap,
        "budgets": _listify(instance.budgets) if instance.budgets is not None else None,
    }
    return doc


def instance_from_dict(doc: dict) -> CurtailmentInstance:
    return CurtailmentInstance(
        num_nodes=int(doc["num_nodes"]),
        num_strategies=int(doc["num_strategies"]),
        num_intervals=int(doc["num_intervals"]),
        curtailment=doc["curtailment"],
        cost=doc["cost"],
        interval_targets=doc["interval_targets"],
        aggregate_cap=float(doc["aggregate_cap"]),
        budgets=doc.get("budgets"),
    )


def schedule_to_dict(schedule: Schedule) -> dict:
    return {"assignment": _listify(schedule.assignment)}


def schedule_from_dict(doc: dict) -> Schedule:
    return Schedule(assignment=doc["assignment"])


def report_to_dict(report: EvaluationReport) -> dict:
    return {
        "total_cost": report.total_cost,
        "per_interval_curtailment": _listify(report.per_interval_curtailment),
        "aggregate_curtailment": report.aggregate_curtailment,
        "per_node_curtailment": _listify(report.per_node_curtailment),
        "target_violation_factors": list(report.target_factors),
        "cap_violation_factor": report.cap_factor,
        "budget_violation_factors": [list(r) for r in report.budget_factors] if report.budget_factors is not None else None,
    }


def dumps(doc: dict) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def loads(text: str) -> dict:
    return json.loads(text)


REPORT_CSV_COLUMNS = (
    "interval",
    "curtailment",
    "target",
    "target_violation_factor",
    "total_cost",
    "aggregate_curtailment",
    "aggregate_cap",
    "cap_violation_factor",
)


def report_to_csv(instance: CurtailmentInstance, report: EvaluationReport) -> str:
    """One flat row per interval; horizon-level columns repeat on every row."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_CSV_COLUMNS)
    for t in range(instance.num_intervals):
        factor = report.target_factors[t]
        writer.writerow(
            [
                t,
                repr(float(report.per_interval_curtailment[t])),
                repr(float(instance.interval_targets[t])),
                "" if factor is None else repr(float(factor)),
                repr(report.total_cost),
                repr(report.aggregate_curtailment),
                repr(instance.aggregate_cap),
                "" if report.cap_factor is None else repr(float(report.cap_factor)),
            ]
        )
    return buf.getvalue()


def load_instance(path: str) -> CurtailmentInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))


def save_instance(path: str, instance: CurtailmentInstance) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(instance_to_dict(instance)))


def load_schedule(path: str) -> Schedule:
    with open(path, "r", encoding="utf-8") as fh:
        return schedule_from_dict(json.load(fh))


def save_schedule(path: str, schedule: Schedule) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(schedule_to_dict(schedule)))


def save_report(path: str, report: EvaluationReport, *, instance: Optional[CurtailmentInstance] = None) -> None:
    """Write the JSON report; with an instance and a .csv path, write CSV."""
    if path.endswith(".csv"):
        if instance is None:
            raise ValueError("CSV report output needs the instance for interval targets")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(report_to_csv(instance, report))
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dumps(report_to_dict(report)))
