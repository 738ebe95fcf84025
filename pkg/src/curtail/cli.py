"""Command line front end.

Four subcommands: `generate` (seeded synthetic instances), `solve` (one
instance through a chosen scheduler, optionally as a line-delimited
streaming loop for the online one), `sweep` (parameter grids to CSV), and
`verify` (check a schedule against a scheduler's promised bounds).

Exit codes: 0 success, 1 infeasible or a failed bound check, 2 usage or
data errors.  Machine output is JSON on stdout with sorted keys; errors
go to stderr as {"error": {"kind", "message"}}.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import dp, fairness, metrics, online, oracle, serialize
from .errors import CurtailError, LpInfeasibleError, UndefinedMetricError
from .model import CurtailmentInstance, evaluate
from .scenarios import ScenarioSpec, generate, load_radiance_csv

DEFAULT_EPSILON_GRID = (0.5, 0.2, 0.1, 0.05, 0.02)
DEFAULT_ALPHA_GRID = (0.0, 0.05, 0.1, 0.15, 0.2)


def _parse_range(text: str) -> tuple:
    try:
        lo, hi = text.split(":")
        return (float(lo), float(hi))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected L:U, got {text!r}")


def _parse_grid(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _emit(doc: dict, path=None) -> None:
    text = serialize.dumps(doc)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curtail", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a seeded synthetic instance as JSON")
    gen.add_argument("--mode", choices=("load", "solar", "mixed"), default="load")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--nodes", type=int, default=20)
    gen.add_argument("--intervals", type=int, default=16)
    gen.add_argument("--strategies", type=int, default=6)
    gen.add_argument("--target-range", type=_parse_range, default=(500.0, 1000.0),
                     metavar="L:U", help="horizon reduction band; cap is U")
    gen.add_argument("--cost-kind", choices=("linear", "quadratic"), default="quadratic")
    gen.add_argument("--cost-coefficient", type=float, default=2.0)
    gen.add_argument("--capacity-margin", type=float, default=2.0,
                     help="per-interval fleet capacity over target (load mode)")
    gen.add_argument("--alpha", type=float, default=None,
                     help="attach proportional budgets with this floor fraction")
    gen.add_argument("--radiance", default=None, metavar="CSV",
                     help="hour,wm2 trace for solar mode (default: synthetic clear sky)")
    gen.add_argument("--out", default=None, metavar="FILE", help="default stdout")

    solve = sub.add_parser("solve", help="run one scheduler over an instance")
    solve.add_argument("--algo", choices=("dp", "fair", "online", "exact"), required=True)
    solve.add_argument("--instance", metavar="FILE", help="instance JSON (omit with --stream)")
    solve.add_argument("--epsilon", type=float, default=0.1, help="dp and online slack")
    solve.add_argument("--cost-kind", choices=("linear", "quadratic", "custom"),
                       default="linear", help="cost guarantee family for --algo fair")
    solve.add_argument("--problem", choices=("auto", "plain", "fair"), default="auto",
                       help="constraint set for --algo exact")
    solve.add_argument("--strict-online-filter", action="store_true",
                       help="drop zero-value strategies outside the prorated band too")
    solve.add_argument("--tolerance", type=float, default=None)
    solve.add_argument("--stream", action="store_true",
                       help="online only: read one step per stdin line, answer per line")
    solve.add_argument("--context", metavar="FILE",
                       help="streaming context JSON: num_nodes, aggregate_cap, target_total, budgets")
    solve.add_argument("--schedule-out", default=None, metavar="FILE")
    solve.add_argument("--report-out", default=None, metavar="FILE",
                       help=".csv gets the per-interval table, anything else JSON")

    sweep = sub.add_parser("sweep", help="grid of solves to CSV")
    sweep.add_argument("--algo", choices=("dp", "fair"), required=True)
    sweep.add_argument("--grid", type=_parse_grid, default=None, metavar="V1,V2,...",
                       help="epsilon grid for dp, alpha grid for fair")
    sweep.add_argument("--seeds", type=int, default=5, help="seeds 0..N-1 per grid value")
    sweep.add_argument("--mode", choices=("load", "solar", "mixed"), default="load")
    sweep.add_argument("--nodes", type=int, default=20)
    sweep.add_argument("--intervals", type=int, default=16)
    sweep.add_argument("--strategies", type=int, default=6)
    sweep.add_argument("--target-range", type=_parse_range, default=(500.0, 1000.0), metavar="L:U")
    sweep.add_argument("--cost-kind", choices=("linear", "quadratic"), default="quadratic")
    sweep.add_argument("--capacity-margin", type=float, default=2.0)
    sweep.add_argument("--jobs", type=int, default=1, help="worker processes")
    sweep.add_argument("--out", default=None, metavar="FILE", help="default stdout")

    verify = sub.add_parser("verify", help="check a schedule against promised bounds")
    verify.add_argument("--instance", required=True, metavar="FILE")
    verify.add_argument("--schedule", required=True, metavar="FILE")
    group = verify.add_mutually_exclusive_group(required=True)
    group.add_argument("--epsilon", type=float, default=None,
                       help="check the approximation scheduler's bounds")
    group.add_argument("--fair", action="store_true",
                       help="re-solve the relaxation and check the fair bounds")
    verify.add_argument("--cost-kind", choices=("linear", "quadratic", "custom"), default="linear")
    verify.add_argument("--no-lower-guarantee", action="store_true",
                        help="skip the 1/k floor checks (e.g. a rounding dropped a slot to zero)")
    verify.add_argument("--out", default=None, metavar="FILE")
    return parser


def _cmd_generate(args) -> int:
    radiance = load_radiance_csv(args.radiance) if args.radiance else None
    spec = ScenarioSpec(
        seed=args.seed,
        num_nodes=args.nodes,
        num_intervals=args.intervals,
        mode=args.mode,
        target_range=args.target_range,
        cost_kind=args.cost_kind,
        cost_coefficient=args.cost_coefficient,
        num_strategies=args.strategies,
        capacity_margin=args.capacity_margin,
        radiance=radiance,
        alpha=args.alpha,
    )
    _emit(serialize.instance_to_dict(generate(spec)), args.out)
    return 0


def _solve_once(instance: CurtailmentInstance, args):
    """Returns (status, schedule, extras) for the summary document."""
    tol = {} if args.tolerance is None else {"tolerance": args.tolerance}
    if args.algo == "dp":
        sol = dp.solve(instance, args.epsilon, **tol)
        return sol.status, sol.schedule, {"epsilon": args.epsilon, "step": sol.step}
    if args.algo == "fair":
        config = fairness.FairnessConfig(cost_kind=args.cost_kind, **tol)
        try:
            sol = fairness.solve_fair(instance, config=config)
        except LpInfeasibleError:
            return "infeasible", None, {"cost_kind": args.cost_kind}
        return "solved", sol.schedule, {
            "cost_kind": args.cost_kind,
            "lp_optimum": sol.lp_optimum,
            "lower_guarantee": sol.lower_guarantee,
        }
    if args.algo == "online":
        out = online.run_horizon(instance, args.epsilon,
                                 strict_filter=args.strict_online_filter, **tol)
        extras = {"epsilon": args.epsilon, "failed_interval": out.failed_interval}
        return out.status, out.schedule, extras
    sol = oracle.brute_force(instance, args.problem, **tol)
    return sol.status, sol.schedule, {"problem": args.problem}


def _cmd_solve(args) -> int:
    if args.stream:
        if args.algo != "online":
            raise ValueError("--stream only applies to --algo online")
        return _cmd_solve_stream(args)
    if not args.instance:
        raise ValueError("--instance is required without --stream")
    instance = serialize.load_instance(args.instance)
    status, schedule, extras = _solve_once(instance, args)
    summary = {"algo": args.algo, "status": status, **extras}
    if schedule is not None:
        report = evaluate(instance, schedule)
        summary["cost"] = report.total_cost
        summary["aggregate_curtailment"] = report.aggregate_curtailment
        if args.schedule_out:
            serialize.save_schedule(args.schedule_out, schedule)
        if args.report_out:
            serialize.save_report(args.report_out, report, instance=instance)
    _emit(summary)
    return 0 if status == "solved" else 1


def _cmd_solve_stream(args) -> int:
    if not args.context:
        raise ValueError("--stream needs --context FILE")
    with open(args.context, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    budgets = doc.get("budgets")
    if budgets is None:
        budgets = [[0.0, doc["aggregate_cap"]]] * int(doc["num_nodes"])
    context = online.OnlineContext(
        num_nodes=int(doc["num_nodes"]),
        aggregate_cap=float(doc["aggregate_cap"]),
        target_total=float(doc["target_total"]),
        budgets=np.asarray(budgets, dtype=np.float64),
    )
    tol = {} if args.tolerance is None else {"tolerance": args.tolerance}
    all_solved = True
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        step_doc = json.loads(line)
        step = online.OnlineStep(
            target=float(step_doc["target"]),
            curtailment=np.asarray(step_doc["curtailment"], dtype=np.float64),
            cost=np.asarray(step_doc["cost"], dtype=np.float64),
        )
        sol = online.solve_step(context, step, args.epsilon,
                                strict_filter=args.strict_online_filter, **tol)
        result = {
            "status": sol.status,
            "assignment": None if sol.assignment is None else [int(j) for j in sol.assignment],
            "cost": sol.cost,
            "curtailment": sol.curtailment,
        }
        sys.stdout.write(json.dumps(result, sort_keys=True) + "\n")
        sys.stdout.flush()
        all_solved = all_solved and sol.feasible
    return 0 if all_solved else 1


def _sweep_cell(payload: tuple) -> dict:
    """One (seed, grid value) solve; module-level so worker processes can import it."""
    algo, value, spec_kwargs = payload
    spec = ScenarioSpec(**spec_kwargs)
    instance = generate(spec)
    row = {"algo": algo, "seed": spec.seed,
           "parameter": "epsilon" if algo == "dp" else "alpha", "value": value,
           "status": "", "cost": "", "gini": "", "lp_optimum": ""}
    if algo == "dp":
        sol = dp.solve(instance, value)
        row["status"] = sol.status
        if sol.feasible:
            report = evaluate(instance, sol.schedule)
            row["cost"] = repr(report.total_cost)
            row["gini"] = _gini_cell(report)
        return row
    try:
        sol = fairness.solve_fair(instance)
    except LpInfeasibleError:
        row["status"] = "infeasible"
        return row
    row["status"] = "solved"
    row["cost"] = repr(sol.report.total_cost)
    row["lp_optimum"] = repr(sol.lp_optimum)
    row["gini"] = _gini_cell(sol.report)
    return row


def _gini_cell(report) -> str:
    try:
        return repr(metrics.gini(report.per_node_curtailment))
    except UndefinedMetricError:
        return ""


SWEEP_COLUMNS = ("algo", "seed", "parameter", "value", "status", "cost", "lp_optimum", "gini")


def _cmd_sweep(args) -> int:
    grid = args.grid
    if grid is None:
        grid = DEFAULT_EPSILON_GRID if args.algo == "dp" else DEFAULT_ALPHA_GRID
    cells = []
    for value in grid:
        for seed in range(args.seeds):
            spec_kwargs = dict(
                seed=seed,
                num_nodes=args.nodes,
                num_intervals=args.intervals,
                mode=args.mode,
                target_range=args.target_range,
                cost_kind=args.cost_kind,
                num_strategies=args.strategies,
                capacity_margin=args.capacity_margin,
                alpha=value if args.algo == "fair" else None,
            )
            cells.append((args.algo, value, spec_kwargs))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(cell) for cell in cells]
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if args.out is None:
        sys.stdout.write(buffer.getvalue())
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buffer.getvalue())
    return 0


def _cmd_verify(args) -> int:
    instance = serialize.load_instance(args.instance)
    schedule = serialize.load_schedule(args.schedule)
    if args.epsilon is not None:
        checks = metrics.bound_report(instance, schedule, epsilon=args.epsilon)
    else:
        lp = fairness.solve_relaxation(instance)
        if lp.status != "optimal":
            raise LpInfeasibleError(f"the relaxation is {lp.status}; nothing to verify against")
        spacing = fairness.spacing_factor(instance)
        checks = metrics.bound_report(
            instance,
            schedule,
            lp_optimum=lp.objective,
            cost_kind=args.cost_kind,
            spacing=spacing,
            lower_guarantee=not args.no_lower_guarantee,
        )
    doc = {
        "checks": [check.to_dict() for check in checks],
        "all_passed": all(c.passed for c in checks if c.applicable),
    }
    _emit(doc, args.out)
    return 0 if doc["all_passed"] else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {
        "generate": _cmd_generate,
        "solve": _cmd_solve,
        "sweep": _cmd_sweep,
        "verify": _cmd_verify,
    }[args.command]
    try:
        return handler(args)
    except (CurtailError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        doc = {"error": {"kind": type(exc).__name__, "message": str(exc)}}
        sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
