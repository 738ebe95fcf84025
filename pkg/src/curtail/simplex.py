"""Self-contained bounded-variable primal simplex solver.

Dense two-phase tableau method for
``min c @ x  s.t.  A x {<=,>=,=} b,  lower <= x <= upper``.
Dantzig (most-negative reduced cost) pricing with a permanent switch to
Bland's rule after a run of degenerate steps, so cycling terminates; an
iteration cap raises NumericalBreakdownError rather than looping.  Every
"optimal" result is re-substituted into the original constraints before
being returned.  Deterministic: fixed pivot rules, no randomization, so
repeated solves of the same program give bit-identical solutions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NumericalBreakdownError

_AT_LO = 0
_AT_HI = 1
_BASIC = 2

_SENSES = ("le", "ge", "eq")


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """Immutable LP data; rows mix senses freely, bounds may be infinite."""

    objective: np.ndarray  # (n,)
    lhs: np.ndarray  # (m, n)
    senses: tuple  # m entries from {"le", "ge", "eq"}
    rhs: np.ndarray  # (m,)
    lower: np.ndarray  # (n,)
    upper: np.ndarray  # (n,)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.objective, dtype=np.float64))
        A = np.asarray(self.lhs, dtype=np.float64)
        if A.size == 0:
            A = A.reshape(0, c.size)
        A = np.atleast_2d(A)
        b = np.atleast_1d(np.asarray(self.rhs, dtype=np.float64))
        lo = np.atleast_1d(np.asarray(self.lower, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=np.float64))
        senses = tuple(self.senses)
        n = c.size
        m = b.size
        if A.shape != (m, n):
            raise ValueError(f"lhs shape {A.shape} does not match ({m}, {n})")
        if lo.shape != (n,) or hi.shape != (n,):
            raise ValueError("bound arrays must have one entry per variable")
        if len(senses) != m or any(s not in _SENSES for s in senses):
            raise ValueError(f"senses must be {m} entries from {_SENSES}")
        if not np.all(np.isfinite(c)) or not np.all(np.isfinite(A)) or not np.all(np.isfinite(b)):
            raise ValueError("objective, lhs, and rhs must be finite")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("bounds must not be NaN")
        if np.any(lo > hi):
            raise ValueError("every lower bound must not exceed its upper bound")
        for name, arr in (("objective", c), ("lhs", A), ("rhs", b), ("lower", lo), ("upper", hi)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "senses", senses)

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @property
    def num_rows(self) -> int:
        return self.rhs.size


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: str  # "optimal", "infeasible", or "unbounded"
    x: Optional[np.ndarray]
    objective: Optional[float]

    def __post_init__(self):
        if self.x is not None:
            x = np.asarray(self.x, dtype=np.float64)
            x.setflags(write=False)
            object.__setattr__(self, "x", x)


class _Tableau:
    """Mutable simplex state over the standardized program (all lowers 0)."""

    def __init__(self, A: np.ndarray, b: np.ndarray, ub: np.ndarray, n_art: int):
        m, ntot = A.shape
        self.m = m
        self.ntot = ntot
        self.tab = A.astype(np.float64, copy=True)
        self.xb = b.astype(np.float64, copy=True)
        self.ub = ub.astype(np.float64, copy=True)
        self.basis = np.full(m, -1, dtype=np.int64)
        self.status = np.full(ntot, _AT_LO, dtype=np.int8)
        self.artificial = np.zeros(ntot, dtype=bool)
        if n_art:
            self.artificial[ntot - n_art :] = True
        self.pivot_tol = 1e-10

    def install_basis(self, cols: np.ndarray) -> None:
        self.basis = cols.astype(np.int64, copy=True)
        self.status[cols] = _BASIC

    def values(self) -> np.ndarray:
        x = np.where(self.status == _AT_HI, np.where(np.isfinite(self.ub), self.ub, 0.0), 0.0)
        x[self.basis] = self.xb
        return x

    def reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        cb = cost[self.basis]
        if self.m == 0:
            return cost.copy()
        return cost - cb @ self.tab

    def pivot(self, row: int, col: int) -> None:
        piv = self.tab[row, col]
        if abs(piv) < self.pivot_tol:
            raise NumericalBreakdownError(f"pivot magnitude {abs(piv)} below tolerance")
        self.tab[row] /= piv
        factors = self.tab[:, col].copy()
        factors[row] = 0.0
        self.tab -= np.outer(factors, self.tab[row])
        # Restore an exact unit column; subtraction noise otherwise drifts.
        self.tab[:, col] = 0.0
        self.tab[row, col] = 1.0
        self.basis[row] = col

    def minimize(self, cost: np.ndarray, allowed: np.ndarray, max_iterations: int) -> str:
        """Run simplex steps until optimal or unbounded for `cost`.

        `allowed` masks columns permitted to enter the basis. Returns
        "optimal" or "unbounded"; raises NumericalBreakdownError on the
        iteration cap.
        """
        tol_d = 1e-9 * (1.0 + float(np.max(np.abs(cost))) if cost.size else 1.0)
        bland = False
        degenerate_run = 0
        for _ in range(max_iterations):
            d = self.reduced_costs(cost)
            at_lo = (self.status == _AT_LO) & allowed & (d < -tol_d)
            at_hi = (self.status == _AT_HI) & allowed & (d > tol_d)
            eligible = at_lo | at_hi
            if not np.any(eligible):
                return "optimal"
            if bland:
                e = int(np.nonzero(eligible)[0][0])
            else:
                score = np.where(eligible, np.abs(d), -np.inf)
                e = int(np.argmax(score))
            direction = 1.0 if at_lo[e] else -1.0

            col = self.tab[:, e] if self.m else np.zeros(0)
            rate = direction * col
            limits = np.full(self.m, np.inf)
            decreasing = rate > self.pivot_tol
            if np.any(decreasing):
                limits[decreasing] = self.xb[decreasing] / rate[decreasing]
            increasing = rate < -self.pivot_tol
            if np.any(increasing):
                ub_basic = self.ub[self.basis]
                room = ub_basic[increasing] - self.xb[increasing]
                with np.errstate(invalid="ignore"):
                    limits[increasing] = np.where(
                        np.isfinite(ub_basic[increasing]), room / (-rate[increasing]), np.inf
                    )
            limits = np.maximum(limits, 0.0)

            own_limit = self.ub[e]
            row_limit = float(np.min(limits)) if self.m else np.inf
            step = min(own_limit, row_limit)
            if not np.isfinite(step):
                return "unbounded"

            if own_limit <= row_limit:
                # Bound flip: the entering variable crosses to its other
                # bound without any basis change.
                self.xb = self.xb - direction * own_limit * col if self.m else self.xb
                self.status[e] = _AT_HI if self.status[e] == _AT_LO else _AT_LO
                degenerate_run = degenerate_run + 1 if own_limit <= tol_d else 0
            else:
                ties = np.nonzero(limits <= row_limit + self.pivot_tol)[0]
                if bland:
                    r = int(ties[np.argmin(self.basis[ties])])
                else:
                    # Largest pivot magnitude among tied rows, then lowest row.
                    mags = np.abs(rate[ties])
                    r = int(ties[np.argmax(mags)])
                leaving = int(self.basis[r])
                entering_value = (0.0 if self.status[e] == _AT_LO else float(self.ub[e])) + direction * step
                self.xb = self.xb - direction * step * col
                leaving_to_hi = rate[r] < 0
                self.status[leaving] = _AT_HI if leaving_to_hi else _AT_LO
                self.pivot(r, e)
                self.status[e] = _BASIC
                self.xb[r] = entering_value
                self.xb = np.maximum(self.xb, 0.0)
                degenerate_run = degenerate_run + 1 if step <= tol_d else 0
            if degenerate_run > 2 * (self.m + self.ntot):
                bland = True
        raise NumericalBreakdownError(f"simplex exceeded {max_iterations} iterations")


def solve_lp(lp: LinearProgram, *, tolerance: float = 1e-7, max_iterations: Optional[int] = None) -> LpSolution:
    """Solve the program; statuses are optimal/infeasible/unbounded.

    `tolerance` is relative: feasibility of each row is checked within
    tolerance * (1 + |rhs|).  An optimal claim that fails re-substitution
    raises NumericalBreakdownError instead of returning a bad point.
    """
    n = lp.num_vars
    m = lp.num_rows
    A = lp.lhs.copy()
    b = lp.rhs.copy()
    c = lp.objective.copy()
    lo = lp.lower.copy()
    hi = lp.upper.copy()

    # Standardize variables to lower bound 0. kinds: (mode, data)
    # mode "fixed": value; "shift": lo; "negate": hi; "split": (col+, col-).
    cols: list[np.ndarray] = []
    costs: list[float] = []
    ubs: list[float] = []
    var_map: list[tuple] = []
    for j in range(n):
        lj, hj = lo[j], hi[j]
        if np.isfinite(lj) and np.isfinite(hj) and hj - lj <= 0.0:
            b -= A[:, j] * lj
            var_map.append(("fixed", lj, None))
        elif np.isfinite(lj):
            b -= A[:, j] * lj
            cols.append(A[:, j].copy())
            costs.append(float(c[j]))
            ubs.append(float(hj - lj) if np.isfinite(hj) else np.inf)
            var_map.append(("shift", lj, len(cols) - 1))
        elif np.isfinite(hj):
            b -= A[:, j] * hj
            cols.append(-A[:, j])
            costs.append(-float(c[j]))
            ubs.append(np.inf)
            var_map.append(("negate", hj, len(cols) - 1))
        else:
            cols.append(A[:, j].copy())
            costs.append(float(c[j]))
            ubs.append(np.inf)
            cols.append(-A[:, j])
            costs.append(-float(c[j]))
            ubs.append(np.inf)
            var_map.append(("split", None, (len(cols) - 2, len(cols) - 1)))

    n_struct = len(cols)
    A_std = np.column_stack(cols) if n_struct else np.zeros((m, 0))
    senses = list(lp.senses)
    flip = b < 0.0
    if np.any(flip):
        A_std[flip] = -A_std[flip]
        b = b.copy()
        b[flip] = -b[flip]
        swap = {"le": "ge", "ge": "le", "eq": "eq"}
        senses = [swap[s] if f else s for s, f in zip(senses, flip)]

    # Slack/surplus columns; "le" slacks double as the initial basis.
    slack_cols = []
    slack_ubs = []
    basis_from_slack = {}
    for i, s in enumerate(senses):
        if s == "eq":
            continue
        col = np.zeros(m)
        col[i] = 1.0 if s == "le" else -1.0
        slack_cols.append(col)
        slack_ubs.append(np.inf)
        if s == "le":
            basis_from_slack[i] = n_struct + len(slack_cols) - 1
    n_slack = len(slack_cols)

    art_rows = [i for i, s in enumerate(senses) if i not in basis_from_slack]
    n_art = len(art_rows)
    art_cols = []
    for i in art_rows:
        col = np.zeros(m)
        col[i] = 1.0
        art_cols.append(col)

    parts = [A_std]
    if n_slack:
        parts.append(np.column_stack(slack_cols))
    if n_art:
        parts.append(np.column_stack(art_cols))
    full = np.hstack(parts) if parts else np.zeros((m, 0))
    ub_full = np.concatenate([np.asarray(ubs), np.asarray(slack_ubs), np.full(n_art, np.inf)])

    tab = _Tableau(full, b, ub_full, n_art)
    basis_cols = np.empty(m, dtype=np.int64)
    art_at = dict(zip(art_rows, range(n_struct + n_slack, n_struct + n_slack + n_art)))
    for i in range(m):
        basis_cols[i] = basis_from_slack.get(i, art_at.get(i, -1))
    tab.install_basis(basis_cols)

    ntot = full.shape[1]
    cap = max_iterations if max_iterations is not None else 50 * (m + ntot + 1)

    scale_b = 1.0 + (float(np.max(np.abs(lp.rhs))) if m else 0.0)

    if n_art:
        phase1_cost = np.zeros(ntot)
        phase1_cost[tab.artificial] = 1.0
        outcome = tab.minimize(phase1_cost, allowed=np.ones(ntot, dtype=bool), max_iterations=cap)
        if outcome == "unbounded":
            raise NumericalBreakdownError("phase-1 objective cannot be unbounded")
        art_total = float(np.sum(tab.xb[np.isin(tab.basis, np.nonzero(tab.artificial)[0])]))
        if art_total > tolerance * scale_b:
            return LpSolution(status="infeasible", x=None, objective=None)
        # Pivot leftover zero-level artificials out where a real column can
        # replace them; pin any that remain so phase 2 cannot move them.
        for r in range(m):
            if tab.artificial[tab.basis[r]]:
                candidates = np.nonzero((~tab.artificial) & (tab.status != _BASIC) & (np.abs(tab.tab[r]) > tab.pivot_tol))[0]
                if candidates.size:
                    e = int(candidates[0])
                    entering_bound = 0.0 if tab.status[e] == _AT_LO else float(tab.ub[e])
                    if abs(entering_bound) <= tolerance * scale_b:
                        old = int(tab.basis[r])
                        tab.pivot(r, e)
                        tab.status[e] = _BASIC
                        tab.status[old] = _AT_LO
                        tab.xb[r] = max(tab.xb[r], 0.0)
        tab.ub[tab.artificial] = 0.0

    phase2_cost = np.zeros(ntot)
    phase2_cost[:n_struct] = np.asarray(costs) if n_struct else phase2_cost[:0]
    outcome = tab.minimize(phase2_cost, allowed=~tab.artificial, max_iterations=cap)
    if outcome == "unbounded":
        return LpSolution(status="unbounded", x=None, objective=None)

    values = tab.values()
    x = np.empty(n)
    for j, (mode, data, idx) in enumerate(var_map):
        if mode == "fixed":
            x[j] = data
        elif mode == "shift":
            x[j] = data + values[idx]
        elif mode == "negate":
            x[j] = data - values[idx]
        else:
            x[j] = values[idx[0]] - values[idx[1]]

    # Feasibility re-substitution: never return a point that violates the
    # original program beyond tolerance.
    if n:
        row_vals = lp.lhs @ x
        for i, s in enumerate(lp.senses):
            slack_tol = tolerance * (1.0 + abs(float(lp.rhs[i])))
            r = float(row_vals[i] - lp.rhs[i])
            bad = (s == "le" and r > slack_tol) or (s == "ge" and r < -slack_tol) or (s == "eq" and abs(r) > slack_tol)
            if bad:
                raise NumericalBreakdownError(f"row {i} violated by {r} after solve")
        bound_tol = tolerance * (1.0 + float(np.max(np.abs(x))))
        if np.any(x < lp.lower - bound_tol) or np.any(x > lp.upper + bound_tol):
            raise NumericalBreakdownError("a variable bound was violated after solve")
        x = np.clip(x, lp.lower, lp.upper)

    objective = float(lp.objective @ x) if n else 0.0
    return LpSolution(status="optimal", x=x, objective=objective)


def to_lp_text(lp: LinearProgram, *, name: str = "program") -> str:
    """Render the program as fixed-format LP text (debugging aid)."""

    def term(coef: float, j: int, first: bool) -> str:
        sign = "-" if coef < 0 else ("" if first else "+")
        mag = abs(coef)
        return f"{sign} {mag:.12g} x{j + 1}" if not first else f"{sign}{mag:.12g} x{j + 1}"

    def combo(coefs: np.ndarray) -> str:
        pieces = []
        first = True
        for j, coef in enumerate(coefs):
            if coef == 0.0:
                continue
            pieces.append(term(float(coef), j, first))
            first = False
        return " ".join(pieces) if pieces else "0 x1"

    lines = [f"\\ {name}", "Minimize", f" obj: {combo(lp.objective)}", "Subject To"]
    op = {"le": "<=", "ge": ">=", "eq": "="}
    for i in range(lp.num_rows):
        lines.append(f" c{i + 1}: {combo(lp.lhs[i])} {op[lp.senses[i]]} {float(lp.rhs[i]):.12g}")
    lines.append("Bounds")
    for j in range(lp.num_vars):
        lj, hj = float(lp.lower[j]), float(lp.upper[j])
        if not np.isfinite(lj) and not np.isfinite(hj):
            lines.append(f" x{j + 1} free")
        elif not np.isfinite(hj):
            lines.append(f" x{j + 1} >= {lj:.12g}")
        elif not np.isfinite(lj):
            lines.append(f" x{j + 1} <= {hj:.12g}")
        else:
            lines.append(f" {lj:.12g} <= x{j + 1} <= {hj:.12g}")
    lines.append("End")
    return "\n".join(lines) + "\n"
