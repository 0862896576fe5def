"""Dense two-phase primal simplex.

Small by design: the linear programs here are equilibrium feasibility
systems and correlated-equilibrium programs with at most a few thousand
rows, so a dense tableau with Dantzig pricing (falling back to Bland's
rule under degeneracy) is entirely adequate and easy to audit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

ROW_TOL = 1e-7     # constraint residual allowed on returned solutions
BOUND_TOL = 1e-9   # variable bound violation allowed on returned solutions
COST_TOL = 1e-9    # reduced cost threshold for optimality
PIVOT_TOL = 1e-11  # pivot elements below this abort the solve
RATIO_TOL = 1e-7   # column entries below this stay out of the ratio test
PHASE1_TOL = 1e-9  # residual infeasibility treated as zero after phase one
DEGENERATE_STREAK = 50  # consecutive degenerate pivots before Bland's rule
STABILIZE_ROUNDS = 4    # refactorize-and-resume attempts per phase

LE, GE, EQ = "<=", ">=", "="

OPTIMAL = "optimal"
FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class SolverFailure(RuntimeError):
    """Numerical breakdown inside the simplex; carries diagnostics."""


@dataclass
class LpProblem:
    """maximize objective @ x subject to rows and per-variable bounds.

    objective None means feasibility only (phase one suffices).  Bounds
    default to [0, +inf); lower may be -inf (free variable).
    """

    num_vars: int
    objective: Optional[np.ndarray] = None
    rows: list = field(default_factory=list)
    lower: np.ndarray = None
    upper: np.ndarray = None

    def __post_init__(self):
        if self.num_vars <= 0:
            raise ValueError("need at least one variable")
        if self.objective is not None:
            self.objective = np.asarray(self.objective, dtype=float)
            if self.objective.shape != (self.num_vars,):
                raise ValueError("objective width mismatch")
        if self.lower is None:
            self.lower = np.zeros(self.num_vars)
        if self.upper is None:
            self.upper = np.full(self.num_vars, np.inf)
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)

    def add_row(self, coeffs: Sequence[float], rel: str, rhs: float) -> None:
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.num_vars,):
            raise ValueError("row width mismatch")
        if rel not in (LE, GE, EQ):
            raise ValueError(f"unknown relation {rel!r}")
        if not np.isfinite(rhs):
            raise ValueError("rhs must be finite")
        self.rows.append((coeffs, rel, float(rhs)))

    def set_bounds(self, j: int, lower: float, upper: float) -> None:
        self.lower[j] = lower
        self.upper[j] = upper

    def make_free(self, j: int) -> None:
        self.lower[j] = -np.inf
        self.upper[j] = np.inf


@dataclass
class LpResult:
    status: str
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None


def _standardize(problem: LpProblem):
    """Rewrite into max c'y, A y (<=|=) b, y >= 0.

    Finite lower bounds shift; free variables split into two nonnegative
    parts; finite upper bounds become extra rows.  Returns the pieces plus
    a function mapping standard-form y back to original x.
    """
    n = problem.num_vars
    col_of: list[tuple] = []  # per original var: ("shift", col, L) or ("split", pos, neg)
    width = 0
    extra_rows: list[tuple[np.ndarray, str, float]] = []
    for j in range(n):
        lo, hi = problem.lower[j], problem.upper[j]
        if np.isneginf(lo):
            col_of.append(("split", width, width + 1))
            width += 2
            if np.isfinite(hi):
                extra_rows.append((j, LE, hi))
        else:
            col_of.append(("shift", width, lo))
            width += 1
            if np.isfinite(hi):
                extra_rows.append((j, LE, hi - lo))

    def expand(coeffs: np.ndarray) -> np.ndarray:
        out = np.zeros(width)
        for j in range(n):
            kind = col_of[j]
            if kind[0] == "split":
                out[kind[1]] = coeffs[j]
                out[kind[2]] = -coeffs[j]
            else:
                out[kind[1]] = coeffs[j]
        return out

    rows = []
    for coeffs, rel, rhs in problem.rows:
        shift = sum(
            coeffs[j] * col_of[j][2] for j in range(n) if col_of[j][0] == "shift"
        )
        rows.append((expand(coeffs), rel, rhs - shift))
    for j, rel, rhs in extra_rows:
        kind = col_of[j]
        row = np.zeros(width)
        if kind[0] == "split":
            row[kind[1]], row[kind[2]] = 1.0, -1.0
        else:
            row[kind[1]] = 1.0
        rows.append((row, rel, rhs))

    obj = expand(problem.objective) if problem.objective is not None else None

    def recover(y: np.ndarray) -> np.ndarray:
        x = np.zeros(n)
        for j in range(n):
            kind = col_of[j]
            if kind[0] == "split":
                x[j] = y[kind[1]] - y[kind[2]]
            else:
                x[j] = y[kind[1]] + kind[2]
        return x

    return rows, obj, width, recover


class _Tableau:
    """Full simplex tableau: body is B^{-1}A, rhs is B^{-1}b."""

    def __init__(self, body: np.ndarray, rhs: np.ndarray, basis: list[int]):
        self.body = body
        self.rhs = rhs
        self.basis = basis
        # pristine copies so the tableau can be rebuilt without drift
        self._body0 = body.copy()
        self._rhs0 = rhs.copy()

    def refactor(self) -> None:
        """Recompute body and rhs from the original columns.

        Long pivot sequences accumulate floating-point error; a direct
        solve against the current basis restores both to working precision.
        """
        base = self._body0[:, self.basis]
        try:
            self.body = np.linalg.solve(base, self._body0)
            self.rhs = np.linalg.solve(base, self._rhs0)
        except np.linalg.LinAlgError:
            raise SolverFailure("basis matrix became singular on refactorization")

    def pivot(self, r: int, c: int) -> None:
        piv = self.body[r, c]
        if abs(piv) < PIVOT_TOL:
            raise SolverFailure(
                f"pivot {piv:.3e} below tolerance at row {r}, column {c}"
                f" (m={self.body.shape[0]}, n={self.body.shape[1]})"
            )
        self.body[r] /= piv
        self.rhs[r] /= piv
        col = self.body[:, c].copy()
        col[r] = 0.0
        self.body -= np.outer(col, self.body[r])
        self.rhs -= col * self.rhs[r]
        self.body[:, c] = 0.0
        self.body[r, c] = 1.0
        self.basis[r] = c

    def minimize(self, cost: np.ndarray, iteration_cap: int,
                 blocked: Optional[np.ndarray] = None) -> float:
        """Run simplex to optimality on min cost @ y; returns the optimum.

        Columns flagged in blocked never enter the basis.  Raises
        SolverFailure on breakdown; raises _Unbounded when the objective
        is unbounded below.
        """
        m, n = self.body.shape
        degenerate = 0
        bland = False
        for it in range(iteration_cap):
            reduced = cost - cost[self.basis] @ self.body
            reduced[self.basis] = 0.0
            if blocked is not None:
                reduced[blocked] = 0.0
            if bland:
                candidates = np.nonzero(reduced < -COST_TOL)[0]
                if candidates.size == 0:
                    break
                c = int(candidates[0])
            else:
                c = int(np.argmin(reduced))
                if reduced[c] >= -COST_TOL:
                    break
            column = self.body[:, c]
            positive = column > RATIO_TOL
            if not positive.any():
                raise _Unbounded()
            ratios = np.full(m, np.inf)
            ratios[positive] = self.rhs[positive] / column[positive]
            best = ratios.min()
            ties = np.nonzero(ratios <= best + 1e-12)[0]
            if bland:
                # smallest basis label keeps Bland's guarantee intact
                r = int(min(ties, key=lambda i: self.basis[i]))
            else:
                # otherwise the largest pivot element is the stable choice
                r = int(max(ties, key=lambda i: column[i]))
            if best <= 1e-12:
                degenerate += 1
                if degenerate >= DEGENERATE_STREAK:
                    bland = True
            else:
                degenerate = 0
                bland = False
            self.pivot(r, c)
        else:
            raise SolverFailure(f"simplex exceeded {iteration_cap} pivots")
        return float(cost[self.basis] @ self.rhs)

    def optimize(self, cost: np.ndarray, iteration_cap: int,
                 blocked: Optional[np.ndarray] = None) -> float:
        """minimize, then refactorize and resume until the claimed optimum
        survives a drift-free rebuild of the tableau."""
        for _ in range(STABILIZE_ROUNDS):
            self.minimize(cost, iteration_cap, blocked)
            self.refactor()
            reduced = cost - cost[self.basis] @ self.body
            reduced[self.basis] = 0.0
            if blocked is not None:
                reduced[blocked] = 0.0
            if reduced.min() >= -COST_TOL:
                return float(cost[self.basis] @ self.rhs)
        raise SolverFailure("simplex failed to stabilize after refactorization")


class _Unbounded(Exception):
    pass


def solve_lp(problem: LpProblem) -> LpResult:
    """Two-phase primal simplex; phase one alone for feasibility problems."""
    rows, obj, width, recover = _standardize(problem)
    m = len(rows)
    if m == 0:
        # bounds only: zeros in standard form is feasible
        y = np.zeros(width)
        x = recover(y)
        if obj is not None and problem.objective is not None:
            direction = problem.objective
            if np.any((direction > 0) & np.isinf(problem.upper)) or np.any(
                (direction < 0) & np.isneginf(problem.lower)
            ):
                return LpResult(UNBOUNDED)
        return _finish(problem, x)

    # build [A | slacks | artificials], all rhs nonnegative; rows are
    # equilibrated to unit magnitude so tolerances mean the same thing
    # regardless of the caller's payoff scale
    a_rows, senses, b = [], [], np.zeros(m)
    for i, (coeffs, rel, rhs) in enumerate(rows):
        scale = max(1.0, float(np.abs(coeffs).max()), abs(rhs))
        coeffs, rhs = coeffs / scale, rhs / scale
        if rhs < 0:
            coeffs, rhs = -coeffs, -rhs
            rel = {LE: GE, GE: LE, EQ: EQ}[rel]
        a_rows.append(coeffs)
        senses.append(rel)
        b[i] = rhs
    a = np.vstack(a_rows)

    slack_cols = [i for i, s in enumerate(senses) if s == LE]
    surplus_cols = [i for i, s in enumerate(senses) if s == GE]
    n_slack = len(slack_cols) + len(surplus_cols)
    body = np.hstack([a, np.zeros((m, n_slack + m))])
    col = width
    slack_of: dict[int, int] = {}
    for i in slack_cols:
        body[i, col] = 1.0
        slack_of[i] = col
        col += 1
    for i in surplus_cols:
        body[i, col] = -1.0
        col += 1
    art_of: dict[int, int] = {}
    for i in range(m):
        body[i, col] = 1.0
        art_of[i] = col
        col += 1
    total = col

    # slacks of <= rows can start basic; everything else starts on artificials
    basis = []
    for i in range(m):
        if senses[i] == LE:
            basis.append(slack_of[i])
            body[i, art_of[i]] = 0.0
        else:
            basis.append(art_of[i])
    tab = _Tableau(body, b.copy(), basis)

    cap = 200 * (m + total) + 2000
    phase1 = np.zeros(total)
    for i in range(m):
        if basis[i] == art_of[i]:
            phase1[art_of[i]] = 1.0
    art_set = {art_of[i] for i in range(m)}
    try:
        residual = tab.optimize(phase1, cap)
    except _Unbounded:  # pragma: no cover - phase one is bounded below by 0
        raise SolverFailure("phase one reported unbounded")
    if residual > PHASE1_TOL:
        return LpResult(INFEASIBLE)

    # drive leftover artificials out of the basis; genuinely redundant rows
    # keep theirs basic at level zero, blocked from ever re-entering
    nonartificial = total - m
    for r in range(m):
        if tab.basis[r] in art_set:
            cols = np.nonzero(np.abs(tab.body[r, :nonartificial]) > RATIO_TOL)[0]
            if cols.size:
                tab.pivot(r, int(cols[np.argmax(np.abs(tab.body[r, cols]))]))

    if obj is None:
        y = _basic_solution(tab, total)[:width]
        return _finish(problem, recover(y))

    cost = np.zeros(total)
    cost[:width] = -obj  # maximize via minimizing the negation
    blocked = np.zeros(total, dtype=bool)
    blocked[nonartificial:] = True
    try:
        tab.optimize(cost, cap, blocked=blocked)
    except _Unbounded:
        return LpResult(UNBOUNDED)
    y = _basic_solution(tab, total)
    if any(y[j] > 1e-7 for j in art_set):
        raise SolverFailure("artificial variable positive after phase two")
    return _finish(problem, recover(y[:width]))


def _basic_solution(tab: _Tableau, total: int) -> np.ndarray:
    y = np.zeros(total)
    for r, j in enumerate(tab.basis):
        y[j] = tab.rhs[r]
    return y


def _finish(problem: LpProblem, x: np.ndarray) -> LpResult:
    _postcheck(problem, x)
    if problem.objective is None:
        return LpResult(FEASIBLE, x, None)
    return LpResult(OPTIMAL, x, float(problem.objective @ x))


def _postcheck(problem: LpProblem, x: np.ndarray) -> None:
    """Re-verify the returned point against the original rows and bounds."""
    for coeffs, rel, rhs in problem.rows:
        lhs = float(coeffs @ x)
        bad = (
            (rel == LE and lhs > rhs + ROW_TOL)
            or (rel == GE and lhs < rhs - ROW_TOL)
            or (rel == EQ and abs(lhs - rhs) > ROW_TOL)
        )
        if bad:
            raise SolverFailure(
                f"returned point violates row ({rel} {rhs:.6g}) by {abs(lhs - rhs):.3e}"
            )
    lo_bad = x < problem.lower - BOUND_TOL
    hi_bad = x > problem.upper + BOUND_TOL
    if lo_bad.any() or hi_bad.any():
        j = int(np.nonzero(lo_bad | hi_bad)[0][0])
        raise SolverFailure(f"returned point violates bounds at variable {j}")
