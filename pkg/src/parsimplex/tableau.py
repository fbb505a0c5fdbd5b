"""Serial dense-tableau simplex.

This is the reference implementation; the parallel engine must reproduce its
pivot sequence exactly, so every floating-point update here is written as the
same elementwise expression the workers evaluate on their slices.

Tableau layout for ``m`` constraints and ``n`` variables::

    columns [0, n)      original variables
    columns [n, n+m)    slacks
    column  n+m         right-hand side
    rows    [0, m)      constraints
    row     m           objective, initialised to -c
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .lp_model import (
    AntiCycling,
    LpProblem,
    SolveOutcome,
    SolverConfig,
    Status,
    UnboundedProblem,
    validate,
)

__all__ = [
    "DenseTableau",
    "PivotRule",
    "RatioCandidate",
    "basis_columns_ok",
    "build_initial_tableau",
    "eliminate_block",
    "eliminate_rows",
    "extract_solution",
    "normalize_pivot_row",
    "select_entering_column",
    "select_leaving_row",
    "solve_serial",
]

# rows per sub-block of the elimination's outer-product scratch buffer
_ELIM_BLOCK_ROWS = 32


@dataclass
class DenseTableau:
    data: np.ndarray
    basis: np.ndarray
    m: int
    n: int

    @property
    def rows(self) -> int:
        return self.m + 1

    @property
    def cols(self) -> int:
        return self.n + self.m + 1

    @property
    def rhs_col(self) -> int:
        return self.n + self.m

    @property
    def objective_row(self) -> np.ndarray:
        """Reduced costs over the n+m structural and slack columns (a view)."""
        return self.data[self.m, : self.rhs_col]

    @property
    def rhs(self) -> np.ndarray:
        return self.data[: self.m, self.rhs_col]

    @property
    def objective_value(self) -> float:
        return float(self.data[self.m, self.rhs_col])

    def copy(self) -> "DenseTableau":
        return DenseTableau(self.data.copy(), self.basis.copy(), self.m, self.n)


@dataclass(frozen=True)
class RatioCandidate:
    row: int
    ratio: float


def build_initial_tableau(problem: LpProblem) -> DenseTableau:
    m, n = problem.m, problem.n
    data = np.zeros((m + 1, n + m + 1), dtype=np.float64)
    data[:m, :n] = problem.a
    data[:m, n : n + m] = np.eye(m)
    data[:m, n + m] = problem.b
    data[m, :n] = -problem.c
    # -0.0 from negating zero costs would survive as a sign bit only
    data[m, :n] += 0.0
    basis = np.arange(n, n + m, dtype=np.int64)
    return DenseTableau(data, basis, m, n)


def select_entering_column(
    tableau: DenseTableau, eps_cost: float = 1e-9, bland: bool = False
) -> Optional[int]:
    """Pivot column, or None when no reduced cost is below ``-eps_cost``.

    Dantzig: most negative reduced cost, smallest index on ties.
    Bland: smallest index among the negative reduced costs.
    """
    obj = tableau.objective_row
    if bland:
        neg = np.flatnonzero(obj < -eps_cost)
        return int(neg[0]) if neg.size else None
    k = int(np.argmin(obj))
    if obj[k] < -eps_cost:
        return k
    return None


def _leaving(tableau: DenseTableau, k: int, eps_pivot: float, bland: bool) -> RatioCandidate:
    col = tableau.data[: tableau.m, k]
    rows = np.flatnonzero(col > eps_pivot)
    if rows.size == 0:
        raise UnboundedProblem(k, nonpositive_count=tableau.m)
    ratios = tableau.rhs[rows] / col[rows]
    best = ratios.min()
    tied = rows[ratios == best]
    if bland and tied.size > 1:
        # Bland: among tied rows, the one whose basic variable has the smallest index
        row = int(tied[np.argmin(tableau.basis[tied])])
    else:
        row = int(tied[0])
    return RatioCandidate(row, float(best))


def select_leaving_row(
    tableau: DenseTableau, k: int, eps_pivot: float = 1e-9, bland: bool = False
) -> int:
    """Minimum-ratio row for entering column ``k``; smallest row index on ties.

    Raises UnboundedProblem if no entry of column ``k`` exceeds ``eps_pivot``.
    """
    return _leaving(tableau, k, eps_pivot, bland).row


def normalize_pivot_row(tableau: DenseTableau, l: int, k: int) -> None:
    row = tableau.data[l]
    row /= row[k]
    row[k] = 1.0


def new_scratch(tableau: DenseTableau) -> np.ndarray:
    return np.empty((_ELIM_BLOCK_ROWS, tableau.cols))


def eliminate_block(data: np.ndarray, r0: int, r1: int, k: int, prow: np.ndarray,
                    scratch: np.ndarray) -> None:
    """``row_i -= a_ik * prow`` for rows ``[r0, r1)``, then zero column ``k``.

    ``scratch`` holds one sub-block of the outer product; the update is the
    same elementwise expression however the rows are split.
    """
    step = scratch.shape[0]
    for s0 in range(r0, r1, step):
        s1 = min(s0 + step, r1)
        block = data[s0:s1]
        tmp = scratch[: s1 - s0]
        np.multiply.outer(block[:, k], prow, out=tmp)
        block -= tmp
        block[:, k] = 0.0


def eliminate_rows(tableau: DenseTableau, l: int, k: int) -> None:
    """Zero column ``k`` in every row but ``l`` (objective row included)."""
    data = tableau.data
    prow = data[l]
    scratch = new_scratch(tableau)
    eliminate_block(data, 0, l, k, prow, scratch)
    eliminate_block(data, l + 1, tableau.rows, k, prow, scratch)
    tableau.basis[l] = k


def extract_solution(tableau: DenseTableau) -> tuple[float, np.ndarray]:
    x = np.zeros(tableau.n)
    rhs = tableau.rhs
    for i, j in enumerate(tableau.basis):
        if j < tableau.n:
            x[j] = rhs[i]
    # rounding can leave a basic value a few ulps below zero
    np.maximum(x, 0.0, out=x)
    return tableau.objective_value, x


def basis_columns_ok(tableau: DenseTableau, tol: float) -> bool:
    """True if every basic column is a unit vector within ``tol``."""
    data = tableau.data
    for i, j in enumerate(tableau.basis):
        col = data[:, j].copy()
        col[i] -= 1.0
        if np.abs(col).max() > tol:
            return False
    return True


class PivotRule:
    """Dantzig pricing with an optional fall-back to Bland's rule.

    Both engines drive one of these with identical inputs so they agree on the
    rule in force at every iteration.
    """

    def __init__(self, policy: AntiCycling, eps_pivot: float):
        self.window = policy.stall_window
        self.eps_pivot = eps_pivot
        self.stall = 0

    @property
    def bland(self) -> bool:
        return self.window is not None and self.stall >= self.window

    def record(self, ratio: float) -> None:
        if ratio <= self.eps_pivot:
            self.stall += 1
        else:
            self.stall = 0


def solve_serial(
    problem: LpProblem,
    config: Optional[SolverConfig] = None,
    on_pivot: Optional[Callable[[DenseTableau, int, int], None]] = None,
) -> SolveOutcome:
    """Solve ``problem`` with the single-threaded tableau method.

    ``on_pivot(tableau, k, l)`` is called after every completed pivot.
    """
    config = config or SolverConfig()
    validate(problem)
    tab = build_initial_tableau(problem)
    cap = config.iteration_cap(problem.m, problem.n)
    rule = PivotRule(config.anti_cycling, config.eps_pivot)
    log: Optional[list[tuple[int, int]]] = [] if config.log_pivots else None
    iterations = 0

    t0 = time.perf_counter()
    while True:
        k = select_entering_column(tab, config.eps_cost, rule.bland)
        if k is None:
            status = Status.OPTIMAL
            break
        if iterations >= cap:
            status = Status.ITERATION_LIMIT
            break
        try:
            cand = _leaving(tab, k, config.eps_pivot, rule.bland)
        except UnboundedProblem:
            status = Status.UNBOUNDED
            break
        normalize_pivot_row(tab, cand.row, k)
        eliminate_rows(tab, cand.row, k)
        rule.record(cand.ratio)
        iterations += 1
        if log is not None:
            log.append((k, cand.row))
        if config.debug_checks:
            assert basis_columns_ok(tab, config.eps_pivot), "basis column drifted"
            assert (tab.rhs >= -config.eps_pivot).all(), "rhs went negative"
        if on_pivot is not None:
            on_pivot(tab, k, cand.row)
    elapsed = time.perf_counter() - t0

    outcome = SolveOutcome(status, iterations=iterations, pivot_log=log, solve_seconds=elapsed)
    if status is Status.OPTIMAL:
        outcome.objective, outcome.x = extract_solution(tab)
    return outcome
