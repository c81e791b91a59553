"""Dense two-phase simplex for equality-form LPs.

Solves min c'x subject to Ax = b, x >= 0 with Bland's anti-cycling rule, so
repeated runs on identical input take identical pivots. Problem sizes here
are desk scale (a few hundred rows), so each iteration solves against the
basis matrix directly instead of maintaining a factorization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

DEFAULT_TOLERANCE = 1e-9

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration-limit"


@dataclass(frozen=True)
class SimplexResult:
    status: str
    x: np.ndarray
    objective: float
    iterations: int


class _Tableau:
    def __init__(self, A: np.ndarray, b: np.ndarray, basis: list[int], tol: float):
        self.A = A
        self.b = b
        self.basis = basis
        self.tol = tol

    def basic_solution(self) -> np.ndarray:
        B = self.A[:, self.basis]
        return np.linalg.solve(B, self.b)

    def iterate(self, c: np.ndarray, banned: set[int], max_iterations: int) -> tuple[str, int]:
        """Run Bland-rule pivots until optimal/unbounded or the cap is hit."""
        m, n = self.A.shape
        iterations = 0
        while True:
            if iterations >= max_iterations:
                return ITERATION_LIMIT, iterations
            B = self.A[:, self.basis]
            xb = np.linalg.solve(B, self.b)
            y = np.linalg.solve(B.T, c[self.basis])
            entering = -1
            basis_set = set(self.basis)
            for j in range(n):
                if j in basis_set or j in banned:
                    continue
                if c[j] - y @ self.A[:, j] < -self.tol:
                    entering = j
                    break
            if entering < 0:
                return OPTIMAL, iterations
            d = np.linalg.solve(B, self.A[:, entering])
            candidates = [i for i in range(m) if d[i] > self.tol]
            if not candidates:
                return UNBOUNDED, iterations
            ratios = [(xb[i] / d[i]) for i in candidates]
            best = min(ratios)
            # Bland: among minimum-ratio rows, evict the smallest variable index.
            leaving_row = min(
                (i for i, r in zip(candidates, ratios) if r <= best + self.tol),
                key=lambda i: self.basis[i],
            )
            self.basis[leaving_row] = entering
            iterations += 1


def solve_standard_form(
    c: np.ndarray,
    A: np.ndarray,
    b: np.ndarray,
    *,
    tol: float = DEFAULT_TOLERANCE,
    max_iterations: Optional[int] = None,
) -> SimplexResult:
    c = np.asarray(c, dtype=float).ravel()
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    m, n = A.shape
    if c.shape[0] != n or b.shape[0] != m:
        raise ValueError(f"shape mismatch: A is {A.shape}, c has {c.shape[0]}, b has {b.shape[0]}")
    if max_iterations is None:
        max_iterations = 10 * (n + m)

    # Normalize to b >= 0 so artificials start feasible.
    flip = b < 0
    if flip.any():
        A = A.copy()
        b = b.copy()
        A[flip] *= -1.0
        b[flip] *= -1.0

    if m == 0:
        return SimplexResult(OPTIMAL, np.zeros(n), 0.0, 0)

    # Phase 1: minimize the sum of artificial variables.
    A1 = np.hstack([A, np.eye(m)])
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    tableau = _Tableau(A1, b, list(range(n, n + m)), tol)
    status, used = tableau.iterate(c1, banned=set(), max_iterations=max_iterations)
    if status == ITERATION_LIMIT:
        return SimplexResult(ITERATION_LIMIT, np.zeros(n), float("nan"), used)
    xb = tableau.basic_solution()
    phase1_objective = float(c1[tableau.basis] @ xb)
    if phase1_objective > 1e-7:
        return SimplexResult(INFEASIBLE, np.zeros(n), float("nan"), used)

    # Drive leftover artificials out of the basis; drop rows that prove
    # linearly dependent.
    keep_rows = list(range(m))
    for row in range(m):
        if tableau.basis[row] < n:
            continue
        B = tableau.A[:, tableau.basis]
        pivot_row = np.linalg.solve(B, tableau.A)[row]
        replacement = -1
        for j in range(n):
            if j in tableau.basis:
                continue
            if abs(pivot_row[j]) > 1e-7:
                replacement = j
                break
        if replacement >= 0:
            tableau.basis[row] = replacement
        else:
            keep_rows.remove(row)

    if len(keep_rows) < m:
        rows = np.array(keep_rows, dtype=int)
        A = A[rows]
        b = b[rows]
        basis = [tableau.basis[i] for i in keep_rows]
        m = len(keep_rows)
    else:
        basis = list(tableau.basis)

    # Phase 2 on the original columns only.
    tableau = _Tableau(A, b, basis, tol)
    status, more = tableau.iterate(c, banned=set(), max_iterations=max_iterations)
    iterations = used + more
    x = np.zeros(n)
    xb = tableau.basic_solution()
    for value, j in zip(xb, tableau.basis):
        x[j] = value
    x[np.abs(x) < tol] = 0.0
    objective = float(c @ x)
    if status == ITERATION_LIMIT:
        return SimplexResult(ITERATION_LIMIT, x, objective, iterations)
    if status == UNBOUNDED:
        return SimplexResult(UNBOUNDED, x, float("-inf"), iterations)
    return SimplexResult(OPTIMAL, x, objective, iterations)
