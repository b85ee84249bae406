"""
Dense two-phase tableau simplex for small box-constrained LPs.

    minimize    c . x
    subject to  A_ub x <= b_ub,  A_eq x = b_eq,  lower <= x <= upper

Pricing is Dantzig's rule; after a run of degenerate pivots the phase
switches to Bland's rule, which cannot cycle. All choices are
deterministic. Every optimum is re-checked against the original
constraints before it is returned.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .exceptions import DomainError, InfeasibleError, NumericalFailure

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-9
COST_TOL = 1e-10
FEASIBILITY_TOL = 1e-9
VERIFY_TOL = 1e-7
DEGENERATE_STREAK = 50
REFACTOR_EVERY = 25


@dataclass
class LinearProgram:
    c: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    ub_labels: Sequence[str] = ()
    eq_labels: Sequence[str] = ()

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=np.float64)
        n = self.c.size
        self.lower = np.broadcast_to(np.asarray(self.lower, dtype=np.float64), (n,)).copy()
        self.upper = np.broadcast_to(np.asarray(self.upper, dtype=np.float64), (n,)).copy()
        if not (np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper))):
            raise DomainError('every variable needs finite box bounds')
        if np.any(self.upper < self.lower):
            raise DomainError('upper bound below lower bound')
        self.A_ub, self.b_ub = _rows(self.A_ub, self.b_ub, n)
        self.A_eq, self.b_eq = _rows(self.A_eq, self.b_eq, n)
        self.ub_labels = list(self.ub_labels) or [f'ub[{i}]' for i in range(self.b_ub.size)]
        self.eq_labels = list(self.eq_labels) or [f'eq[{i}]' for i in range(self.b_eq.size)]

    @property
    def n_vars(self) -> int:
        return self.c.size

    def max_violation(self, x: np.ndarray) -> float:
        """Largest constraint residual, relative to the size of the row's terms."""
        worst = 0.0
        if self.b_ub.size:
            scale = 1.0 + np.abs(self.b_ub) + np.abs(self.A_ub) @ np.abs(x)
            worst = max(worst, float(np.max((self.A_ub @ x - self.b_ub) / scale)))
        if self.b_eq.size:
            scale = 1.0 + np.abs(self.b_eq) + np.abs(self.A_eq) @ np.abs(x)
            worst = max(worst, float(np.max(np.abs(self.A_eq @ x - self.b_eq) / scale)))
        worst = max(worst, float(np.max(self.lower - x)), float(np.max(x - self.upper)))
        return worst


def _rows(A, b, n):
    if A is None:
        return np.zeros((0, n)), np.zeros(0)
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if A.shape != (b.size, n):
        raise DomainError(f'constraint matrix shape {A.shape} does not match {b.size} rows x {n} variables')
    return A, b


@dataclass
class LPSolution:
    x: np.ndarray
    objective: float
    iterations: int
    basis: List[int] = field(default_factory=list)


class _Tableau:
    """
    Tableau over the scaled system M z = r. The tableau is rebuilt from M
    and the current basis every REFACTOR_EVERY pivots and before an
    optimum is accepted, so rounding does not accumulate across pivots.
    """

    def __init__(self, M, r, basis):
        self.M = M
        self.r = r
        self.basis = basis
        self.rows = list(range(len(basis)))
        self.allowed = np.ones(M.shape[1], dtype=bool)
        self.cost = np.zeros(M.shape[1])
        self.iterations = 0
        self.T = None
        self.refactorize()

    def set_cost(self, cost):
        self.cost = np.where(self.allowed, cost, 0.0)
        self.refactorize()

    def refactorize(self):
        M = self.M[self.rows]
        k = len(self.basis)
        try:
            body = np.linalg.solve(M[:, self.basis], np.column_stack([M, self.r[self.rows]]))
        except np.linalg.LinAlgError:
            raise NumericalFailure('simplex basis became singular')
        body[:, self.basis] = np.eye(k)
        rhs = body[:, -1]
        rhs[(rhs < 0.0) & (rhs > -VERIFY_TOL)] = 0.0
        T = np.zeros((k + 1, M.shape[1] + 1))
        T[:k] = body
        c_basis = self.cost[self.basis]
        T[-1, :-1] = self.cost - c_basis @ body[:, :-1]
        T[-1, self.basis] = 0.0
        T[-1, -1] = -(c_basis @ rhs)
        self.T = T

    def pivot(self, row, col):
        T = self.T
        T[row] /= T[row, col]
        column = T[:, col].copy()
        column[row] = 0.0
        T -= np.outer(column, T[row])
        self.basis[row] = col
        self.iterations += 1
        if self.iterations % REFACTOR_EVERY == 0:
            self.refactorize()

    def entering(self, bland):
        costs = self.T[-1, :-1]
        candidates = np.flatnonzero((costs < -COST_TOL) & self.allowed)
        if candidates.size == 0:
            return None
        if bland:
            return int(candidates[0])
        return int(candidates[np.argmin(costs[candidates])])

    def leaving(self, col):
        T = self.T
        column = T[:-1, col]
        rows = np.flatnonzero(column > PIVOT_TOL)
        if rows.size == 0:
            return None
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + FEASIBILITY_TOL * max(1.0, abs(best))]
        # Bland tie-break: smallest basic variable index
        return int(min(ties, key=lambda r: self.basis[r]))

    def optimize(self, max_iter):
        bland = False
        streak = 0
        fresh = False
        while True:
            col = self.entering(bland)
            if col is None:
                if fresh:
                    return
                # Re-price on a clean factorization before accepting
                self.refactorize()
                fresh = True
                continue
            row = self.leaving(col)
            if row is None:
                raise NumericalFailure('unbounded direction in a box-constrained LP')
            degenerate = self.T[row, -1] <= FEASIBILITY_TOL
            streak = streak + 1 if degenerate else 0
            if streak >= DEGENERATE_STREAK and not bland:
                logger.debug('switching to Bland pricing after %d degenerate pivots', streak)
                bland = True
            self.pivot(row, col)
            fresh = False
            if self.iterations > max_iter:
                raise NumericalFailure(f'simplex did not converge within {max_iter} pivots')

    def values(self) -> np.ndarray:
        z = np.zeros(self.M.shape[1])
        z[self.basis] = self.T[:-1, -1]
        return z


def simplex_solve(lp: LinearProgram, max_iter: Optional[int] = None) -> LPSolution:
    n = lp.n_vars
    width = lp.upper - lp.lower

    # Column scaling: z = s * (x - lower), so every constraint column peaks at 1
    constraints = np.vstack([lp.A_ub, lp.A_eq])
    col_scale = np.max(np.abs(constraints), axis=0) if constraints.size else np.ones(n)
    col_scale[col_scale == 0] = 1.0

    # Bounds z <= s * width become ordinary rows
    A_ub = np.vstack([lp.A_ub / col_scale, np.eye(n)])
    r_ub = np.concatenate([lp.b_ub - lp.A_ub @ lp.lower, col_scale * width])
    labels_ub = list(lp.ub_labels) + [f'x[{j}] <= {lp.upper[j]:g}' for j in range(n)]
    A_eq = lp.A_eq / col_scale
    r_eq = lp.b_eq - lp.A_eq @ lp.lower

    m_ub, m_eq = r_ub.size, r_eq.size
    m = m_ub + m_eq
    labels = labels_ub + list(lp.eq_labels)

    # Row scaling
    A = np.vstack([A_ub, A_eq])
    r = np.concatenate([r_ub, r_eq])
    scale = np.max(np.abs(A), axis=1)
    scale[scale == 0] = 1.0
    A = A / scale[:, None]
    r = r / scale

    slack = np.zeros((m, m_ub))
    slack[np.arange(m_ub), np.arange(m_ub)] = 1.0
    sign = np.where(r < 0, -1.0, 1.0)
    A = A * sign[:, None]
    slack = slack * sign[:, None]
    r = r * sign

    # Rows whose slack is +1 start with the slack basic; the rest need artificials
    needs_art = [i for i in range(m) if not (i < m_ub and sign[i] > 0)]
    n_art = len(needs_art)
    art = np.zeros((m, n_art))
    art[needs_art, np.arange(n_art)] = 1.0

    first_art = n + m_ub
    n_cols = first_art + n_art
    M = np.hstack([A, slack, art])
    art_of_row = dict(zip(needs_art, range(first_art, n_cols)))
    basis = [art_of_row.get(i, n + i) for i in range(m)]

    max_iter = max_iter or 50 * (m + n_cols)
    tab = _Tableau(M, r, basis)

    # Phase 1: minimise the sum of artificials
    if n_art:
        phase_1 = np.zeros(n_cols)
        phase_1[first_art:] = 1.0
        tab.set_cost(phase_1)
        tab.optimize(max_iter)
        residual = -tab.T[-1, -1]
        if residual > FEASIBILITY_TOL * max(1.0, float(np.max(np.abs(r)))):
            violated = [
                labels[tab.rows[i]] for i, b in enumerate(tab.basis)
                if b >= first_art and tab.T[i, -1] > FEASIBILITY_TOL
            ]
            raise InfeasibleError(
                f'linear program is infeasible (phase-1 residual {residual:.3e})',
                violated=violated,
                residual=float(residual),
            )
        _drive_out_artificials(tab, first_art)
        tab.allowed[first_art:] = False

    # Phase 2
    cost = np.zeros(n_cols)
    cost[:n] = lp.c / col_scale
    tab.set_cost(cost)
    tab.optimize(max_iter)

    y = tab.values()[:n] / col_scale
    x = lp.lower + np.clip(y, 0.0, width)
    violation = lp.max_violation(x)
    if violation > VERIFY_TOL:
        raise NumericalFailure(f'simplex optimum violates constraints by {violation:.3e}')
    return LPSolution(x=x, objective=float(lp.c @ x), iterations=tab.iterations, basis=list(tab.basis))


def _drive_out_artificials(tab: _Tableau, first_art: int):
    """Pivot zero-valued artificials out of the basis; drop redundant rows."""
    redundant = []
    for i, b in enumerate(tab.basis):
        if b < first_art:
            continue
        row = tab.T[i, :first_art]
        candidates = np.flatnonzero(np.abs(row) > PIVOT_TOL)
        if candidates.size:
            tab.pivot(i, int(candidates[np.argmax(np.abs(row[candidates]))]))
        else:
            redundant.append(i)
    if redundant:
        keep = [i for i in range(len(tab.basis)) if i not in redundant]
        tab.rows = [tab.rows[i] for i in keep]
        tab.basis = [tab.basis[i] for i in keep]
        tab.refactorize()
