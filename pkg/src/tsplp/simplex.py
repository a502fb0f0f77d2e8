"""A small two-phase revised simplex for ``min c@x, A x = b, x >= 0``.

Meant for desk-size models and as an independent second route next to HiGHS.
The basis inverse is kept dense and updated by rank-one (product form)
updates, with a fresh inversion every ``refactor_every`` pivots.

Anti-cycling: pricing is Dantzig's rule until ``stall_window`` consecutive
degenerate pivots occur, then Bland's smallest-index rule (entering and
leaving) takes over until the objective strictly improves again. Bland's rule
cannot cycle, so the method terminates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp


@dataclass
class SimplexResult:
    status: str  # optimal | infeasible | unbounded | iteration_limit
    x: np.ndarray
    duals: np.ndarray
    objective: float
    iterations: int
    bland_pivots: int
    note: str = ""


class _Tableau:
    def __init__(self, A: sp.csc_matrix, b, tol):
        self.A = A
        self.m, self.n = A.shape
        self.b = b
        self.tol = tol
        # columns n..n+m-1 are artificials
        self.basis = np.arange(self.n, self.n + self.m)
        self.Binv = np.eye(self.m)
        self.xB = b.copy()

    def column(self, q: int) -> np.ndarray:
        if q >= self.n:
            e = np.zeros(self.m)
            e[q - self.n] = 1.0
            return e
        col = np.zeros(self.m)
        lo, hi = self.A.indptr[q], self.A.indptr[q + 1]
        col[self.A.indices[lo:hi]] = self.A.data[lo:hi]
        return col

    def refactor(self):
        B = np.column_stack([self.column(q) for q in self.basis])
        self.Binv = np.linalg.inv(B)
        self.xB = self.Binv @ self.b

    def pivot(self, q: int, leave: int, alpha: np.ndarray):
        piv = alpha[leave]
        row = self.Binv[leave] / piv
        self.Binv -= np.outer(alpha, row)
        self.Binv[leave] = row
        step = self.xB[leave] / piv
        self.xB -= step * alpha
        self.xB[leave] = step
        self.basis[leave] = q


PIVOT_TOL = 1e-7


def revised_simplex(A, b, c, tol: float = 1e-9, max_iterations: Optional[int] = None,
                    stall_window: Optional[int] = None, refactor_every: int = 100) -> SimplexResult:
    """Solve ``min c@x  s.t.  A x = b, x >= 0``.

    ``tol`` is the reduced-cost and feasibility tolerance. ``stall_window``
    (default: the row count) is the number of consecutive non-improving pivots
    tolerated before switching to Bland's rule. A singular basis at
    refactorization ends the solve with status ``iteration_limit`` and a note.
    """
    A = sp.csc_matrix(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).copy()
    c = np.asarray(c, dtype=np.float64)
    m, n = A.shape
    if stall_window is None:
        stall_window = max(50, m)
    if max_iterations is None:
        max_iterations = 10 * (m + n)

    flip = b < 0
    if flip.any():
        D = sp.diags(np.where(flip, -1.0, 1.0))
        A = sp.csc_matrix(D @ A)
        b[flip] = -b[flip]
    AT = sp.csr_matrix(A.T)

    tab = _Tableau(A, b, tol)
    total_iters = 0
    bland_pivots = 0

    def run_phase(cost_full: np.ndarray, lock_artificials: bool):
        nonlocal total_iters, bland_pivots
        use_bland = False
        stalled = 0
        since_refactor = 0
        last_obj = cost_full[tab.basis] @ tab.xB
        while True:
            if total_iters >= max_iterations:
                return "iteration_limit"
            pi = cost_full[tab.basis] @ tab.Binv
            # artificials never re-enter
            d = cost_full[:n] - AT @ pi
            candidates = np.flatnonzero(d < -tol)
            if candidates.size == 0:
                return "optimal"
            q = int(candidates[0]) if use_bland else int(candidates[np.argmin(d[candidates])])
            alpha = tab.Binv @ tab.column(q)
            leave = _ratio_test(tab, alpha, tol, use_bland, n, lock_artificials)
            if leave is None:
                return "unbounded"
            tab.pivot(q, leave, alpha)
            total_iters += 1
            since_refactor += 1
            if use_bland:
                bland_pivots += 1
            if since_refactor >= refactor_every:
                tab.refactor()
                since_refactor = 0
            obj = cost_full[tab.basis] @ tab.xB
            if obj < last_obj - tol:
                stalled = 0
                use_bland = False
            else:
                stalled += 1
                if stalled >= stall_window:
                    use_bland = True
            last_obj = obj

    phase1_cost = np.concatenate([np.zeros(n), np.ones(m)])
    try:
        status = run_phase(phase1_cost, lock_artificials=False)
        tab.refactor()
    except np.linalg.LinAlgError:
        return _breakdown(n, m, total_iters, bland_pivots, "phase 1")
    if status == "iteration_limit":
        return _result("iteration_limit", tab, c, n, total_iters, bland_pivots, flip, "phase 1")
    infeas = float(np.sum(tab.xB[tab.basis >= n]))
    if infeas > max(tol, 1e-7) * max(1.0, float(np.abs(b).max(initial=0.0))):
        return _result("infeasible", tab, c, n, total_iters, bland_pivots, flip,
                       f"phase 1 ended with artificial mass {infeas:.3e}")

    phase2_cost = np.concatenate([c, np.zeros(m)])
    try:
        status = run_phase(phase2_cost, lock_artificials=True)
        tab.refactor()
    except np.linalg.LinAlgError:
        return _breakdown(n, m, total_iters, bland_pivots, "phase 2")
    return _result(status, tab, c, n, total_iters, bland_pivots, flip, "")


def _ratio_test(tab: _Tableau, alpha: np.ndarray, tol: float, bland: bool, n: int, lock_artificials: bool):
    """Row leaving the basis, or None when the direction is unbounded.

    Artificial variables still basic in phase 2 sit at zero and must stay
    there, so any nonzero ``alpha`` on them blocks the step at length 0.
    """
    if lock_artificials:
        art_rows = np.flatnonzero((tab.basis >= n) & (np.abs(alpha) > PIVOT_TOL))
    else:
        art_rows = np.empty(0, dtype=np.int64)
    pos = np.flatnonzero(alpha > PIVOT_TOL)
    if pos.size == 0 and art_rows.size == 0:
        return None
    ratios = np.full(tab.m, np.inf)
    ratios[pos] = np.maximum(tab.xB[pos], 0.0) / alpha[pos]
    ratios[art_rows] = 0.0
    best = ratios.min()
    ties = np.flatnonzero(ratios <= best + tol * max(1.0, abs(best)))
    if bland:
        return int(ties[np.argmin(tab.basis[ties])])
    return int(ties[np.argmax(np.abs(alpha[ties]))])


def _result(status, tab: _Tableau, c, n, iters, bland_pivots, flip, note):
    x = np.zeros(n)
    structural = tab.basis < n
    x[tab.basis[structural]] = tab.xB[structural]
    cost_full = np.concatenate([c, np.zeros(tab.m)])
    duals = cost_full[tab.basis] @ tab.Binv
    duals = np.where(flip, -duals, duals)
    return SimplexResult(status, x, duals, float(c @ x), iters, bland_pivots, note)


def _breakdown(n, m, iters, bland_pivots, phase):
    return SimplexResult("iteration_limit", np.zeros(n), np.zeros(m), float("nan"), iters, bland_pivots,
                         f"numerical breakdown: singular basis in {phase}")
