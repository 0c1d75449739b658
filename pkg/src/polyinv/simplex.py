"""Dense two-phase simplex for small inequality-form LPs.

Solves  optimize c.x  subject to  A x <= b  with x free, by splitting
x = x+ - x- and adding slack/artificial columns. Bland's rule (smallest
eligible index for both entering and leaving choices) prevents cycling;
an iteration cap backstops numerical trouble. Problem sizes here are a
few dozen rows and at most a handful of original variables, so a dense
tableau is the simplest reliable choice.
"""

from __future__ import annotations

import numpy as np

from .errors import LpNumericalError

PIVOT_TOL = 1e-9
OPT_STATUS = "optimal"
INFEASIBLE_STATUS = "infeasible"
UNBOUNDED_STATUS = "unbounded"


def solve_inequality_lp(
    c: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    maximize: bool = True,
    max_iter: int = 20000,
) -> tuple[str, float, np.ndarray | None]:
    """Optimize c.x over {x : a x <= b}.

    Returns (status, optimum, argument). For non-optimal statuses the
    optimum is nan and the argument is None.
    """
    c = np.asarray(c, dtype=float).ravel()
    a = np.asarray(a, dtype=float).reshape(-1, c.size) if np.size(a) else np.zeros((0, c.size))
    b = np.asarray(b, dtype=float).ravel()
    n = c.size
    m = a.shape[0]
    d = -c if maximize else c  # minimize d.x internally

    if m == 0:
        if np.allclose(d, 0.0):
            return OPT_STATUS, 0.0, np.zeros(n)
        return UNBOUNDED_STATUS, float("nan"), None

    # Sign-fix rows so rhs >= 0; flipped rows get slack -1 and an artificial.
    flip = b < 0.0
    a_fix = np.where(flip[:, None], -a, a)
    b_fix = np.where(flip, -b, b)
    slack = np.diag(np.where(flip, -1.0, 1.0))
    art_rows = np.flatnonzero(flip)
    n_art = art_rows.size

    # Columns: [x+ (n) | x- (n) | slack (m) | artificial (n_art)]
    art = np.zeros((m, n_art))
    art[art_rows, np.arange(n_art)] = 1.0
    tab = np.hstack([a_fix, -a_fix, slack, art])
    rhs = b_fix.copy()
    n_cols = tab.shape[1]
    art_start = 2 * n + m

    basis = np.empty(m, dtype=int)
    basis[~flip] = 2 * n + np.flatnonzero(~flip)
    basis[flip] = art_start + np.arange(n_art)

    iters = 0

    def pivot_on(row: int, col: int) -> None:
        piv = tab[row, col]
        tab[row] /= piv
        rhs[row] /= piv
        other = np.arange(m) != row
        factor = tab[other, col][:, None]
        tab[other] -= factor * tab[row]
        rhs[other] -= factor.ravel() * rhs[row]
        basis[row] = col
        np.clip(rhs, 0.0, None, out=rhs)

    def run_phase(cost: np.ndarray) -> str:
        nonlocal iters
        # Reduced costs relative to the current basis (tableau is canonical).
        red = cost - cost[basis] @ tab
        while True:
            candidates = np.flatnonzero(red < -PIVOT_TOL)
            if candidates.size == 0:
                return OPT_STATUS
            entering = int(candidates[0])
            col = tab[:, entering]
            eligible = np.flatnonzero(col > PIVOT_TOL)
            if eligible.size == 0:
                return UNBOUNDED_STATUS
            ratios = rhs[eligible] / col[eligible]
            best = ratios.min()
            ties = eligible[ratios <= best + PIVOT_TOL]
            leave = int(ties[np.argmin(basis[ties])])
            pivot_on(leave, entering)
            red = red - red[entering] * tab[leave]
            iters += 1
            if iters > max_iter:
                raise LpNumericalError(f"simplex exceeded {max_iter} iterations")

    if n_art:
        phase1_cost = np.zeros(n_cols)
        phase1_cost[art_start:] = 1.0
        run_phase(phase1_cost)
        if float(phase1_cost[basis] @ rhs) > 1e-7:
            return INFEASIBLE_STATUS, float("nan"), None
        # Drive leftover artificials out of the basis; all-zero rows are
        # redundant constraints and keep their artificial pinned at zero.
        for i in np.flatnonzero(basis >= art_start):
            row_cols = np.flatnonzero(np.abs(tab[i, :art_start]) > PIVOT_TOL)
            if row_cols.size:
                pivot_on(int(i), int(row_cols[0]))
        tab[:, art_start:] = 0.0  # artificials may never re-enter

    phase2_cost = np.zeros(n_cols)
    phase2_cost[:n] = d
    phase2_cost[n : 2 * n] = -d
    status = run_phase(phase2_cost)
    if status != OPT_STATUS:
        return status, float("nan"), None

    values = np.zeros(n_cols)
    values[basis] = rhs
    x = values[:n] - values[n : 2 * n]
    return OPT_STATUS, float(c @ x), x
