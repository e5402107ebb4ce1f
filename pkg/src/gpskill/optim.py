"""Damped Gauss-Newton solver for small least-squares problems.

Each iteration takes the minimum-norm Gauss-Newton step (truncated SVD via
lstsq) and backtracks the step length until the sum of squared residuals
does not increase. The truncation matters here: the via-point bases are
severely ill conditioned, and the min-norm step prevents the solution from
drifting along near-null directions that barely change the objective. The
via-point problems are linear, so convergence typically takes one accepted
step, but the backtracking guard keeps the objective history monotone for
any residual function.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericFailure

MAX_ITER = 200
STEP_TOL = 1e-8
RCOND = 1e-10


@dataclass
class SolveResult:
    x: np.ndarray
    objective_history: list
    converged: bool
    iterations: int


def least_squares(residual_fn, jacobian_fn, x0, max_iter=MAX_ITER, step_tol=STEP_TOL, rcond=RCOND):
    x = np.array(x0, dtype=float)
    r = residual_fn(x)
    obj = float(r @ r)
    if not np.isfinite(obj):
        raise NumericFailure("non-finite initial residual")
    history = [obj]
    for it in range(1, max_iter + 1):
        J = jacobian_fn(x)
        d = np.linalg.lstsq(J, -r, rcond=rcond)[0]
        if np.linalg.norm(d) < step_tol:
            return SolveResult(x, history, True, it - 1)
        alpha = 1.0
        accepted = False
        for _ in range(30):
            x_new = x + alpha * d
            r_new = residual_fn(x_new)
            obj_new = float(r_new @ r_new)
            if np.isfinite(obj_new) and obj_new <= obj:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            return SolveResult(x, history, False, it - 1)
        x, r, obj = x_new, r_new, obj_new
        history.append(obj)
        if alpha * np.linalg.norm(d) < step_tol:
            return SolveResult(x, history, True, it)
    return SolveResult(x, history, False, max_iter)
