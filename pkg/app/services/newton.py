"""
Damped Newton Driver
Gauss-Newton iteration with step halving for discretized function-space maps
"""
import logging
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import linalg

from app.core.config import settings
from app.core.exceptions import NoConvergence
from app.models.riccati import NewtonReport

logger = logging.getLogger(__name__)


def weighted_norm(r: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sqrt(max(float(r @ (weights * r)), 0.0)))


def damped_newton(
    residual: Callable[[np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    weights: np.ndarray,
    max_iter: Optional[int] = None,
    tol: Optional[float] = None,
    step_tol: Optional[float] = None,
    max_halvings: Optional[int] = None,
    label: str = "newton",
) -> Tuple[np.ndarray, NewtonReport]:
    """
    Minimize the weighted norm of residual(x) by damped Gauss-Newton.

    Each step solves the normal equations J^T W J dx = -J^T W r and halves the
    step until the residual decreases. Iteration stops when the residual drops
    below tol, or when no further decrease is possible. A stationary point is
    accepted (and flagged in the report) only within NEWTON_STALL_FACTOR * tol.

    Args:
        residual: x -> residual vector
        jacobian: x -> d residual / d x (dense, rows match residual)
        x0: Starting point
        weights: Quadrature weights defining the residual norm
        max_iter: Iteration budget
        tol: Residual tolerance
        step_tol: Relative step size regarded as stationary
        max_halvings: Step halvings per iteration
        label: Name used in log lines

    Returns:
        (x, report)

    Raises:
        NoConvergence: budget exhausted or stalled above the floor, with the
            residual history attached
    """
    max_iter = max_iter if max_iter is not None else settings.NEWTON_MAX_ITER
    tol = tol if tol is not None else settings.NEWTON_TOL
    step_tol = step_tol if step_tol is not None else settings.NEWTON_STEP_TOL
    max_halvings = max_halvings if max_halvings is not None else settings.NEWTON_MAX_HALVINGS

    x = np.array(x0, dtype=float)
    r = residual(x)
    res = weighted_norm(r, weights)
    history = [res]
    total_halvings = 0
    stationary = False
    iterations = 0

    while res >= tol:
        if iterations >= max_iter:
            logger.warning(f"{label}: no convergence after {max_iter} iterations, residual {res:.3e}")
            raise NoConvergence(
                f"{label} did not converge in {max_iter} iterations (residual {res:.3e})",
                history,
            )
        iterations += 1

        J = jacobian(x)
        WJ = weights[:, None] * J
        delta = linalg.solve(J.T @ WJ, -(WJ.T @ r), assume_a="pos")

        step = 1.0
        for _ in range(max_halvings + 1):
            x_trial = x + step * delta
            r_trial = residual(x_trial)
            res_trial = weighted_norm(r_trial, weights)
            if res_trial < res:
                break
            step *= 0.5
            total_halvings += 1
        else:
            stationary = True
            logger.debug(f"{label}: no descent along the Newton direction at residual {res:.3e}")
            break

        x, r, res = x_trial, r_trial, res_trial
        history.append(res)
        logger.debug(f"{label}: iter {iterations} residual {res:.3e} step {step:g}")

        if step * np.max(np.abs(delta)) <= step_tol * (1.0 + np.max(np.abs(x))):
            stationary = res >= tol
            break

    if res >= tol:
        if res > settings.NEWTON_STALL_FACTOR * tol:
            logger.warning(f"{label}: stalled at residual {res:.3e} (tol {tol:.1e})")
            raise NoConvergence(f"{label} stalled at residual {res:.3e} (tol {tol:.1e})", history)
        logger.info(f"{label}: stationary at residual {res:.3e}, within {settings.NEWTON_STALL_FACTOR:g} x tol")

    report = NewtonReport(
        iterations=iterations,
        residual_history=history,
        converged=res < tol,
        halvings=total_halvings,
        stationary=stationary,
    )
    return x, report
