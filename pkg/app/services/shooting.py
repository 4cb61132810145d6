"""
Transfer-Matrix Shooting
Piecewise-constant coefficient propagation and Pruefer-angle eigenvalue search for
    -(w y')' + w V y = lam w y   on [0, 1]
The state is (y, g) with g = w y' continuous across cells. With w = 1 this is
the Schroedinger equation; with w = rho^2 it is the weighted form.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, NamedTuple, Optional, Tuple

import numpy as np

from app.core.config import settings
from app.core.exceptions import SolverStall

logger = logging.getLogger(__name__)

BISECTION_STEPS = 4
SECANT_MAX_ITER = 100


@dataclass(frozen=True)
class CellModel:
    """Midpoint values of w and V on n_cells equal cells"""

    h: float
    weight: np.ndarray
    potential: np.ndarray

    @property
    def n_cells(self) -> int:
        return self.weight.size


@dataclass(frozen=True)
class ShootingProblem:
    """
    Regular Sturm-Liouville problem on [0, 1].

    left_slope:  None for y(0) = 0, else y'(0) = left_slope * y(0)
    right_slope: None for y(1) = 0, else y'(1) = -right_slope * y(1)
    """

    potential: Callable[[np.ndarray], np.ndarray]
    weight: Callable[[np.ndarray], np.ndarray]
    left_slope: Optional[float]
    right_slope: Optional[float]
    n_intervals: int
    potential_floor: float
    _cells: Dict[int, CellModel] = field(default_factory=dict, compare=False, repr=False)

    @property
    def weight_start(self) -> float:
        return float(self.weight(np.array([0.0]))[0])

    @property
    def weight_end(self) -> float:
        return float(self.weight(np.array([1.0]))[0])

    @property
    def start(self) -> Tuple[float, float]:
        """(y(0), g(0)) of the left-normalized solution"""
        if self.left_slope is None:
            return 0.0, 1.0
        return 1.0, self.weight_start * self.left_slope

    @property
    def target_angle(self) -> float:
        """Pruefer angle modulo pi that the right boundary condition requires"""
        if self.right_slope is None:
            return np.pi
        return 0.5 * np.pi + np.arctan(self.right_slope)

    def cells(self, n_cells: int) -> CellModel:
        if n_cells not in self._cells:
            h = 1.0 / n_cells
            mid = (np.arange(n_cells) + 0.5) * h
            self._cells[n_cells] = CellModel(
                h=h,
                weight=np.asarray(self.weight(mid), dtype=float),
                potential=np.asarray(self.potential(mid), dtype=float),
            )
        return self._cells[n_cells]

    def cells_for(self, lam_max: float) -> int:
        """Cell count keeping omega * h <= pi / 2 on oscillatory cells."""
        omega = np.sqrt(max(lam_max - self.potential_floor, 0.0))
        refine = max(1, int(np.ceil(omega / (0.5 * np.pi * self.n_intervals))))
        return self.n_intervals * refine


class ShootingSolution(NamedTuple):
    lam: np.ndarray
    n_cells: int
    start: Tuple[float, float]
    end_value: np.ndarray
    end_flux: np.ndarray


# ---------------------------------------------------------------------------
# Propagation
# ---------------------------------------------------------------------------

def _cell_matrices(lam: np.ndarray, cells: CellModel, normalize: bool):
    z = (lam[:, None] - cells.potential[None, :]) * cells.h**2
    root = np.sqrt(np.abs(z))
    oscillatory = z >= 0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        cosine = np.where(oscillatory, np.cos(root), np.cosh(root))
        sinc = np.where(
            oscillatory,
            np.sinc(root / np.pi),
            np.where(root > 1e-8, np.sinh(root) / root, 1.0),
        )
    a = cosine
    b = cells.h * sinc / cells.weight[None, :]
    c = -(z / cells.h) * sinc * cells.weight[None, :]
    d = cosine.copy()
    if normalize:
        scale = np.where(oscillatory, 1.0, cosine)
        a, b, c, d = a / scale, b / scale, c / scale, d / scale
    return a, b, c, d


def _prefix_products(lam: np.ndarray, cells: CellModel, normalize: bool = False):
    """Transfer matrices from x = 0 to the right end of every cell (inclusive scan)."""
    a, b, c, d = _cell_matrices(lam, cells, normalize)
    step = 1
    while step < cells.n_cells:
        a1, b1, c1, d1 = a[:, :-step], b[:, :-step], c[:, :-step], d[:, :-step]
        a2, b2, c2, d2 = a[:, step:], b[:, step:], c[:, step:], d[:, step:]
        na = a2 * a1 + b2 * c1
        nb = a2 * b1 + b2 * d1
        nc = c2 * a1 + d2 * c1
        nd = c2 * b1 + d2 * d1
        a = np.concatenate([a[:, :step], na], axis=1)
        b = np.concatenate([b[:, :step], nb], axis=1)
        c = np.concatenate([c[:, :step], nc], axis=1)
        d = np.concatenate([d[:, :step], nd], axis=1)
        step *= 2
    return a, b, c, d


def propagate(problem: ShootingProblem, lam: np.ndarray, n_cells: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Node values of (y, g) for each lam.

    Returns:
        (y, g) with shape (len(lam), n_cells + 1)
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    y0, g0 = problem.start
    a, b, c, d = _prefix_products(lam, problem.cells(n_cells))
    first = np.ones((lam.size, 1))
    y = np.concatenate([first * y0, a * y0 + b * g0], axis=1)
    g = np.concatenate([first * g0, c * y0 + d * g0], axis=1)
    return y, g


def pruefer_angle(problem: ShootingProblem, lam: np.ndarray, n_cells: int) -> np.ndarray:
    """
    Pruefer angle theta(1) = Z pi + phi of the left-normalized solution.

    Z counts sign changes of y over the cell nodes (exact while every
    oscillatory cell has omega h < pi); phi in [0, pi) is the angle of
    (y(1), y'(1)) modulo pi.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    y0, g0 = problem.start
    a, b, c, d = _prefix_products(lam, problem.cells(n_cells), normalize=True)
    y = a * y0 + b * g0
    g_end = c[:, -1] * y0 + d[:, -1] * g0
    signs = np.signbit(np.concatenate([np.full((lam.size, 1), y0), y], axis=1))
    zero_count = np.count_nonzero(signs[:, 1:] != signs[:, :-1], axis=1)
    phi = np.mod(np.arctan2(y[:, -1], g_end / problem.weight_end), np.pi)
    return zero_count * np.pi + phi


# ---------------------------------------------------------------------------
# Eigenvalue search
# ---------------------------------------------------------------------------

def _mismatch(problem: ShootingProblem, lam: np.ndarray, ks: np.ndarray, n_cells: int) -> np.ndarray:
    return pruefer_angle(problem, lam, n_cells) - problem.target_angle - ks * np.pi


def _bracket(problem, ks, guesses, pad, n_cells, max_widenings):
    lo = guesses - pad
    hi = guesses + pad
    width = np.array(pad, dtype=float)
    for attempt in range(max_widenings + 1):
        cells = n_cells or problem.cells_for(float(hi.max()))
        low_bad = _mismatch(problem, lo, ks, cells) >= 0
        high_bad = _mismatch(problem, hi, ks, cells) <= 0
        if not (low_bad.any() or high_bad.any()):
            return lo, hi, cells
        if attempt == max_widenings:
            break
        lo = np.where(low_bad, lo - width, lo)
        hi = np.where(high_bad, hi + width, hi)
        width = np.where(low_bad | high_bad, 2.0 * width, width)
    bad = int(ks[np.argmax(low_bad | high_bad)])
    raise SolverStall(f"could not bracket eigenvalue k={bad} after {max_widenings} widenings", index=bad)


def find_eigenvalues(
    problem: ShootingProblem,
    ks: np.ndarray,
    guesses: np.ndarray,
    pad: np.ndarray,
    n_cells: Optional[int] = None,
    rel_tol: Optional[float] = None,
    max_widenings: Optional[int] = None,
) -> ShootingSolution:
    """
    Eigenvalues with k zeros in (0, 1), k in ks, by bracketing the angle mismatch,
    a few bisection steps and an Illinois false-position polish.

    Args:
        problem: Shooting problem
        ks: Oscillation counts (0 = ground state)
        guesses: Initial estimates
        pad: Half-widths of the initial brackets
        n_cells: Fixed cell count (chosen from the brackets when None)
        rel_tol: Relative bracket width at convergence
        max_widenings: Geometric bracket widenings before giving up

    Returns:
        ShootingSolution with eigenvalues and right-end states
    """
    rel_tol = rel_tol if rel_tol is not None else settings.SHOOTING_REL_TOL
    max_widenings = max_widenings if max_widenings is not None else settings.SHOOTING_MAX_WIDENINGS
    ks = np.asarray(ks, dtype=int)
    guesses = np.asarray(guesses, dtype=float)
    pad = np.broadcast_to(np.asarray(pad, dtype=float), guesses.shape).copy()

    lo, hi, cells = _bracket(problem, ks, guesses, pad, n_cells, max_widenings)

    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        positive = _mismatch(problem, mid, ks, cells) > 0
        hi = np.where(positive, mid, hi)
        lo = np.where(positive, lo, mid)

    f_lo = _mismatch(problem, lo, ks, cells)
    f_hi = _mismatch(problem, hi, ks, cells)
    side = np.zeros(ks.size, dtype=int)
    estimate = 0.5 * (lo + hi)
    active = np.ones(ks.size, dtype=bool)

    for _ in range(SECANT_MAX_ITER):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        x = hi[idx] - f_hi[idx] * (hi[idx] - lo[idx]) / (f_hi[idx] - f_lo[idx])
        x = np.clip(x, lo[idx], hi[idx])
        fx = _mismatch(problem, x, ks[idx], cells)
        estimate[idx] = x

        below = fx < 0
        above = fx > 0
        lo_idx, hi_idx = idx[below], idx[above]
        lo[lo_idx], f_lo[lo_idx] = x[below], fx[below]
        f_hi[lo_idx[side[lo_idx] == -1]] *= 0.5
        side[lo_idx] = -1
        hi[hi_idx], f_hi[hi_idx] = x[above], fx[above]
        f_lo[hi_idx[side[hi_idx] == 1]] *= 0.5
        side[hi_idx] = 1

        done = (hi[idx] - lo[idx] <= rel_tol * np.maximum(1.0, np.abs(x))) | (fx == 0)
        active[idx[done]] = False

    if active.any():
        logger.warning(f"eigenvalue polish stopped early for k={ks[active].tolist()}")

    y0, g0 = problem.start
    y, g = propagate(problem, estimate, cells)
    return ShootingSolution(
        lam=estimate,
        n_cells=cells,
        start=(y0, g0),
        end_value=y[:, -1],
        end_flux=g[:, -1],
    )
