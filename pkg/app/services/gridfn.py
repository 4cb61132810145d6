"""
Grid Function Calculus
Quadrature, finite differences, function-space norms and membership checks
on uniform grids
"""
import logging
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson

from app.core.exceptions import MembershipViolation, UnsupportedOrder
from app.models.grid import GridFunction, MembershipReport, Parity, SpaceKind, SpaceTag

logger = logging.getLogger(__name__)

MAX_SOBOLEV_ORDER = 2


# ---------------------------------------------------------------------------
# Stencils (axis 0, so they apply to columns of a matrix as well)
# ---------------------------------------------------------------------------

def _first_derivative(values: np.ndarray, h: float, order: int) -> np.ndarray:
    if order == 2:
        return np.gradient(values, h, axis=0, edge_order=2)
    if order != 4:
        raise ValueError(f"derivative order must be 2 or 4, got {order}")
    f = values
    out = np.empty_like(f, dtype=float)
    out[2:-2] = (-f[4:] + 8.0 * f[3:-1] - 8.0 * f[1:-3] + f[:-4]) / (12.0 * h)
    out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h)
    out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h)
    out[-1] = (25.0 * f[-1] - 48.0 * f[-2] + 36.0 * f[-3] - 16.0 * f[-4] + 3.0 * f[-5]) / (12.0 * h)
    out[-2] = (3.0 * f[-1] + 10.0 * f[-2] - 18.0 * f[-3] + 6.0 * f[-4] - f[-5]) / (12.0 * h)
    return out


def _second_derivative(values: np.ndarray, h: float) -> np.ndarray:
    f = values
    out = np.empty_like(f, dtype=float)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h**2
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h**2
    out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / h**2
    return out


def _simpson_weights(n: int, h: float) -> np.ndarray:
    w = np.zeros(n + 1)
    panels = n if n % 2 == 0 else n - 1
    w[0:panels + 1:2] = 2.0
    w[1:panels:2] = 4.0
    w[0] = w[panels] = 1.0
    w *= h / 3.0
    if panels < n:
        # trapezoid on the last interval
        w[n - 1] += h / 2.0
        w[n] += h / 2.0
    return w


# ---------------------------------------------------------------------------
# Calculus
# ---------------------------------------------------------------------------

def integrate(f: GridFunction) -> float:
    """
    Composite Simpson quadrature over the grid.

    Args:
        f: Grid function

    Returns:
        Approximation of the integral of f over [0, length]
    """
    return float(simpson_weights(f.n_intervals, f.length) @ f.values)


def differentiate(f: GridFunction, order: int = 2) -> GridFunction:
    """
    First derivative by finite differences.

    order=2: central differences, one-sided 2nd-order stencils at the ends.
    order=4: 5-point central differences, one-sided 4th-order stencils at the ends.
    """
    if f.n_intervals < 4:
        raise ValueError("differentiate needs at least 4 intervals")
    return f.with_values(_first_derivative(f.values, f.h, order))


def second_derivative(f: GridFunction) -> GridFunction:
    if f.n_intervals < 4:
        raise ValueError("second_derivative needs at least 4 intervals")
    return f.with_values(_second_derivative(f.values, f.h))


def antiderivative(f: GridFunction) -> GridFunction:
    """Cumulative Simpson integral, zero at the left end."""
    return f.with_values(cumulative_simpson(f.values, dx=f.h, initial=0.0))


def derivative_of_order(f: GridFunction, alpha: int) -> GridFunction:
    if alpha > MAX_SOBOLEV_ORDER:
        raise UnsupportedOrder(f"order {alpha} > {MAX_SOBOLEV_ORDER} is not supported")
    if alpha == 0:
        return f
    if alpha == 1:
        return differentiate(f)
    return second_derivative(f)


# ---------------------------------------------------------------------------
# Dense operators (exact matrix forms of the calculus above)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _cached_derivative_matrix(n: int, length: float, order: int) -> np.ndarray:
    mat = _first_derivative(np.eye(n + 1), length / n, order)
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=32)
def _cached_simpson_weights(n: int, length: float) -> np.ndarray:
    w = _simpson_weights(n, length / n)
    w.setflags(write=False)
    return w


@lru_cache(maxsize=16)
def _cached_cumulative_matrix(n: int, length: float) -> np.ndarray:
    mat = cumulative_simpson(np.eye(n + 1), dx=length / n, axis=0, initial=0.0)
    mat.setflags(write=False)
    return mat


def derivative_matrix(n: int, length: float = 1.0, order: int = 2) -> np.ndarray:
    """D with D @ f.values == differentiate(f, order).values"""
    return _cached_derivative_matrix(n, float(length), order)


def simpson_weights(n: int, length: float = 1.0) -> np.ndarray:
    """w with w @ f.values == integrate(f)"""
    return _cached_simpson_weights(n, float(length))


def cumulative_matrix(n: int, length: float = 1.0) -> np.ndarray:
    """C with C @ f.values == antiderivative(f).values"""
    return _cached_cumulative_matrix(n, float(length))


# ---------------------------------------------------------------------------
# Spaces
# ---------------------------------------------------------------------------

def norm(f: GridFunction, tag: SpaceTag, strict: bool = False, tol: Optional[float] = None) -> float:
    """
    Norm of f in the tagged space: the L2 norm of its derivative of order
    tag.derivative_order.

    Args:
        f: Grid function
        tag: Space tag
        strict: Raise MembershipViolation when f fails the membership check
        tol: Membership tolerance for strict mode

    Returns:
        Norm value
    """
    order = tag.derivative_order
    if order > MAX_SOBOLEV_ORDER:
        raise UnsupportedOrder(f"H_{order} norms are not supported (max {MAX_SOBOLEV_ORDER})")
    if strict:
        from app.core.config import settings

        report = check_membership(f, tag, tol if tol is not None else settings.MEMBERSHIP_TOL)
        if not report.member:
            raise MembershipViolation(report.summary())
    g = derivative_of_order(f, order)
    return float(np.sqrt(max(integrate(g.with_values(g.values**2)), 0.0)))


def check_membership(f: GridFunction, tag: SpaceTag, tol: float) -> MembershipReport:
    """
    Tolerance membership check.

    W10: |f(0)|, |f(1)| <= tol. H_alpha: |integral of f^(j)| <= tol for j = 0..alpha,
    the integral of f^(j) being evaluated as f^(j-1)(1) - f^(j-1)(0). Parity:
    max |f(x) -/+ f(1 - x)| <= tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    measurements = {}
    failures = []

    if tag.kind == SpaceKind.W10:
        measurements["f(0)"] = abs(float(f.values[0]))
        measurements["f(1)"] = abs(float(f.values[-1]))
    elif tag.kind == SpaceKind.H:
        if tag.alpha > MAX_SOBOLEV_ORDER:
            raise UnsupportedOrder(f"H_{tag.alpha} is not supported (max {MAX_SOBOLEV_ORDER})")
        measurements["int f"] = abs(integrate(f))
        lower = f
        for j in range(1, tag.alpha + 1):
            measurements[f"int f^({j})"] = abs(float(lower.values[-1] - lower.values[0]))
            lower = differentiate(lower)

    if tag.parity != Parity.ANY:
        mirrored = f.values[::-1]
        gap = f.values + mirrored if tag.parity == Parity.ODD else f.values - mirrored
        measurements[f"parity[{tag.parity.value}]"] = float(np.max(np.abs(gap)))

    for name, value in measurements.items():
        if value > tol:
            failures.append(f"{name} = {value:.3e} > {tol:g}")

    return MembershipReport(
        tag=tag.label(),
        tol=tol,
        member=not failures,
        measurements=measurements,
        failures=failures,
    )


def project_parity(f: GridFunction, parity: Parity) -> GridFunction:
    """(f(x) + f(1-x))/2 for even, (f(x) - f(1-x))/2 for odd."""
    parity = Parity(parity)
    if parity == Parity.ANY:
        return f
    mirrored = f.values[::-1]
    if parity == Parity.EVEN:
        return f.with_values(0.5 * (f.values + mirrored))
    return f.with_values(0.5 * (f.values - mirrored))
