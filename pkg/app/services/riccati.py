"""
Riccati Mappings
q -> q' + q^2 + (lower order) - c0, their gradients and Newton inversion
"""
import logging
from typing import Optional, Tuple

import numpy as np

from app.core.config import settings
from app.core.exceptions import MembershipViolation
from app.models.grid import GridFunction, SpaceTag
from app.models.riccati import (
    InversionResult,
    NormBounds,
    PNormBounds,
    PotentialLaw,
    RiccatiImage,
)
from app.services import gridfn
from app.services.newton import damped_newton

logger = logging.getLogger(__name__)


def _warn_unless_w10(q: GridFunction, name: str = "q") -> None:
    report = gridfn.check_membership(q, SpaceTag.w10(), settings.MEMBERSHIP_TOL)
    if not report.member:
        logger.warning(f"{name} outside W10: {report.summary()}")


def _require_zero_mean(p: GridFunction, tol: float = 1e-6) -> None:
    mean = gridfn.integrate(p)
    if abs(mean) > tol:
        raise MembershipViolation(f"target must have zero mean, got {mean:.3e}")


def _split_mean(q: GridFunction, values: np.ndarray) -> RiccatiImage:
    c0 = float(gridfn.simpson_weights(q.n_intervals, q.length) @ values)
    return RiccatiImage(p=q.with_values(values - c0), c0=c0)


# ---------------------------------------------------------------------------
# Forward maps
# ---------------------------------------------------------------------------

def map_G(q: GridFunction, q0: float, order: int = 2) -> RiccatiImage:
    """
    G(q) = q' + q^2 + 2 q0 q - c0 with c0 the mean of the rest, so p lies in H0.

    Args:
        q: W10 function
        q0: Constant part of the logarithmic derivative
        order: Finite-difference order for q'

    Returns:
        RiccatiImage(p, c0)
    """
    _warn_unless_w10(q)
    dq = gridfn.differentiate(q, order).values
    return _split_mean(q, dq + q.values**2 + 2.0 * q0 * q.values)


def map_P(q: GridFunction, law: PotentialLaw, order: int = 2) -> RiccatiImage:
    """P(q) = q' + q^2 + u(Q) - c0 with Q the antiderivative of q (q0 = 0)."""
    _warn_unless_w10(q)
    dq = gridfn.differentiate(q, order).values
    Q = gridfn.antiderivative(q).values
    return _split_mean(q, dq + q.values**2 + law.u(Q))


def grad_G(q: GridFunction, q0: float, f: GridFunction, order: int = 2) -> GridFunction:
    """Directional derivative of G at q along f: f' + 2 (q0 + q) f minus its mean."""
    g = gridfn.differentiate(f, order).values + 2.0 * (q0 + q.values) * f.values
    return _split_mean(f, g).p


def grad_P(q: GridFunction, law: PotentialLaw, f: GridFunction, order: int = 2) -> GridFunction:
    """Directional derivative of P at q along f: f' + 2 q f + u'(Q) F minus its mean, F = int f."""
    Q = gridfn.antiderivative(q).values
    F = gridfn.antiderivative(f).values
    g = gridfn.differentiate(f, order).values + 2.0 * q.values * f.values + law.du(Q) * F
    return _split_mean(f, g).p


# ---------------------------------------------------------------------------
# Jacobian matrices
# ---------------------------------------------------------------------------

def _remove_mean_rows(J: np.ndarray, w: np.ndarray) -> np.ndarray:
    return J - np.outer(np.ones(J.shape[0]), w @ J)


def jacobian_G(q: GridFunction, q0: float, order: int = 2) -> np.ndarray:
    n, L = q.n_intervals, q.length
    J = gridfn.derivative_matrix(n, L, order) + np.diag(2.0 * (q0 + q.values))
    return _remove_mean_rows(J, gridfn.simpson_weights(n, L))


def jacobian_P(q: GridFunction, law: PotentialLaw, order: int = 2) -> np.ndarray:
    n, L = q.n_intervals, q.length
    C = gridfn.cumulative_matrix(n, L)
    Q = C @ q.values
    J = gridfn.derivative_matrix(n, L, order) + np.diag(2.0 * q.values) + law.du(Q)[:, None] * C
    return _remove_mean_rows(J, gridfn.simpson_weights(n, L))


# ---------------------------------------------------------------------------
# Inversion
# ---------------------------------------------------------------------------

def _invert(p: GridFunction, forward, jacobian, label: str, max_iter, tol) -> InversionResult:
    _require_zero_mean(p)
    n = p.n_intervals
    weights = gridfn.simpson_weights(n, p.length)

    def embed(x: np.ndarray) -> GridFunction:
        values = np.zeros(n + 1)
        values[1:-1] = x
        return p.with_values(values)

    def residual(x: np.ndarray) -> np.ndarray:
        return forward(embed(x)).p.values - p.values

    def interior_jacobian(x: np.ndarray) -> np.ndarray:
        return jacobian(embed(x))[:, 1:-1]

    x, report = damped_newton(
        residual,
        interior_jacobian,
        np.zeros(n - 1),
        weights,
        max_iter=max_iter,
        tol=tol,
        label=label,
    )
    logger.info(
        f"{label}: {report.iterations} iterations, residual {report.final_residual:.3e}"
    )
    return InversionResult(q=embed(x), report=report)


def solve_G(
    p: GridFunction,
    q0: float,
    max_iter: Optional[int] = None,
    tol: Optional[float] = None,
) -> InversionResult:
    """Newton inversion of map_G with its report."""
    return _invert(
        p,
        lambda q: map_G(q, q0),
        lambda q: jacobian_G(q, q0),
        "invert_G",
        max_iter,
        tol,
    )


def solve_P(
    p: GridFunction,
    law: PotentialLaw,
    max_iter: Optional[int] = None,
    tol: Optional[float] = None,
) -> InversionResult:
    """Newton inversion of map_P with its report."""
    return _invert(
        p,
        lambda q: map_P(q, law),
        lambda q: jacobian_P(q, law),
        "invert_P",
        max_iter,
        tol,
    )


def invert_G(p: GridFunction, q0: float, **kwargs) -> GridFunction:
    """q in W10 with map_G(q, q0).p = p."""
    return solve_G(p, q0, **kwargs).q


def invert_P(p: GridFunction, law: PotentialLaw, **kwargs) -> GridFunction:
    """q in W10 with map_P(q, law).p = p."""
    return solve_P(p, law, **kwargs).q


# ---------------------------------------------------------------------------
# Estimates and Condition U
# ---------------------------------------------------------------------------

def _l2_sq(f: GridFunction, values: np.ndarray) -> float:
    return gridfn.integrate(f.with_values(values**2))


def norm_bounds(q: GridFunction, q0: float) -> NormBounds:
    """
    Norms for the a-priori estimates of G, with 4th-order derivatives.

    upper_bound_sq = ||q'||^2 + ||q^2||^2 + 4 q0^2 ||q||^2 + 4 q0 (q^3, 1)
    identity_rhs_sq = upper_bound_sq - c0^2, c0 = int (q^2 + 2 q0 q)
    """
    dq = gridfn.differentiate(q, order=4).values
    p = map_G(q, q0, order=4).p
    c0 = gridfn.integrate(q.with_values(q.values**2 + 2.0 * q0 * q.values))
    upper = (
        _l2_sq(q, dq)
        + _l2_sq(q, q.values**2)
        + 4.0 * q0**2 * _l2_sq(q, q.values)
        + 4.0 * q0 * gridfn.integrate(q.with_values(q.values**3))
    )
    return NormBounds(
        dq_norm=float(np.sqrt(_l2_sq(q, dq))),
        p_norm=float(np.sqrt(_l2_sq(q, p.values))),
        upper_bound_sq=upper,
        identity_rhs_sq=upper - c0**2,
        c0=c0,
    )


def norm_bounds_P(q: GridFunction, law: PotentialLaw) -> PNormBounds:
    """||q'||^2 <= ||p||^2 <= ||q'||^2 + 2||q^2||^2 + 2||u||^2 - c0^2 for p = P(q)."""
    dq = gridfn.differentiate(q, order=4).values
    image = map_P(q, law, order=4)
    u = law.u(gridfn.antiderivative(q).values)
    return PNormBounds(
        dq_norm_sq=_l2_sq(q, dq),
        p_norm_sq=_l2_sq(q, image.p.values),
        upper_bound_sq=_l2_sq(q, dq) + 2.0 * _l2_sq(q, q.values**2) + 2.0 * _l2_sq(q, u) - image.c0**2,
        c0=image.c0,
    )


def condition_u_check(
    law: PotentialLaw,
    t_range: Tuple[float, float] = (-5.0, 5.0),
    samples: int = 2001,
) -> bool:
    """True iff u'(t) <= 1e-12 on samples of t_range."""
    t = np.linspace(t_range[0], t_range[1], samples)
    ok = bool(np.all(law.du(t) <= 1e-12))
    if not ok:
        logger.info(f"Condition U fails for {law.kind} law on {t_range}")
    return ok
