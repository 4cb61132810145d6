"""
Surface Geometry
Profile <-> logarithmic-derivative conversions, arclength normalization,
embedding recovery and the Gaussian-curvature mapping
"""
import logging
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import PchipInterpolator

from app.core.config import settings
from app.core.exceptions import FitFailed, MembershipViolation, NonpositiveRadius, SlopeTooSteep
from app.models.grid import GridFunction
from app.models.riccati import CurvatureData
from app.models.surface import EmbeddedSurface, SurfaceProfile
from app.services import gridfn, riccati

logger = logging.getLogger(__name__)


def _require_positive(r: GridFunction, name: str = "r") -> None:
    if np.any(r.values <= 0):
        k = int(np.argmax(r.values <= 0))
        raise NonpositiveRadius(f"{name}(x_{k}) = {r.values[k]:g} is not positive")


def _cumulative_to(values: np.ndarray, h: float, total: float) -> np.ndarray:
    """Cumulative integral rescaled so its last node equals total."""
    nodes = cumulative_simpson(values, dx=h, initial=0.0)
    return nodes * (total / nodes[-1])


# ---------------------------------------------------------------------------
# Profile conversions
# ---------------------------------------------------------------------------

def log_density(profile: SurfaceProfile) -> GridFunction:
    """Q(x) = int_0^x (q0 + q), so rho = exp(Q) and r = r0 exp(2Q/m)."""
    return gridfn.antiderivative(profile.q.with_values(profile.q0 + profile.q.values))


def radius_from_q(profile: SurfaceProfile) -> GridFunction:
    """r(x_k) = r0 exp(2 Q(x_k) / m)"""
    Q = log_density(profile)
    return Q.with_values(profile.r0 * np.exp(2.0 * Q.values / profile.m))


def q_from_radius(r: GridFunction, m: int) -> Tuple[float, GridFunction, float]:
    """
    Split (log rho)' into q0 + q with rho = r^(m/2).

    q0 takes the whole slope at x = 0 (one-sided 4th-order stencil); q(1) = 0 is not
    enforced.

    Returns:
        (q0, q, r0)
    """
    _require_positive(r)
    log_rho = r.with_values(0.5 * m * np.log(r.values))
    slope = gridfn.differentiate(log_rho, order=4).values
    q0 = float(slope[0])
    q = r.with_values(slope - q0)
    if abs(q.values[-1]) > settings.MEMBERSHIP_TOL:
        logger.info(f"q_from_radius: q(1) = {q.values[-1]:.3e}, profile outside W10")
    return q0, q, float(r.values[0])


def profile_from_radius(r: GridFunction, m: int) -> SurfaceProfile:
    q0, q, r0 = q_from_radius(r, m)
    return SurfaceProfile(m=m, r0=r0, q0=q0, q=q)


# ---------------------------------------------------------------------------
# Embedding
# ---------------------------------------------------------------------------

def arclength_normalize(f: GridFunction, x0: Optional[float] = None) -> Tuple[GridFunction, float]:
    """
    Reparametrize the profile graph f on [0, x0] by arclength.

    Args:
        f: Profile f(x) sampled on [0, x0]
        x0: Interval length (defaults to f.length)

    Returns:
        (r, t0) with r(t) = f(x(t)) on a uniform grid over [0, t0]
    """
    if x0 is not None and not np.isclose(x0, f.length):
        f = f.rescaled(x0)
    _require_positive(f, "f")
    df = gridfn.differentiate(f, order=4).values
    speed = f.with_values(np.sqrt(1.0 + df**2))
    t0 = gridfn.integrate(speed)
    t_nodes = _cumulative_to(speed.values, f.h, t0)

    t_grid = np.linspace(0.0, t0, f.n_intervals + 1)
    r = GridFunction(n=f.n_intervals, values=PchipInterpolator(t_nodes, f.values)(t_grid), length=t0)

    slope = np.max(np.abs(gridfn.differentiate(r).values))
    if slope >= 1.0:
        raise SlopeTooSteep(f"arclength profile has |r'| = {slope:.6f} >= 1")
    logger.debug(f"arclength_normalize: x0={f.length:g} -> t0={t0:.10f}")
    return r, t0


def recover_embedding(r: GridFunction) -> EmbeddedSurface:
    """
    Embed the arclength profile r(t) as a graph f(x) with dx/dt = sqrt(1 - r'^2).

    Raises:
        SlopeTooSteep: |r'| >= 1 - SLOPE_MARGIN somewhere
    """
    _require_positive(r)
    dr = gridfn.differentiate(r, order=4).values
    steepest = float(np.max(np.abs(dr)))
    if steepest >= 1.0 - settings.SLOPE_MARGIN:
        k = int(np.argmax(np.abs(dr)))
        raise SlopeTooSteep(f"|r'({r.x[k]:.4f})| = {steepest:.6f} >= 1, not a graph over the axis")

    speed = r.with_values(np.sqrt(1.0 - dr**2))
    x0 = gridfn.integrate(speed)
    x_nodes = _cumulative_to(speed.values, r.h, x0)

    x_grid = np.linspace(0.0, x0, r.n_intervals + 1)
    f = PchipInterpolator(x_nodes, r.values)(x_grid)
    t = PchipInterpolator(x_nodes, r.x)(x_grid)
    logger.debug(f"recover_embedding: t0={r.length:g} -> x0={x0:.10f}")
    return EmbeddedSurface(
        x0=x0,
        f_samples=GridFunction(n=r.n_intervals, values=f, length=x0),
        t_of_x=GridFunction(n=r.n_intervals, values=t, length=x0),
    )


def estimate_t0(mu: np.ndarray, index_origin: int = 1) -> Tuple[float, float]:
    """
    Fit mu_n ~ (n pi / t0)^2 + c over the top half of the supplied modes.

    Args:
        mu: Non-decreasing eigenvalues, entry k belonging to index index_origin + k
        index_origin: 1 for Dirichlet data

    Returns:
        (t0, c)
    """
    mu = np.asarray(mu, dtype=float)
    if mu.size < 8:
        raise ValueError(f"estimate_t0 needs at least 8 eigenvalues, got {mu.size}")
    if np.any(np.diff(mu) < 0):
        raise ValueError("eigenvalues must be sorted non-decreasing")
    n = np.arange(mu.size, dtype=float) + index_origin
    top = slice(mu.size // 2, None)
    A = np.column_stack([n[top] ** 2, np.ones_like(n[top])])
    (lead, c), *_ = np.linalg.lstsq(A, mu[top], rcond=None)
    # flat or falling top half
    if lead * n[-1] ** 2 <= 1e-12 * np.max(np.abs(mu[top])):
        raise FitFailed(f"leading coefficient {lead:g} is not positive")
    return float(np.pi / np.sqrt(lead)), float(c)


# ---------------------------------------------------------------------------
# Curvature
# ---------------------------------------------------------------------------

def gaussian_curvature(r: GridFunction) -> GridFunction:
    """K = -r'' / r (m = 1)"""
    if r.n_intervals < 8:
        raise ValueError("gaussian_curvature needs at least 8 intervals")
    _require_positive(r)
    return r.with_values(-gridfn.second_derivative(r).values / r.values)


def curvature_from_q(q: GridFunction, q0: float) -> GridFunction:
    """K = -2 q' - 4 (q0 + q)^2"""
    return q.with_values(-2.0 * gridfn.differentiate(q).values - 4.0 * (q0 + q.values) ** 2)


def curvature_map_G(q: GridFunction, q0: float) -> CurvatureData:
    """
    xi = 2q' + 4(q0 + q)^2 - 4 q0^2 - K0 with K0 = 4 int (2 q0 q + q^2),
    so that K = -xi - K0 - 4 q0^2 and xi has zero mean.
    """
    image = riccati.map_G(q.with_values(2.0 * q.values), 2.0 * q0)
    return CurvatureData(xi=image.p, K0=image.c0)


def curvature_invert(xi: GridFunction, q0: float, **kwargs) -> GridFunction:
    """q in W10 with curvature_map_G(q, q0).xi = xi."""
    mean = gridfn.integrate(xi)
    if abs(mean) > 1e-6:
        raise MembershipViolation(f"xi must have zero mean, got {mean:.3e}")
    v = riccati.invert_G(xi, 2.0 * q0, **kwargs)
    return v.with_values(0.5 * v.values)


def surface_from_curvature(K: GridFunction, q0: float, r0: float = 1.0) -> Tuple[SurfaceProfile, float]:
    """
    Profile (m = 1) with Gaussian curvature K.

    The mean of K must equal -K0 - 4 q0^2 for the recovered q; a mismatch
    means K is not realizable with this q0 and is logged.

    Returns:
        (profile, K0)
    """
    xi = K.with_values(-(K.values - gridfn.integrate(K)))
    q = curvature_invert(xi, q0)
    K0 = curvature_map_G(q, q0).K0
    mismatch = gridfn.integrate(K) + K0 + 4.0 * q0**2
    if abs(mismatch) > 1e-6:
        logger.warning(f"surface_from_curvature: mean curvature mismatch {mismatch:.3e}")
    return SurfaceProfile(m=1, r0=r0, q0=q0, q=q), K0
