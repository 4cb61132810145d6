"""
Sturm-Liouville Solver
Forward spectral problem for the per-mode operator
    -Delta_nu = -(1/rho^2) d/dx (rho^2 d/dx) + E / r^2,   rho = r^(m/2)
under Dirichlet, Mixed and Robin conditions, solved by shooting on its
Schroedinger form. Norming constants use rho(0) = 1.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal

from app.core.config import settings
from app.core.exceptions import DegenerateBoundaryValue
from app.models.grid import GridFunction
from app.models.spectral import (
    Dirichlet,
    EigenResult,
    Mixed,
    Robin,
    SchrodingerForm,
    SLProblem,
    SurfaceEigenvalue,
    SurfaceSpectrum,
)
from app.models.surface import SurfaceProfile
from app.services import gridfn
from app.services.geometry import log_density
from app.services.shooting import ShootingProblem, ShootingSolution, find_eigenvalues, propagate

logger = logging.getLogger(__name__)


class BoundaryValues(NamedTuple):
    """Boundary data of an eigenfunction f of the weighted problem"""

    f0: np.ndarray
    df0: np.ndarray
    f1: np.ndarray
    df1: np.ndarray
    rho1: float


class _Spectrum(NamedTuple):
    indices: np.ndarray
    mu: np.ndarray
    norming: np.ndarray
    coarse: ShootingSolution


# ---------------------------------------------------------------------------
# Schroedinger form
# ---------------------------------------------------------------------------

def _fiber_potential(prob: SLProblem, Q: np.ndarray) -> np.ndarray:
    """E / r^2 with r = r0 exp(2Q/m)"""
    profile = prob.profile
    return prob.E / profile.r0**2 * np.exp(-4.0 * Q / profile.m)


def to_schrodinger(prob: SLProblem) -> SchrodingerForm:
    """
    Unitary reduction y = rho f of the weighted problem to -y'' + p y = sigma y.

    p = Q'' + Q'^2 + E/r^2 - c0 with c0 its mean, so mu = sigma + c0.
    Boundary slopes shift by Q'(0) on the left and -Q'(1) on the right.
    """
    profile = prob.profile
    Q = log_density(profile).values
    slope = profile.q0 + profile.q.values
    dq = gridfn.differentiate(profile.q, order=4).values
    V = dq + slope**2 + _fiber_potential(prob, Q)
    c0 = gridfn.integrate(profile.q.with_values(V))

    bc = prob.bc
    if isinstance(bc, Robin):
        mapped = Robin(a=bc.a + slope[0], b=bc.b - slope[-1])
    elif isinstance(bc, Mixed):
        mapped = Mixed(b=bc.b - slope[-1])
    else:
        mapped = Dirichlet()
    return SchrodingerForm(p=profile.q.with_values(V - c0), c0=c0, bc=mapped)


def _schrodinger_problem(prob: SLProblem, form: SchrodingerForm) -> ShootingProblem:
    V = form.p.values + form.c0
    spline = CubicSpline(form.p.x, V)
    return ShootingProblem(
        potential=spline,
        weight=np.ones_like,
        left_slope=form.bc.left_slope,
        right_slope=form.bc.right_slope,
        n_intervals=form.p.n_intervals,
        potential_floor=float(V.min()),
    )


def _weighted_problem(prob: SLProblem) -> ShootingProblem:
    profile = prob.profile
    Q = log_density(profile)
    spline = CubicSpline(Q.x, Q.values)
    u = _fiber_potential(prob, Q.values)
    return ShootingProblem(
        potential=lambda x: _fiber_potential(prob, spline(x)),
        weight=lambda x: np.exp(2.0 * spline(x)),
        left_slope=prob.bc.left_slope,
        right_slope=prob.bc.right_slope,
        n_intervals=profile.n_intervals,
        potential_floor=float(u.min()),
    )


# ---------------------------------------------------------------------------
# Norming constants
# ---------------------------------------------------------------------------

def _norming_from_boundary(bc, values: BoundaryValues) -> np.ndarray:
    if isinstance(bc, Robin):
        numerator, denominator = values.rho1 * values.f1, values.f0
    elif isinstance(bc, Mixed):
        numerator, denominator = values.rho1 * values.f1, values.df0
    else:
        numerator, denominator = values.rho1 * values.df1, values.df0
    if np.any(np.abs(denominator) < settings.DEGENERATE_TOL):
        raise DegenerateBoundaryValue("norming constant denominator vanished")
    return np.log(np.abs(numerator / denominator))


def _schrodinger_boundary(profile: SurfaceProfile, sol: ShootingSolution) -> BoundaryValues:
    Q1 = float(log_density(profile).values[-1])
    rho1 = float(np.exp(Q1))
    slope0 = profile.q0 + profile.q.values[0]
    slope1 = profile.q0 + profile.q.values[-1]
    y0, dy0 = sol.start
    y1, dy1 = sol.end_value, sol.end_flux
    n = sol.lam.size
    return BoundaryValues(
        f0=np.full(n, y0),
        df0=np.full(n, dy0 - slope0 * y0),
        f1=y1 / rho1,
        df1=(dy1 - slope1 * y1) / rho1,
        rho1=rho1,
    )


def _weighted_boundary(profile: SurfaceProfile, sol: ShootingSolution) -> BoundaryValues:
    Q1 = float(log_density(profile).values[-1])
    rho1 = float(np.exp(Q1))
    f0, g0 = sol.start
    n = sol.lam.size
    return BoundaryValues(
        f0=np.full(n, f0),
        df0=np.full(n, g0),
        f1=sol.end_value,
        df1=sol.end_flux / rho1**2,
        rho1=rho1,
    )


# ---------------------------------------------------------------------------
# Core solve
# ---------------------------------------------------------------------------

def _check_indices(bc, indices: np.ndarray) -> None:
    if indices.size and indices.min() < bc.index_origin:
        raise ValueError(f"{bc} eigenvalues are indexed from {bc.index_origin}")
    if indices.size and indices.max() - bc.index_origin + 1 > settings.N_MAX_LIMIT:
        raise ValueError(f"at most {settings.N_MAX_LIMIT} eigenvalues are supported")


def _guesses(prob: SLProblem, indices: np.ndarray, c0: float) -> np.ndarray:
    from app.services.spectral_data import baseline_mu0

    return np.array([baseline_mu0(prob.bc, int(n)) for n in indices]) + c0


def _solve(prob: SLProblem, indices: np.ndarray, weighted: bool = False) -> _Spectrum:
    indices = np.asarray(indices, dtype=int)
    _check_indices(prob.bc, indices)
    form = to_schrodinger(prob)
    if weighted:
        problem = _weighted_problem(prob)
        boundary = _weighted_boundary
    else:
        problem = _schrodinger_problem(prob, form)
        boundary = _schrodinger_boundary

    ks = indices - prob.bc.index_origin
    pad = abs(form.c0) + settings.SHOOTING_BRACKET_PAD + float(np.max(np.abs(form.p.values)))
    coarse = find_eigenvalues(problem, ks, _guesses(prob, indices, form.c0), pad)
    norming = _norming_from_boundary(prob.bc, boundary(prob.profile, coarse))
    mu = coarse.lam

    if settings.SHOOTING_RICHARDSON:
        fine = find_eigenvalues(
            problem,
            ks,
            coarse.lam,
            1e-3 * (1.0 + np.abs(coarse.lam)),
            n_cells=2 * coarse.n_cells,
        )
        fine_norming = _norming_from_boundary(prob.bc, boundary(prob.profile, fine))
        mu = (4.0 * fine.lam - coarse.lam) / 3.0
        norming = (4.0 * fine_norming - norming) / 3.0

    logger.debug(
        f"solved {indices.size} eigenvalues ({'weighted' if weighted else 'schrodinger'}, "
        f"{coarse.n_cells} cells, {prob.bc})"
    )
    return _Spectrum(indices=indices, mu=mu, norming=norming, coarse=coarse)


def _index_range(prob: SLProblem, n_max: int) -> np.ndarray:
    if n_max < 1:
        raise ValueError("n_max must be positive")
    if n_max > settings.N_MAX_LIMIT:
        raise ValueError(f"n_max={n_max} exceeds the supported {settings.N_MAX_LIMIT}")
    return np.arange(n_max) + prob.bc.index_origin


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def eigenvalues(prob: SLProblem, n_max: int) -> np.ndarray:
    """
    First n_max eigenvalues by shooting on the Schroedinger form.

    Args:
        prob: Sturm-Liouville problem
        n_max: Number of eigenvalues (at most N_MAX_LIMIT)

    Returns:
        Increasing eigenvalues, entry k for index bc.index_origin + k
    """
    spec = _solve(prob, _index_range(prob, n_max))
    logger.info(f"eigenvalues: {n_max} modes for {prob.bc}, mu_first={spec.mu[0]:.10g}")
    return spec.mu


def spectrum(prob: SLProblem, n_max: int) -> List[EigenResult]:
    """Eigenvalues with norming constants, without eigenfunctions."""
    spec = _solve(prob, _index_range(prob, n_max))
    return [
        EigenResult(index=int(n), mu=float(mu), norming_constant=float(kappa))
        for n, mu, kappa in zip(spec.indices, spec.mu, spec.norming)
    ]


def weighted_spectrum(prob: SLProblem, n_max: int) -> List[EigenResult]:
    """Eigenvalues and norming constants by shooting directly on the weighted form."""
    spec = _solve(prob, _index_range(prob, n_max), weighted=True)
    return [
        EigenResult(index=int(n), mu=float(mu), norming_constant=float(kappa))
        for n, mu, kappa in zip(spec.indices, spec.mu, spec.norming)
    ]


def norming_constant(prob: SLProblem, n: int) -> float:
    """kappa_n (Dirichlet), chi_n (Mixed) or phi_n (Robin) for index n."""
    return float(_solve(prob, np.array([n])).norming[0])


def eigenfunction(prob: SLProblem, n: int) -> EigenResult:
    """
    n-th eigenpair with f normalized in L2(r^m dx).

    Sign: f'(0) > 0 for Dirichlet/Mixed, f(0) > 0 for Robin.
    """
    spec = _solve(prob, np.array([n]))
    profile = prob.profile
    form = to_schrodinger(prob)
    problem = _schrodinger_problem(prob, form)
    n_cells = spec.coarse.n_cells
    y, g = propagate(problem, spec.coarse.lam, n_cells)
    stride = n_cells // profile.n_intervals
    y = y[0, ::stride]
    g0 = g[0, 0]

    Q = log_density(profile).values
    f = y * np.exp(-Q)
    mass = profile.r0**profile.m * gridfn.integrate(profile.q.with_values(y**2))
    f = f / np.sqrt(mass)

    leading = f[0] if isinstance(prob.bc, Robin) else g0 - (profile.q0 + profile.q.values[0]) * y[0]
    if leading < 0:
        f = -f

    return EigenResult(
        index=int(n),
        mu=float(spec.mu[0]),
        norming_constant=float(spec.norming[0]),
        eigenfunction=profile.q.with_values(f),
    )


def eigenfunctions(prob: SLProblem, indices: Sequence[int], max_workers: Optional[int] = None) -> List[EigenResult]:
    """Independent eigenfunction solves, run concurrently."""
    with ThreadPoolExecutor(max_workers=max_workers or settings.MAX_WORKERS) as pool:
        return list(pool.map(lambda n: eigenfunction(prob, n), indices))


def sign_changes(f: GridFunction) -> int:
    """Sign changes of f over the interior nodes (zeros skipped)."""
    interior = f.values[1:-1]
    nonzero = interior[np.abs(interior) > 1e-14 * max(1.0, np.max(np.abs(interior)))]
    return int(np.count_nonzero(np.signbit(nonzero[1:]) != np.signbit(nonzero[:-1])))


# ---------------------------------------------------------------------------
# Finite-difference oracle
# ---------------------------------------------------------------------------

def _oracle_once(prob: SLProblem, n_grid: int, n_max: int) -> np.ndarray:
    profile = prob.profile
    Q = log_density(profile)
    spline = CubicSpline(Q.x, Q.values)
    h = 1.0 / n_grid
    x = np.linspace(0.0, 1.0, n_grid + 1)
    w_node = np.exp(2.0 * spline(x))
    w_half = np.exp(2.0 * spline(x[:-1] + 0.5 * h))
    u = _fiber_potential(prob, spline(x))

    diag = np.zeros(n_grid + 1)
    diag[:-1] += w_half / h
    diag[1:] += w_half / h
    diag += h * w_node * u
    off = -w_half / h
    mass = h * w_node

    left, right = prob.bc.left_slope, prob.bc.right_slope
    mass[0] *= 0.5
    mass[-1] *= 0.5
    diag[0] -= 0.5 * h * w_node[0] * u[0]
    diag[-1] -= 0.5 * h * w_node[-1] * u[-1]
    if left is not None:
        diag[0] += w_node[0] * left
    if right is not None:
        diag[-1] += w_node[-1] * right

    lo = 1 if left is None else 0
    hi = n_grid if right is None else n_grid + 1
    diag, mass = diag[lo:hi], mass[lo:hi]
    off = off[lo:hi - 1]

    scale = 1.0 / np.sqrt(mass)
    d = diag * scale**2
    e = off * scale[:-1] * scale[1:]
    return eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, n_max - 1))


def oracle_matrix_eigen(prob: SLProblem, n_grid: int, n_max: int) -> np.ndarray:
    """
    Eigenvalues of the symmetric finite-difference discretization of the weighted
    form, Richardson-extrapolated from n_grid and n_grid / 2.
    """
    if n_grid > settings.ORACLE_GRID_LIMIT:
        raise ValueError(f"n_grid={n_grid} exceeds {settings.ORACLE_GRID_LIMIT}")
    if n_grid < 4 * n_max:
        raise ValueError("n_grid too small for the requested number of eigenvalues")
    fine = _oracle_once(prob, n_grid, n_max)
    coarse = _oracle_once(prob, n_grid // 2, n_max)
    return (4.0 * fine - coarse) / 3.0


# ---------------------------------------------------------------------------
# Full surface spectrum
# ---------------------------------------------------------------------------

def circle_fiber_eigenvalues(n_modes: int) -> List[float]:
    """Eigenvalues nu^2 of the unit circle with multiplicity: 0, 1, 1, 4, 4, ..."""
    values = [0.0]
    nu = 1
    while len(values) < n_modes:
        values.extend([float(nu * nu)] * 2)
        nu += 1
    return values[:n_modes]


def surface_spectrum(
    profile: SurfaceProfile,
    bc,
    fiber_eigenvalues: Sequence[float],
    n_per_mode: int,
) -> SurfaceSpectrum:
    """
    Spectrum of the Laplacian on the whole manifold as the union over fiber
    modes nu of the spectra of -Delta_nu with E = E_nu.
    """
    entries = []
    for mode, E in enumerate(fiber_eigenvalues):
        prob = SLProblem(profile=profile, E=E, bc=bc)
        for k, mu in enumerate(eigenvalues(prob, n_per_mode)):
            entries.append(
                SurfaceEigenvalue(mu=float(mu), mode=mode, index=k + bc.index_origin, fiber_eigenvalue=E)
            )
    entries.sort(key=lambda e: e.mu)
    return SurfaceSpectrum(entries=entries)
