"""
Inverse Spectral Solver
Reconstruction of q (hence the profile and the embedded surface) from truncated
spectral data by Gauss-Newton over a sine basis
"""
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from app.core.config import settings
from app.core.exceptions import HypothesisViolation, NoConvergence
from app.models.grid import GridFunction, SpaceTag
from app.models.inverse import (
    EndpointAnchor,
    ForwardSetup,
    InverseConfig,
    ReconstructionReport,
    RoundtripReport,
    SlopeAnchor,
)
from app.models.riccati import CurvatureData
from app.models.spectral import SpectralData
from app.models.surface import EmbeddedSurface, SurfaceProfile
from app.services import geometry, gridfn, spectral_data

logger = logging.getLogger(__name__)

# A stationary point is accepted when the residual is within this factor of tol
STALL_FACTOR = 1e3


def check_hypothesis(fixed: ForwardSetup) -> None:
    """Unique reconstruction needs q0 = 0 or E = 0."""
    if fixed.q0 != 0.0 and fixed.E > 0.0:
        raise HypothesisViolation(
            f"q0={fixed.q0:g} with E={fixed.E:g} > 0 is outside the uniquely solvable cases"
        )


def sine_basis(cfg: InverseConfig) -> np.ndarray:
    """
    Columns sin(k pi x), k = 1..M (full) or sin(2 j pi x), j = 1..M (symmetric)
    sampled on the cfg.grid_n grid.
    """
    x = np.linspace(0.0, 1.0, cfg.grid_n + 1)
    k = np.arange(1, cfg.basis_size + 1)
    freq = 2.0 * k if cfg.mode == "symmetric" else k.astype(float)
    basis = np.sin(np.pi * np.outer(x, freq))
    basis[[0, -1], :] = 0.0
    return basis


class _ForwardModel:
    """Coefficients -> stacked spectral residual against a fixed target"""

    def __init__(self, target: SpectralData, fixed: ForwardSetup, cfg: InverseConfig):
        self.target = target
        self.fixed = fixed
        self.cfg = cfg
        self.n_modes = cfg.n_modes
        self.basis = sine_basis(cfg)
        self.with_norming = cfg.mode == "full"
        self.n_solves = 0
        self._lock = threading.Lock()

    def q_of(self, coeffs: np.ndarray) -> GridFunction:
        return GridFunction(n=self.cfg.grid_n, values=self.basis @ coeffs)

    def profile_of(self, coeffs: np.ndarray) -> SurfaceProfile:
        return SurfaceProfile(m=self.fixed.m, r0=self.fixed.r0, q0=self.fixed.q0, q=self.q_of(coeffs))

    def residual(self, coeffs: np.ndarray) -> np.ndarray:
        with self._lock:
            self.n_solves += 1
        data = spectral_data.forward(self.profile_of(coeffs), self.fixed.E, self.target.bc, self.n_modes)
        N = self.n_modes
        parts = [data.tilde_mu - self.target.tilde_mu[:N]]
        if self.with_norming:
            parts.append(data.norming - self.target.norming[:N])
        return np.concatenate(parts)


def _fd_jacobian(
    residual: Callable[[np.ndarray], np.ndarray],
    coeffs: np.ndarray,
    r: np.ndarray,
    step: float,
    max_workers: int,
) -> np.ndarray:
    """Forward-difference Jacobian, one column per coefficient, columns in parallel."""

    def column(k: int) -> np.ndarray:
        shifted = coeffs.copy()
        shifted[k] += step
        return (residual(shifted) - r) / step

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        columns = list(pool.map(column, range(coeffs.size)))
    return np.column_stack(columns)


def _accept_stationary(res: float, tol: float, history: List[float]) -> None:
    """A stationary point within STALL_FACTOR * tol is kept, anything above it raises."""
    if res > STALL_FACTOR * tol:
        raise NoConvergence(f"reconstruction stalled at residual {res:.3e}", history)
    logger.info(f"reconstruct_q: residual floor {res:.3e} reached")


def _validate_target(target: SpectralData, fixed: ForwardSetup, cfg: InverseConfig) -> None:
    if target.bc != fixed.bc:
        raise ValueError(f"target data belongs to {target.bc}, setup specifies {fixed.bc}")
    if target.n_modes < cfg.n_modes:
        raise ValueError(f"target has {target.n_modes} modes, {cfg.n_modes} requested")
    if cfg.mode == "full" and not target.has_norming:
        raise ValueError("full reconstruction needs norming constants in the target")


def reconstruct_q(
    target: SpectralData,
    fixed: ForwardSetup,
    cfg: Optional[InverseConfig] = None,
) -> Tuple[GridFunction, ReconstructionReport]:
    """
    Recover q from the first cfg.n_modes eigenvalue remainders (and norming
    constants in full mode).

    Args:
        target: Spectral data to match
        fixed: q0, E, m, r0 and boundary condition held fixed
        cfg: Truncation, basis and iteration settings

    Returns:
        (q, report)

    Raises:
        HypothesisViolation: q0 != 0 together with E > 0
        NoConvergence: iteration budget exhausted or stalled above STALL_FACTOR * tol
    """
    cfg = cfg or InverseConfig()
    check_hypothesis(fixed)
    _validate_target(target, fixed, cfg)
    started = time.perf_counter()

    model = _ForwardModel(target, fixed, cfg)
    coeffs = np.zeros(cfg.basis_size)
    r = model.residual(coeffs)
    res = float(np.linalg.norm(r))
    history: List[float] = [res]
    iterations = 0
    logger.info(
        f"reconstruct_q: mode={cfg.mode}, N={cfg.n_modes}, M={cfg.basis_size}, "
        f"{target.bc}, initial residual {res:.3e}"
    )

    while res > cfg.tol:
        if iterations >= cfg.max_iter:
            logger.warning(f"reconstruct_q: no convergence after {cfg.max_iter} iterations")
            raise NoConvergence(
                f"reconstruction did not converge in {cfg.max_iter} iterations (residual {res:.3e})",
                history,
            )
        iterations += 1

        J = _fd_jacobian(model.residual, coeffs, r, cfg.fd_step, cfg.max_workers)
        delta, *_ = np.linalg.lstsq(J, -r, rcond=None)

        step = 1.0
        for _ in range(settings.NEWTON_MAX_HALVINGS + 1):
            trial = coeffs + step * delta
            r_trial = model.residual(trial)
            res_trial = float(np.linalg.norm(r_trial))
            if res_trial < res:
                break
            step *= 0.5
        else:
            _accept_stationary(res, cfg.tol, history)
            break

        coeffs, r, res = trial, r_trial, res_trial
        history.append(res)
        logger.debug(f"reconstruct_q: iter {iterations} residual {res:.3e} step {step:g}")

        if step * np.max(np.abs(delta)) <= settings.NEWTON_STEP_TOL * (1.0 + np.max(np.abs(coeffs))):
            if res > cfg.tol:
                _accept_stationary(res, cfg.tol, history)
            break

    runtime = time.perf_counter() - started
    report = ReconstructionReport(
        mode=cfg.mode,
        n_modes=cfg.n_modes,
        basis_size=cfg.basis_size,
        iterations=iterations,
        residual_history=history,
        final_residual=res,
        converged=res <= cfg.tol,
        stationary=res > cfg.tol,
        n_forward_solves=model.n_solves,
        runtime_s=runtime,
        coefficients=coeffs.tolist(),
        weighting=(
            "unweighted least squares over eigenvalue remainders and norming constants"
            if cfg.mode == "full"
            else "unweighted least squares over eigenvalue remainders"
        ),
    )
    logger.info(f"reconstruct_q: {iterations} iterations, residual {res:.3e}, {runtime:.2f}s")
    return model.q_of(coeffs), report


def anchored_q0(q: GridFunction, anchors: Union[SlopeAnchor, EndpointAnchor], m: int) -> float:
    """q0 given directly, or solved from log(r1 / r0) = (2 / m)(q0 + int q)."""
    if isinstance(anchors, EndpointAnchor):
        return float(0.5 * m * np.log(anchors.r1 / anchors.r0) - gridfn.integrate(q))
    return float(anchors.q0)


def reconstruct_surface(
    q: GridFunction,
    anchors: Union[SlopeAnchor, EndpointAnchor],
    m: int,
) -> Tuple[SurfaceProfile, EmbeddedSurface]:
    """
    Profile and embedded surface from q and either (r0, q0) or (r0, r1).

    With (r0, r1), q0 solves log(r1 / r0) = (2 / m)(q0 + int q).
    """
    profile = SurfaceProfile(m=m, r0=anchors.r0, q0=anchored_q0(q, anchors, m), q=q)
    surface = geometry.recover_embedding(geometry.radius_from_q(profile))
    return profile, surface


def roundtrip_report(
    q_true: GridFunction,
    fixed: ForwardSetup,
    cfg: Optional[InverseConfig] = None,
    noise: float = 0.0,
    seed: int = 0,
) -> RoundtripReport:
    """
    Forward-solve q_true, optionally add noise, reconstruct and report errors.

    Nonconvergence is reported, not raised.
    """
    cfg = cfg or InverseConfig()
    started = time.perf_counter()
    profile = SurfaceProfile(m=fixed.m, r0=fixed.r0, q0=fixed.q0, q=q_true)
    target = spectral_data.forward(profile, fixed.E, fixed.bc, cfg.n_modes)
    if noise > 0:
        target = spectral_data.perturb(target, noise, seed)

    try:
        q, report = reconstruct_q(target, fixed, cfg)
    except NoConvergence as exc:
        logger.warning(f"roundtrip (noise={noise:g}): {exc}")
        return RoundtripReport(
            noise=noise,
            seed=seed,
            converged=False,
            final_residual=exc.final_residual,
            runtime_s=time.perf_counter() - started,
            message=str(exc),
        )

    if q.n_intervals != q_true.n_intervals:
        q = GridFunction.sample(lambda x: np.interp(x, q.x, q.values), q_true.n_intervals)
    error = q.with_values(q.values - q_true.values)
    return RoundtripReport(
        noise=noise,
        seed=seed,
        converged=report.converged,
        h0_error=gridfn.norm(error, SpaceTag.h(0)),
        w10_error=gridfn.norm(error, SpaceTag.w10()),
        final_residual=report.final_residual,
        iterations=report.iterations,
        runtime_s=time.perf_counter() - started,
        message="ok" if report.converged else f"stationary at residual {report.final_residual:.3e}",
    )


# ---------------------------------------------------------------------------
# Curvature <-> spectral data
# ---------------------------------------------------------------------------

def _require_curve(fixed: ForwardSetup) -> None:
    if fixed.m != 1:
        raise ValueError(f"curvature maps are defined for m = 1, got m={fixed.m}")


def curvature_from_spectral_data(
    target: SpectralData,
    fixed: ForwardSetup,
    cfg: Optional[InverseConfig] = None,
) -> Tuple[CurvatureData, GridFunction]:
    """Reconstruct q from spectral data, then map it to (xi, K0)."""
    _require_curve(fixed)
    q, _ = reconstruct_q(target, fixed, cfg)
    return geometry.curvature_map_G(q, fixed.q0), q


def spectral_data_from_curvature(xi: GridFunction, fixed: ForwardSetup, n_modes: int) -> SpectralData:
    """Recover q from the normalized curvature xi, then forward-solve."""
    _require_curve(fixed)
    q = geometry.curvature_invert(xi, fixed.q0)
    profile = SurfaceProfile(m=1, r0=fixed.r0, q0=fixed.q0, q=q)
    return spectral_data.forward(profile, fixed.E, fixed.bc, n_modes)
