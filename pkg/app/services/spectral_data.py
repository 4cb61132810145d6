"""
Spectral Data
Baselines, remainder decomposition, sequence-space checks, the product
function w(lambda) of Mixed data and the b-recovery identity
"""
import logging
from typing import Optional, Union

import numpy as np

from app.core.config import settings
from app.core.exceptions import PoleHit
from app.models.spectral import BIdentityEstimate, Dirichlet, Mixed, Robin, SLProblem, SpectralData
from app.models.surface import SurfaceProfile
from app.services import gridfn

logger = logging.getLogger(__name__)

POLE_TOL = 1e-9


# ---------------------------------------------------------------------------
# Baselines and decomposition
# ---------------------------------------------------------------------------

def baseline_mu0(bc: Union[Dirichlet, Mixed, Robin], n: int) -> float:
    """
    Eigenvalue of the flat problem with the same boundary constants.

    Dirichlet: (n pi)^2, n >= 1
    Mixed(b):  pi^2 (n + 1/2)^2 + 2b, n >= 0
    Robin(a, b): (n pi)^2 + 2(a + b), n >= 0
    """
    if n < bc.index_origin:
        raise ValueError(f"{bc} eigenvalues are indexed from {bc.index_origin}, got n={n}")
    if isinstance(bc, Mixed):
        return float(np.pi**2 * (n + 0.5) ** 2 + 2.0 * bc.b)
    if isinstance(bc, Robin):
        return float((n * np.pi) ** 2 + 2.0 * (bc.a + bc.b))
    return float((n * np.pi) ** 2)


def baselines(bc: Union[Dirichlet, Mixed, Robin], n_modes: int) -> np.ndarray:
    """baseline_mu0 for the first n_modes indices of bc."""
    return np.array([baseline_mu0(bc, bc.index_origin + k) for k in range(n_modes)])


def c0_from_profile(profile: SurfaceProfile, E: float = 0.0) -> float:
    """c0 = int ((q0 + q)^2 + E / r^2) dx"""
    from app.services.geometry import radius_from_q

    r = radius_from_q(profile).values
    integrand = (profile.q0 + profile.q.values) ** 2 + E / r**2
    return gridfn.integrate(profile.q.with_values(integrand))


def decompose(
    mu: np.ndarray,
    bc: Union[Dirichlet, Mixed, Robin],
    c0: float,
    norming: Optional[np.ndarray] = None,
) -> SpectralData:
    """
    Split mu_n = baseline_n + c0 + tilde_mu_n.

    Args:
        mu: Sorted eigenvalues, entry k for index bc.index_origin + k
        bc: Boundary condition the eigenvalues belong to
        c0: Constant shift
        norming: Optional norming constants aligned with mu

    Returns:
        SpectralData
    """
    mu = np.asarray(mu, dtype=float)
    base = baselines(bc, mu.size)
    tilde = mu - (base + c0)
    return SpectralData(
        bc=bc,
        mu=mu,
        tilde_mu=tilde,
        c0=float(c0),
        norming=np.zeros(0) if norming is None else np.asarray(norming, dtype=float),
        baseline=base,
    )


def m1_check(h: np.ndarray, baseline: np.ndarray) -> bool:
    """True iff baseline_n + h_n is strictly increasing over the supplied prefix."""
    h = np.asarray(h, dtype=float)
    baseline = np.asarray(baseline, dtype=float)
    if h.shape != baseline.shape:
        raise ValueError("h and baseline must have the same length")
    return bool(np.all(np.diff(baseline + h) > 0))


def l2alpha_norm(h: np.ndarray, alpha: float) -> float:
    """Squared weighted norm 2 sum (2 pi n)^(2 alpha) |h_n|^2, n counted from 1."""
    h = np.asarray(h, dtype=float)
    n = np.arange(1, h.size + 1, dtype=float)
    return float(2.0 * np.sum((2.0 * np.pi * n) ** (2.0 * alpha) * h**2))


# ---------------------------------------------------------------------------
# Product function
# ---------------------------------------------------------------------------

def _cosine_nodes(n: np.ndarray) -> np.ndarray:
    """Zeros pi^2 (n + 1/2)^2 of cos sqrt(lambda)"""
    return np.pi**2 * (n + 0.5) ** 2


def _cosine_quotient(lam: complex, j: int) -> complex:
    """cos(sqrt(lam)) / (lam - nu_j), regular at lam = nu_j."""
    A = np.sqrt(complex(lam))
    B = np.pi * (j + 0.5)
    s = 0.5 * (A + B)
    d = 0.5 * (A - B)
    return -(np.sin(s) / (2.0 * s)) * np.sinc(d / np.pi)


def _require_mixed(data: SpectralData) -> float:
    if not isinstance(data.bc, Mixed):
        raise ValueError(f"w(lambda) is defined for Mixed data, got {data.bc}")
    return data.bc.b


def _tail_factor(lam: complex, n_trunc: int, shift: float, tail_terms: int) -> complex:
    """exp(-shift * sum_{n >= n_trunc} 1 / (lam - nu_n)) with an integral remainder."""
    if shift == 0.0:
        return 1.0 + 0.0j
    n = np.arange(n_trunc, n_trunc + tail_terms)
    nodes = _cosine_nodes(n)
    gap = lam - nodes
    if np.any(np.abs(gap) < POLE_TOL):
        k = int(n[np.argmin(np.abs(gap))])
        raise PoleHit(f"lambda={lam} coincides with tail node nu_{k}")
    total = np.sum(1.0 / gap) - 1.0 / (np.pi**2 * (n_trunc + tail_terms))
    return np.exp(-shift * total)


def _window(data: SpectralData, n_trunc: Optional[int]) -> int:
    n_trunc = data.n_modes if n_trunc is None else int(n_trunc)
    if n_trunc < 0 or n_trunc > data.n_modes:
        raise ValueError(f"n_trunc={n_trunc} outside [0, {data.n_modes}]")
    return n_trunc


def w_eval(
    lam: complex,
    data: SpectralData,
    n_trunc: Optional[int] = None,
    tail_terms: Optional[int] = None,
) -> complex:
    """
    w(lambda) = cos(sqrt(lambda)) prod_n (lambda - mu_n) / (lambda - nu_n)
    with nu_n = pi^2 (n + 1/2)^2, truncated at n_trunc.

    The factors n >= n_trunc are modeled by mu_n - nu_n ~ c0 + 2b and summed
    in exponential form.

    Args:
        lam: Complex evaluation point
        data: Mixed spectral data
        n_trunc: Number of data eigenvalues in the explicit product
        tail_terms: Explicit terms of the tail sum

    Returns:
        Complex value of w
    """
    b = _require_mixed(data)
    N = _window(data, n_trunc)
    tail_terms = tail_terms or settings.W_TAIL_TERMS
    lam = complex(lam)
    tail = _tail_factor(lam, N, data.c0 + 2.0 * b, tail_terms)
    if N == 0:
        return complex(np.cos(np.sqrt(lam)) * tail)

    n = np.arange(N)
    nodes = _cosine_nodes(n)
    j = int(np.argmin(np.abs(lam - nodes)))
    factors = (lam - data.mu[:N]) / np.where(n == j, 1.0, lam - nodes)
    return complex(_cosine_quotient(lam, j) * np.prod(factors) * tail)


def w_dlambda(
    lam: float,
    data: SpectralData,
    n_trunc: Optional[int] = None,
    tail_terms: Optional[int] = None,
) -> float:
    """
    dw/dlambda at an eigenvalue mu_k of the data, with the vanishing factor
    differentiated analytically.
    """
    b = _require_mixed(data)
    N = _window(data, n_trunc)
    tail_terms = tail_terms or settings.W_TAIL_TERMS
    k = int(np.argmin(np.abs(data.mu[:N] - lam))) if N else -1
    if N == 0 or not np.isclose(data.mu[k], lam, rtol=1e-12, atol=0.0):
        raise ValueError(f"lambda={lam} is not an eigenvalue inside the truncation window")

    lam = float(data.mu[k])
    n = np.arange(N)
    others = n != k
    ratio = (lam - data.mu[:N][others]) / (lam - _cosine_nodes(n[others]))
    tail = _tail_factor(complex(lam), N, data.c0 + 2.0 * b, tail_terms)
    return float((_cosine_quotient(lam, k) * np.prod(ratio) * tail).real)


def b_from_identity(data: SpectralData, n_terms: int, tail_terms: Optional[int] = None) -> BIdentityEstimate:
    """
    Partial sum of sum_n (2 - exp(chi_n) / |dw/dlambda(mu_n)|).

    The sum recovers the right boundary constant of the Schroedinger picture,
    b - q0 - q(1), which is b itself for q0 = 0 and q in W10.

    Returns:
        BIdentityEstimate with the partial sum and the magnitude of its last term
    """
    _require_mixed(data)
    if not data.has_norming:
        raise ValueError("b_from_identity needs norming constants")
    if n_terms > data.n_modes:
        raise ValueError(f"only {data.n_modes} modes available, {n_terms} requested")

    terms = []
    for k in range(n_terms):
        dw = w_dlambda(data.mu[k], data, tail_terms=tail_terms)
        terms.append(2.0 - np.exp(data.norming[k]) / abs(dw))

    estimate = float(np.sum(terms)) if terms else 0.0
    last = float(abs(terms[-1])) if terms else 0.0
    logger.info(f"b_from_identity: {n_terms} terms, estimate {estimate:.8f}, last term {last:.2e}")
    return BIdentityEstimate(estimate=estimate, last_term=last, n_terms=n_terms)


# ---------------------------------------------------------------------------
# Forward map
# ---------------------------------------------------------------------------

def forward(
    profile: SurfaceProfile,
    E: float,
    bc: Union[Dirichlet, Mixed, Robin],
    n_modes: int,
) -> SpectralData:
    """
    Eigenvalues and norming constants of -Delta_nu, decomposed against the baselines.

    Args:
        profile: Surface profile
        E: Fiber eigenvalue
        bc: Boundary condition
        n_modes: Number of modes

    Returns:
        SpectralData with norming constants
    """
    from app.services import sl_solver

    results = sl_solver.spectrum(SLProblem(profile=profile, E=E, bc=bc), n_modes)
    mu = np.array([r.mu for r in results])
    norming = np.array([r.norming_constant for r in results])
    data = decompose(mu, bc, c0_from_profile(profile, E), norming)
    logger.info(
        f"forward: {n_modes} modes for {bc}, c0={data.c0:.8f}, "
        f"|tilde_mu|_l2^2={l2alpha_norm(data.tilde_mu, 0.0):.3e}"
    )
    return data


def perturb(data: SpectralData, eta: float, seed: int = 0) -> SpectralData:
    """Relative Gaussian noise of level eta on mu and the norming constants."""
    if eta < 0:
        raise ValueError("noise level must be non-negative")
    rng = np.random.default_rng(seed)
    mu = data.mu * (1.0 + eta * rng.standard_normal(data.n_modes))
    norming = None
    if data.has_norming:
        norming = data.norming * (1.0 + eta * rng.standard_normal(data.n_modes))
    return decompose(mu, data.bc, data.c0, norming)
