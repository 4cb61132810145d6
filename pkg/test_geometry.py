"""
Surface geometry tests
"""
import numpy as np
import pytest

from app.core.exceptions import FitFailed, MembershipViolation, NonpositiveRadius, SlopeTooSteep
from app.models import GridFunction, SpaceTag, SurfaceProfile
from app.services import geometry, gridfn
from conftest import random_w10, sine


# ---------------------------------------------------------------------------
# Profile conversions
# ---------------------------------------------------------------------------

def test_radius_from_constant_slope():
    profile = SurfaceProfile.flat(800, m=1, q0=0.3)
    r = geometry.radius_from_q(profile)
    assert r.values[-1] == pytest.approx(np.exp(0.6), abs=1e-8)
    assert np.allclose(r.values, np.exp(0.6 * r.x), atol=1e-8)


def test_radius_of_flat_profile_is_constant():
    r = geometry.radius_from_q(SurfaceProfile.flat(100, r0=2.5))
    assert np.allclose(r.values, 2.5, rtol=0, atol=1e-15)


def test_radius_full_period_returns_to_r0(q_sine):
    r = geometry.radius_from_q(SurfaceProfile(m=2, r0=1.0, q0=0.0, q=q_sine))
    assert r.values[-1] == pytest.approx(1.0, abs=1e-8)


def test_radius_endpoint_identity(rng):
    q = random_w10(rng, norm=0.5)
    profile = SurfaceProfile(m=3, r0=1.7, q0=-0.2, q=q)
    r = geometry.radius_from_q(profile)
    gap = np.log(r.values[-1] / profile.r0) - (2.0 / profile.m) * (profile.q0 + gridfn.integrate(q))
    assert abs(gap) <= 1e-9


def test_q_from_exponential_radius():
    r = GridFunction.sample(lambda x: np.exp(0.6 * x), 800)
    q0, q, r0 = geometry.q_from_radius(r, m=1)
    assert q0 == pytest.approx(0.3, abs=1e-9)
    assert np.max(np.abs(q.values)) <= 1e-6
    assert r0 == 1.0


def test_q_from_constant_radius():
    q0, q, r0 = geometry.q_from_radius(GridFunction.sample(lambda x: 2.0, 100), m=2)
    assert q0 == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(q.values, 0.0, atol=1e-12)
    assert r0 == 2.0


def test_radius_round_trip(q_sine):
    r = geometry.radius_from_q(SurfaceProfile(m=2, r0=1.0, q0=0.0, q=q_sine))
    profile = geometry.profile_from_radius(r, m=2)
    assert profile.q0 == pytest.approx(0.0, abs=1e-5)
    assert profile.r0 == 1.0
    assert np.max(np.abs(profile.q.values - q_sine.values)) <= 1e-5


def test_q_from_radius_rejects_nonpositive():
    r = GridFunction.sample(lambda x: 1.0 - 2.0 * x, 16)
    with pytest.raises(NonpositiveRadius):
        geometry.q_from_radius(r, m=1)


# ---------------------------------------------------------------------------
# Arclength and embedding
# ---------------------------------------------------------------------------

def test_arclength_of_cylinder():
    r, t0 = geometry.arclength_normalize(GridFunction.sample(lambda x: 1.5, 200))
    assert t0 == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(r.values, 1.5, atol=1e-12)


def test_arclength_of_cone():
    r, t0 = geometry.arclength_normalize(GridFunction.sample(lambda x: 1.0 + 0.75 * x, 400))
    assert t0 == pytest.approx(1.25, abs=1e-10)
    assert r.length == pytest.approx(t0)
    assert np.allclose(r.values, 1.0 + 0.6 * r.x, atol=1e-9)


def test_arclength_matches_quadrature():
    f = GridFunction.sample(lambda x: 2.0 + 0.1 * np.sin(np.pi * x), 800)
    _, t0 = geometry.arclength_normalize(f)
    exact_speed = f.with_values(np.sqrt(1.0 + (0.1 * np.pi * np.cos(np.pi * f.x)) ** 2))
    assert t0 == pytest.approx(gridfn.integrate(exact_speed), abs=1e-8)


def test_arclength_on_longer_interval():
    f = GridFunction.sample(lambda x: 1.0 + 0.75 * x, 400, length=2.0)
    r, t0 = geometry.arclength_normalize(f, x0=2.0)
    assert t0 == pytest.approx(2.5, abs=1e-10)
    assert r.values[-1] == pytest.approx(2.5, abs=1e-9)


def test_recover_embedding_of_cylinder():
    surface = geometry.recover_embedding(GridFunction.sample(lambda t: 0.7, 100))
    assert surface.x0 == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(surface.f_samples.values, 0.7)
    assert surface.t0 == pytest.approx(1.0, abs=1e-12)


def test_recover_embedding_of_cone():
    surface = geometry.recover_embedding(GridFunction.sample(lambda t: 1.0 + 0.6 * t, 400))
    assert surface.x0 == pytest.approx(0.8, abs=1e-10)
    x = surface.f_samples.x
    assert np.max(np.abs(surface.f_samples.values - (1.0 + 0.75 * x))) <= 1e-6


def test_recover_embedding_rejects_steep_profile():
    r = GridFunction.sample(lambda t: 1.0 + 0.5 * np.sin(np.pi * t), 400)
    with pytest.raises(SlopeTooSteep):
        geometry.recover_embedding(r)


@pytest.mark.parametrize(
    "func",
    [lambda x: 1.0 + 0.75 * x, lambda x: 2.0 + 0.1 * np.sin(np.pi * x)],
    ids=["cone", "perturbed-cylinder"],
)
def test_embedding_round_trip(func):
    f = GridFunction.sample(func, 800)
    r, _ = geometry.arclength_normalize(f)
    surface = geometry.recover_embedding(r)
    assert surface.x0 == pytest.approx(1.0, abs=1e-6)
    x = surface.f_samples.x
    relative = np.abs(surface.f_samples.values - func(x)) / func(x)
    assert np.max(relative) <= 1e-4


# ---------------------------------------------------------------------------
# Length estimate
# ---------------------------------------------------------------------------

def test_estimate_t0_unit_interval():
    n = np.arange(1, 21)
    t0, c = geometry.estimate_t0((n * np.pi) ** 2)
    assert t0 == pytest.approx(1.0, abs=1e-8)
    assert c == pytest.approx(0.0, abs=1e-6)


def test_estimate_t0_scaled():
    n = np.arange(1, 21)
    t0, c = geometry.estimate_t0((n * np.pi / 2) ** 2 + 5.0)
    assert t0 == pytest.approx(2.0, abs=1e-6)
    assert c == pytest.approx(5.0, abs=1e-6)


def test_estimate_t0_from_forward_spectrum(q_sine):
    from app.services import spectral_data
    from app.models import Dirichlet

    data = spectral_data.forward(SurfaceProfile(m=1, q=q_sine), 0.0, Dirichlet(), 20)
    t0, _ = geometry.estimate_t0(data.mu)
    assert t0 == pytest.approx(1.0, abs=1e-2)


def test_estimate_t0_input_checks():
    with pytest.raises(ValueError):
        geometry.estimate_t0(np.arange(1.0, 5.0))
    with pytest.raises(ValueError):
        geometry.estimate_t0(np.arange(20.0, 0.0, -1.0))


def test_estimate_t0_rejects_a_flat_tail():
    mu = np.concatenate([(np.arange(1, 9) * np.pi) ** 2, np.full(8, 700.0)])
    with pytest.raises(FitFailed):
        geometry.estimate_t0(mu)


# ---------------------------------------------------------------------------
# Curvature
# ---------------------------------------------------------------------------

def test_gaussian_curvature_of_exponential():
    K = geometry.gaussian_curvature(GridFunction.sample(lambda x: np.exp(x), 800))
    assert np.allclose(K.values, -1.0, atol=1e-4)


def test_gaussian_curvature_of_cylinder():
    K = geometry.gaussian_curvature(GridFunction.sample(lambda x: 1.0, 100))
    assert np.allclose(K.values, 0.0, atol=1e-10)


def test_curvature_formulas_agree():
    q = sine(0.1, 2)
    r = geometry.radius_from_q(SurfaceProfile(m=1, q=q))
    direct = geometry.gaussian_curvature(r).values
    from_q = geometry.curvature_from_q(q, 0.0).values
    assert np.max(np.abs(direct - from_q)) <= 1e-3


def test_curvature_formulas_agree_for_random_profiles(rng):
    for _ in range(20):
        q = random_w10(rng, norm=rng.uniform(0.1, 1.0), modes=2)
        r = geometry.radius_from_q(SurfaceProfile(m=1, q=q))
        gap = geometry.gaussian_curvature(r).values - geometry.curvature_from_q(q, 0.0).values
        assert np.max(np.abs(gap)) <= 1e-3


def test_curvature_map_of_zero():
    result = geometry.curvature_map_G(GridFunction.zeros(100), 0.3)
    assert np.allclose(result.xi.values, 0.0)
    assert result.K0 == pytest.approx(0.0, abs=1e-15)


def test_curvature_map_of_sine(q_sine):
    result = geometry.curvature_map_G(q_sine, 0.0)
    x = q_sine.x
    expected = 0.8 * np.pi * np.cos(2 * np.pi * x) - 0.08 * np.cos(4 * np.pi * x)
    assert result.K0 == pytest.approx(0.08, abs=1e-8)
    assert np.max(np.abs(result.xi.values - expected)) <= 2e-4


def test_curvature_map_has_zero_mean(rng):
    for _ in range(50):
        q = random_w10(rng, n=400, norm=rng.uniform(0.1, 1.0))
        xi = geometry.curvature_map_G(q, rng.uniform(-1.0, 1.0)).xi
        assert abs(gridfn.integrate(xi)) <= 1e-9


def test_curvature_splits_gaussian_curvature(q_sine):
    q0 = 0.1
    result = geometry.curvature_map_G(q_sine, q0)
    K = geometry.curvature_from_q(q_sine, q0).values
    assert np.allclose(K, -result.xi.values - result.K0 - 4 * q0**2, atol=1e-12)


def test_curvature_invert_zero():
    q = geometry.curvature_invert(GridFunction.zeros(200), 0.0)
    assert np.allclose(q.values, 0.0)


def test_curvature_round_trip(q_sine):
    forward = geometry.curvature_map_G(q_sine, 0.1)
    q = geometry.curvature_invert(forward.xi, 0.1)
    error = q.with_values(q.values - q_sine.values)
    assert gridfn.norm(error, SpaceTag.w10()) <= 1e-7
    assert geometry.curvature_map_G(q, 0.1).K0 == pytest.approx(forward.K0, abs=1e-8)


def test_curvature_round_trip_random(rng):
    for _ in range(5):
        q_true = random_w10(rng, n=400, norm=rng.uniform(0.2, 1.0))
        q = geometry.curvature_invert(geometry.curvature_map_G(q_true, 0.0).xi, 0.0)
        error = q.with_values(q.values - q_true.values)
        assert gridfn.norm(error, SpaceTag.w10()) <= 1e-7


def test_curvature_invert_rejects_nonzero_mean():
    with pytest.raises(MembershipViolation):
        geometry.curvature_invert(GridFunction.sample(lambda x: 1.0 + 0 * x, 100), 0.0)


def test_surface_from_curvature(q_sine):
    K = geometry.curvature_from_q(q_sine, 0.0)
    profile, K0 = geometry.surface_from_curvature(K, 0.0, r0=1.3)
    assert profile.m == 1
    assert profile.r0 == 1.3
    assert K0 == pytest.approx(0.08, abs=1e-6)
    assert np.max(np.abs(profile.q.values - q_sine.values)) <= 1e-7
