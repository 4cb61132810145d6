"""
Riccati mapping tests
"""
import numpy as np
import pytest

from app.core.config import settings
from app.core.exceptions import MembershipViolation, NoConvergence
from app.models import GridFunction, PotentialLaw, SpaceTag
from app.services import gridfn, riccati
from app.services.newton import damped_newton
from conftest import random_w10, sine


def w10_distance(a: GridFunction, b: GridFunction) -> float:
    return gridfn.norm(a.with_values(a.values - b.values), SpaceTag.w10())


# ---------------------------------------------------------------------------
# Forward maps
# ---------------------------------------------------------------------------

def test_map_G_of_zero():
    image = riccati.map_G(GridFunction.zeros(100), 0.7)
    assert np.allclose(image.p.values, 0.0)
    assert image.c0 == 0.0


def test_map_G_of_sine(q_sine):
    image = riccati.map_G(q_sine, 0.0)
    x = q_sine.x
    expected = 0.4 * np.pi * np.cos(2 * np.pi * x) - 0.02 * np.cos(4 * np.pi * x)
    assert image.c0 == pytest.approx(0.02, abs=1e-10)
    assert np.max(np.abs(image.p.values - expected)) <= 1e-4


def test_map_G_with_slope(q_sine):
    image = riccati.map_G(q_sine, 0.5)
    x = q_sine.x
    expected = (
        0.4 * np.pi * np.cos(2 * np.pi * x)
        - 0.02 * np.cos(4 * np.pi * x)
        + 0.2 * np.sin(2 * np.pi * x)
    )
    assert image.c0 == pytest.approx(0.02, abs=1e-10)
    assert np.max(np.abs(image.p.values - expected)) <= 1e-4


def test_map_G_image_has_zero_mean(rng):
    for _ in range(10):
        image = riccati.map_G(random_w10(rng, n=400), rng.uniform(-1, 1))
        assert abs(gridfn.integrate(image.p)) <= 1e-9


def test_map_P_without_potential():
    image = riccati.map_P(GridFunction.zeros(100), PotentialLaw.none())
    assert np.allclose(image.p.values, 0.0)


def test_map_P_constant_potential():
    image = riccati.map_P(GridFunction.zeros(100), PotentialLaw.warped(E=2.0, m=2))
    assert np.allclose(image.p.values, 0.0, atol=1e-14)
    assert image.c0 == pytest.approx(2.0, abs=1e-14)


def test_map_P_warped_pointwise(q_sine):
    image = riccati.map_P(q_sine, PotentialLaw.warped(E=1.0, m=2))
    Q = gridfn.antiderivative(q_sine).values
    raw = gridfn.differentiate(q_sine).values + q_sine.values**2 + np.exp(-2.0 * Q)
    c0 = gridfn.integrate(q_sine.with_values(raw))
    assert image.c0 == pytest.approx(c0, abs=1e-14)
    assert np.allclose(image.p.values, raw - c0, atol=1e-13)


def test_map_P_none_matches_map_G(q_sine):
    assert np.allclose(
        riccati.map_P(q_sine, PotentialLaw.none()).p.values,
        riccati.map_G(q_sine, 0.0).p.values,
        atol=1e-15,
    )


# ---------------------------------------------------------------------------
# Gradients
# ---------------------------------------------------------------------------

def test_grad_G_matches_central_difference(rng):
    eps = 1e-5
    for _ in range(20):
        q = random_w10(rng, n=200, norm=rng.uniform(0.1, 1.0))
        f = random_w10(rng, n=200, norm=0.3)
        q0 = rng.uniform(-1.0, 1.0)
        plus = riccati.map_G(q.with_values(q.values + eps * f.values), q0).p.values
        minus = riccati.map_G(q.with_values(q.values - eps * f.values), q0).p.values
        fd = (plus - minus) / (2 * eps)
        grad = riccati.grad_G(q, q0, f).values
        assert np.max(np.abs(grad - fd)) <= 1e-6 * np.max(np.abs(grad))


def test_grad_P_matches_central_difference(rng):
    law = PotentialLaw.warped(E=1.5, m=2)
    eps = 1e-5
    for _ in range(20):
        q = random_w10(rng, n=200, norm=rng.uniform(0.1, 0.5))
        f = random_w10(rng, n=200, norm=0.3)
        plus = riccati.map_P(q.with_values(q.values + eps * f.values), law).p.values
        minus = riccati.map_P(q.with_values(q.values - eps * f.values), law).p.values
        fd = (plus - minus) / (2 * eps)
        grad = riccati.grad_P(q, law, f).values
        assert np.max(np.abs(grad - fd)) <= 1e-6 * np.max(np.abs(grad))



def test_grad_G_at_origin_is_derivative():
    f = sine(0.3, 1, 400)
    grad = riccati.grad_G(GridFunction.zeros(400), 0.0, f)
    assert np.max(np.abs(grad.values - gridfn.differentiate(f).values)) <= 1e-5


def test_grad_of_zero_direction(q_sine):
    zero = GridFunction.zeros(q_sine.n_intervals)
    assert np.allclose(riccati.grad_G(q_sine, 0.3, zero).values, 0.0)
    assert np.allclose(riccati.grad_P(q_sine, PotentialLaw.warped(1.0, 2), zero).values, 0.0)


def test_grad_P_without_potential_is_grad_G(rng):
    q = random_w10(rng, n=200)
    f = random_w10(rng, n=200)
    assert np.allclose(
        riccati.grad_P(q, PotentialLaw.none(), f).values,
        riccati.grad_G(q, 0.0, f).values,
        atol=1e-14,
    )


def test_jacobians_apply_gradients(rng):
    q = random_w10(rng, n=120)
    f = random_w10(rng, n=120, norm=0.4)
    assert np.allclose(riccati.jacobian_G(q, 0.2) @ f.values, riccati.grad_G(q, 0.2, f).values, atol=1e-10)
    law = PotentialLaw.exponential(0.5, 2.0)
    assert np.allclose(riccati.jacobian_P(q, law) @ f.values, riccati.grad_P(q, law, f).values, atol=1e-10)


# ---------------------------------------------------------------------------
# Inversion
# ---------------------------------------------------------------------------

def test_invert_G_of_zero():
    assert np.allclose(riccati.invert_G(GridFunction.zeros(200), 0.3).values, 0.0)


def test_invert_G_round_trip():
    q = GridFunction.sample(lambda x: 0.2 * np.sin(2 * np.pi * x) + 0.1 * np.sin(4 * np.pi * x), 800)
    q = q.with_values(np.where(np.abs(q.values) < 1e-15, 0.0, q.values))
    result = riccati.solve_G(riccati.map_G(q, 0.3).p, 0.3)
    assert result.report.converged
    assert w10_distance(result.q, q) <= 1e-7


def test_invert_G_random_sweep(rng):
    for _ in range(50):
        q = random_w10(rng, n=400, norm=rng.uniform(0.05, 1.0))
        q0 = rng.uniform(-1.0, 1.0)
        result = riccati.solve_G(riccati.map_G(q, q0).p, q0)
        assert result.report.iterations <= 25
        assert w10_distance(result.q, q) <= 1e-7


def test_inversion_preserves_parity(rng):
    x = np.linspace(0.0, 1.0, 401)
    for _ in range(10):
        coeffs = rng.uniform(-0.1, 0.1, 3)
        values = np.sin(2 * np.pi * np.outer(x, [1, 2, 3])) @ coeffs
        values[[0, 200, -1]] = 0.0
        q = GridFunction(n=400, values=values)
        p = riccati.map_P(q, PotentialLaw.none()).p
        assert gridfn.check_membership(p, SpaceTag.h(0, "even"), 1e-12).member
        assert gridfn.check_membership(riccati.invert_G(p, 0.0), SpaceTag.w10("odd"), 1e-9).member
        assert gridfn.check_membership(riccati.invert_P(p, PotentialLaw.none()), SpaceTag.w10("odd"), 1e-9).member


def test_invert_P_of_zero():
    assert np.allclose(riccati.invert_P(GridFunction.zeros(200), PotentialLaw.none()).values, 0.0)


def test_invert_P_round_trip():
    q = sine(0.15, 2)
    law = PotentialLaw.warped(E=1.0, m=2)
    result = riccati.solve_P(riccati.map_P(q, law).p, law)
    assert result.report.converged
    assert result.report.iterations <= 25
    assert w10_distance(result.q, q) <= 1e-7


def test_invert_rejects_nonzero_mean():
    with pytest.raises(MembershipViolation):
        riccati.invert_G(GridFunction.sample(lambda x: 0.5 + 0 * x, 100), 0.0)


def test_invert_G_outside_the_discrete_range(rng):
    values = rng.normal(size=201)
    p = GridFunction(n=200, values=values)
    p = p.with_values(values - gridfn.integrate(p))
    with pytest.raises(NoConvergence) as info:
        riccati.solve_G(p, 0.0)
    assert info.value.final_residual > 1e-9
    assert len(info.value.history) >= 1


def test_newton_budget_exhaustion_reports_history():
    with pytest.raises(NoConvergence) as info:
        damped_newton(
            lambda x: np.array([x[0] ** 2 + 1.0]),
            lambda x: np.array([[2.0 * x[0] + 1e-3]]),
            np.array([3.0]),
            np.ones(1),
            max_iter=0,
        )
    assert info.value.final_residual == pytest.approx(10.0)


def inconsistent(gap: float):
    """Residual [x, x - gap]: least-squares floor gap / sqrt(2) at x = gap / 2."""
    return (
        lambda x: np.array([x[0], x[0] - gap]),
        lambda x: np.array([[1.0], [1.0]]),
    )


def test_newton_raises_at_a_high_residual_floor():
    residual, jacobian = inconsistent(1e-6)
    with pytest.raises(NoConvergence) as info:
        damped_newton(residual, jacobian, np.array([1.0]), np.ones(2), tol=1e-10)
    assert info.value.final_residual == pytest.approx(1e-6 / np.sqrt(2), rel=1e-6)


def test_newton_keeps_a_floor_within_the_stall_factor():
    residual, jacobian = inconsistent(1e-9)
    x, report = damped_newton(residual, jacobian, np.array([1.0]), np.ones(2), tol=1e-10)
    assert x[0] == pytest.approx(5e-10, rel=1e-6)
    assert report.stationary
    assert not report.converged
    assert report.final_residual <= settings.NEWTON_STALL_FACTOR * 1e-10


# ---------------------------------------------------------------------------
# Estimates and Condition U
# ---------------------------------------------------------------------------

def test_norm_bounds(rng):
    for _ in range(100):
        q = random_w10(rng, norm=rng.uniform(0.05, 1.0))
        bounds = riccati.norm_bounds(q, rng.uniform(-1.0, 1.0))
        assert bounds.dq_norm <= bounds.p_norm + 1e-8
        assert bounds.p_norm**2 <= bounds.upper_bound_sq + 1e-8
        assert bounds.p_norm**2 == pytest.approx(bounds.identity_rhs_sq, abs=1e-6)


def test_norm_bounds_P(rng):
    law = PotentialLaw.warped(E=1.0, m=2)
    for _ in range(20):
        q = random_w10(rng, norm=rng.uniform(0.05, 0.2 * np.pi))
        bounds = riccati.norm_bounds_P(q, law)
        assert bounds.dq_norm_sq <= bounds.p_norm_sq + 1e-8
        assert bounds.p_norm_sq <= bounds.upper_bound_sq + 1e-8


@pytest.mark.parametrize(
    "law, expected",
    [
        (PotentialLaw.warped(E=2.0, m=2), True),
        (PotentialLaw.none(), True),
        (PotentialLaw.exponential(1.0, -1.0), False),
    ],
)
def test_condition_u(law, expected):
    assert riccati.condition_u_check(law) is expected
