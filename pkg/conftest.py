"""
Shared pytest fixtures
"""
import numpy as np
import pytest

from app.models import GridFunction, SurfaceProfile


def sine(amplitude: float, k: int, n: int = 800) -> GridFunction:
    """amplitude * sin(k pi x) on n intervals"""
    q = GridFunction.sample(lambda x: amplitude * np.sin(k * np.pi * x), n)
    values = q.values.copy()
    values[[0, -1]] = 0.0
    return q.with_values(values)


def random_w10(rng: np.random.Generator, n: int = 800, norm: float = 0.9, modes: int = 4) -> GridFunction:
    """Random sine series with W10 norm `norm`."""
    x = np.linspace(0.0, 1.0, n + 1)
    k = np.arange(1, modes + 1)
    coeffs = rng.uniform(-1.0, 1.0, modes)
    # ||sin(k pi x)||_W10 = k pi / sqrt(2), modes are orthogonal
    scale = norm / np.sqrt(np.sum((coeffs * k * np.pi) ** 2 / 2.0))
    values = np.sin(np.pi * np.outer(x, k)) @ (scale * coeffs)
    values[[0, -1]] = 0.0
    return GridFunction(n=n, values=values)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def q_sine():
    """0.2 sin(2 pi x) on 800 intervals"""
    return sine(0.2, 2)


@pytest.fixture
def cylinder():
    return SurfaceProfile.flat(800)


@pytest.fixture
def perturbed_profile(q_sine):
    return SurfaceProfile(m=2, r0=1.0, q0=0.0, q=q_sine)
