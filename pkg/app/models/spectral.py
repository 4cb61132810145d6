"""
Spectral Models
Boundary conditions, Sturm-Liouville problems and spectral data
"""
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.grid import FloatArray, GridFunction
from app.models.surface import SurfaceProfile


class _BoundaryBase(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    @property
    def index_origin(self) -> int:
        return 0

    @property
    def left_slope(self) -> Optional[float]:
        """f'(0) = left_slope * f(0); None means f(0) = 0."""
        return None

    @property
    def right_slope(self) -> Optional[float]:
        """f'(1) = -right_slope * f(1); None means f(1) = 0."""
        return None


class Dirichlet(_BoundaryBase):
    """f(0) = f(1) = 0"""

    kind: Literal["dirichlet"] = "dirichlet"

    @property
    def index_origin(self) -> int:
        return 1

    def __str__(self) -> str:
        return "Dirichlet"


class Mixed(_BoundaryBase):
    """f(0) = 0, f'(1) + b f(1) = 0"""

    kind: Literal["mixed"] = "mixed"
    b: float = 0.0

    @property
    def right_slope(self) -> Optional[float]:
        return self.b

    def __str__(self) -> str:
        return f"Mixed(b={self.b:g})"


class Robin(_BoundaryBase):
    """f'(0) - a f(0) = 0, f'(1) + b f(1) = 0"""

    kind: Literal["robin"] = "robin"
    a: float = 0.0
    b: float = 0.0

    @property
    def left_slope(self) -> Optional[float]:
        return self.a

    @property
    def right_slope(self) -> Optional[float]:
        return self.b

    def __str__(self) -> str:
        return f"Robin(a={self.a:g}, b={self.b:g})"


BoundaryCondition = Annotated[Union[Dirichlet, Mixed, Robin], Field(discriminator="kind")]


def make_boundary_condition(kind: str, a: float = 0.0, b: float = 0.0) -> Union[Dirichlet, Mixed, Robin]:
    """Build a boundary condition from CLI/API style arguments."""
    kind = kind.lower()
    if kind == "dirichlet":
        return Dirichlet()
    if kind == "mixed":
        return Mixed(b=b)
    if kind == "robin":
        return Robin(a=a, b=b)
    raise ValueError(f"unknown boundary condition '{kind}'")


class SLProblem(BaseModel):
    """
    Per-mode operator -(1/rho^2) d/dx (rho^2 d/dx) + E / r^2 on [0, 1]
    with rho = r^(m/2), self-adjoint in L2(r^m dx).
    """

    model_config = ConfigDict(frozen=True)

    profile: SurfaceProfile
    E: float = Field(default=0.0, ge=0, allow_inf_nan=False)
    bc: BoundaryCondition = Field(default_factory=Dirichlet)


class EigenResult(BaseModel):
    """One eigenpair with its norming constant"""

    model_config = ConfigDict(frozen=True)

    index: int
    mu: float
    norming_constant: float
    eigenfunction: Optional[GridFunction] = None


class SchrodingerForm(BaseModel):
    """-y'' + p y = sigma y with mu = sigma + c0 and the mapped boundary condition"""

    model_config = ConfigDict(frozen=True)

    p: GridFunction
    c0: float
    bc: BoundaryCondition


class SpectralData(BaseModel):
    """
    Eigenvalues split as mu_n = baseline_n + c0 + tilde_mu_n, plus norming constants.

    Entry k belongs to index bc.index_origin + k.
    """

    model_config = ConfigDict(frozen=True)

    bc: BoundaryCondition
    mu: FloatArray
    tilde_mu: FloatArray
    c0: float
    norming: FloatArray = Field(default_factory=lambda: np.zeros(0))
    baseline: FloatArray

    @model_validator(mode="after")
    def _check(self) -> "SpectralData":
        n = self.mu.size
        if self.tilde_mu.size != n or self.baseline.size != n:
            raise ValueError("mu, tilde_mu and baseline must have equal length")
        if self.norming.size not in (0, n):
            raise ValueError("norming must be empty or match mu in length")
        if n > 1 and np.any(np.diff(self.mu) <= 0):
            raise ValueError("mu must be strictly increasing")
        return self

    @property
    def n_modes(self) -> int:
        return int(self.mu.size)

    @property
    def has_norming(self) -> bool:
        return self.norming.size > 0

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.n_modes) + self.bc.index_origin

    def recompose(self) -> np.ndarray:
        """baseline + c0 + tilde_mu, evaluated in the order decompose used."""
        return (self.baseline + self.c0) + self.tilde_mu

    def truncated(self, n_modes: int) -> "SpectralData":
        if n_modes > self.n_modes:
            raise ValueError(f"only {self.n_modes} modes available, {n_modes} requested")
        return SpectralData(
            bc=self.bc,
            mu=self.mu[:n_modes],
            tilde_mu=self.tilde_mu[:n_modes],
            c0=self.c0,
            norming=self.norming[:n_modes] if self.has_norming else self.norming,
            baseline=self.baseline[:n_modes],
        )


class BIdentityEstimate(BaseModel):
    """Partial sum of the b-identity with its last term as convergence indicator"""

    estimate: float
    last_term: float
    n_terms: int


class SurfaceEigenvalue(BaseModel):
    """Eigenvalue of the full Laplacian, labelled by fiber mode and radial index"""

    mu: float
    mode: int
    index: int
    fiber_eigenvalue: float


class SurfaceSpectrum(BaseModel):
    entries: List[SurfaceEigenvalue]

    @property
    def values(self) -> np.ndarray:
        return np.array([e.mu for e in self.entries])
