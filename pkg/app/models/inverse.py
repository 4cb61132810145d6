"""
Inverse Problem Models
Configuration, fixed forward parameters, anchors and reports
"""
from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

from app.core.config import settings
from app.models.spectral import BoundaryCondition, Dirichlet


class InverseConfig(BaseModel):
    """
    Truncated reconstruction settings.

    full: match eigenvalue remainders and norming constants, basis sin(k pi x)
    symmetric: match eigenvalue remainders only, basis sin(2 j pi x) (odd about 1/2)
    """

    model_config = ConfigDict(frozen=True)

    n_modes: int = Field(default_factory=lambda: settings.INVERSE_N_MODES, ge=4)
    grid_n: int = Field(default_factory=lambda: settings.GRID_N, ge=8)
    max_iter: PositiveInt = Field(default_factory=lambda: settings.INVERSE_MAX_ITER)
    tol: float = Field(default_factory=lambda: settings.INVERSE_TOL, gt=0)
    mode: Literal["full", "symmetric"] = "full"
    basis_size: PositiveInt = Field(default_factory=lambda: settings.INVERSE_BASIS_SIZE)
    fd_step: float = Field(default_factory=lambda: settings.INVERSE_FD_STEP, gt=0)
    max_workers: PositiveInt = Field(default_factory=lambda: settings.MAX_WORKERS)

    @model_validator(mode="after")
    def _basis_fits_data(self) -> "InverseConfig":
        if self.basis_size > 2 * self.n_modes:
            raise ValueError(f"basis_size={self.basis_size} exceeds 2 * n_modes")
        return self


class ForwardSetup(BaseModel):
    """Parameters held fixed while q is reconstructed"""

    model_config = ConfigDict(frozen=True)

    q0: float = 0.0
    E: float = Field(default=0.0, ge=0)
    m: PositiveInt = 1
    r0: float = Field(default=1.0, gt=0)
    bc: BoundaryCondition = Field(default_factory=Dirichlet)


class SlopeAnchor(BaseModel):
    """r(0) and q0 = rho'(0) / rho(0) given"""

    kind: Literal["slope"] = "slope"
    r0: float = Field(gt=0)
    q0: float


class EndpointAnchor(BaseModel):
    """r(0) and r(1) given"""

    kind: Literal["endpoint"] = "endpoint"
    r0: float = Field(gt=0)
    r1: float = Field(gt=0)


Anchors = Annotated[Union[SlopeAnchor, EndpointAnchor], Field(discriminator="kind")]


class ReconstructionReport(BaseModel):
    mode: str
    n_modes: int
    basis_size: int
    iterations: int
    residual_history: List[float]
    final_residual: float
    converged: bool
    n_forward_solves: int
    stationary: bool = False
    runtime_s: float
    coefficients: List[float]
    weighting: str = "unweighted least squares over eigenvalue remainders and norming constants"


class RoundtripReport(BaseModel):
    noise: float
    seed: int
    converged: bool
    h0_error: Optional[float] = None
    w10_error: Optional[float] = None
    final_residual: Optional[float] = None
    iterations: Optional[int] = None
    runtime_s: float
    message: str = ""
