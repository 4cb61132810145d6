"""
Surface Models
Rotation profiles r(x) = r0 * exp(2 Q(x) / m) and their embeddings in R^3
"""
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

from app.core.config import settings
from app.models.grid import GridFunction, SpaceTag


class SurfaceProfile(BaseModel):
    """
    Warped-product profile.

    m: dimension of the fiber Y
    r0: r(0)
    q0: rho'(0) / rho(0) with rho = r^(m/2)
    q: W10 part of (log rho)'
    """

    model_config = ConfigDict(frozen=True)

    m: PositiveInt = 1
    r0: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    q0: float = Field(default=0.0, allow_inf_nan=False)
    q: GridFunction

    @model_validator(mode="after")
    def _q_in_w10(self) -> "SurfaceProfile":
        from app.services.gridfn import check_membership

        report = check_membership(self.q, SpaceTag.w10(), settings.MEMBERSHIP_TOL)
        if not report.member:
            raise ValueError(f"q is not in W10: {report.summary()}")
        return self

    @classmethod
    def flat(cls, n: int, m: int = 1, r0: float = 1.0, q0: float = 0.0) -> "SurfaceProfile":
        """Profile with q = 0."""
        return cls(m=m, r0=r0, q0=q0, q=GridFunction.zeros(n))

    @property
    def n_intervals(self) -> int:
        return self.q.n_intervals


class EmbeddedSurface(BaseModel):
    """
    Surface of revolution as the graph of f over [0, x0].

    t_of_x holds the arclength t(x) at the same nodes as f_samples.
    """

    model_config = ConfigDict(frozen=True)

    x0: float = Field(gt=0, allow_inf_nan=False)
    f_samples: GridFunction
    t_of_x: GridFunction

    @model_validator(mode="after")
    def _check(self) -> "EmbeddedSurface":
        if np.any(self.f_samples.values <= 0):
            raise ValueError("f must be strictly positive")
        if np.any(np.diff(self.t_of_x.values) <= 0):
            raise ValueError("t(x) must be strictly increasing")
        if not np.isclose(self.f_samples.length, self.x0):
            raise ValueError("f_samples must live on [0, x0]")
        return self

    @property
    def t0(self) -> float:
        return float(self.t_of_x.values[-1])
