"""
Riccati Models
Potential laws and results of the q -> p mappings and their inversion
"""
from typing import List, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt

from app.models.grid import GridFunction


class PotentialLaw(BaseModel):
    """
    Potential u(Q) added by the mapping P.

    none:        u = 0
    warped:      u = E exp(-4 Q / m)   (E / r^2 with r = exp(2 Q / m))
    exponential: u = amplitude * exp(-rate * Q)
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    kind: Literal["none", "warped", "exponential"] = "none"
    E: float = Field(default=0.0, ge=0)
    m: PositiveInt = 1
    amplitude: float = 0.0
    rate: float = 0.0

    @classmethod
    def none(cls) -> "PotentialLaw":
        return cls(kind="none")

    @classmethod
    def warped(cls, E: float, m: int) -> "PotentialLaw":
        return cls(kind="warped", E=E, m=m)

    @classmethod
    def exponential(cls, amplitude: float, rate: float) -> "PotentialLaw":
        return cls(kind="exponential", amplitude=amplitude, rate=rate)

    def u(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "warped":
            return self.E * np.exp(-4.0 * t / self.m)
        if self.kind == "exponential":
            return self.amplitude * np.exp(-self.rate * t)
        return np.zeros_like(t)

    def du(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "warped":
            return -4.0 * self.E / self.m * np.exp(-4.0 * t / self.m)
        if self.kind == "exponential":
            return -self.rate * self.amplitude * np.exp(-self.rate * t)
        return np.zeros_like(t)


class RiccatiImage(BaseModel):
    """Zero-mean potential p and the constant split off from it"""

    model_config = ConfigDict(frozen=True)

    p: GridFunction
    c0: float


class CurvatureData(BaseModel):
    """xi in H0 and K0, with K = -xi - K0 - 4 q0^2"""

    model_config = ConfigDict(frozen=True)

    xi: GridFunction
    K0: float


class NewtonReport(BaseModel):
    iterations: int
    residual_history: List[float]
    converged: bool
    halvings: int = 0
    stationary: bool = False

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1]


class InversionResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    q: GridFunction
    report: NewtonReport


class NormBounds(BaseModel):
    """Norms entering the a-priori estimates of the mapping G"""

    dq_norm: float
    p_norm: float
    upper_bound_sq: float
    identity_rhs_sq: float
    c0: float

    @property
    def lower_bound_holds(self) -> bool:
        return self.dq_norm <= self.p_norm


class PNormBounds(BaseModel):
    """Squared norms entering the estimates of the mapping P"""

    dq_norm_sq: float
    p_norm_sq: float
    upper_bound_sq: float
    c0: float
