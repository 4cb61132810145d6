"""
Spectral Data API
Forward spectra, Schroedinger transform and b-identity verification
"""
import logging
from typing import Optional

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from app.core.config import settings
from app.core.exceptions import ConvergenceFailure, ValidationFailure
from app.models.spectral import BIdentityEstimate, BoundaryCondition, Dirichlet, SchrodingerForm, SLProblem, SpectralData
from app.models.surface import SurfaceProfile
from app.services import sl_solver, spectral_data

router = APIRouter()
logger = logging.getLogger(__name__)


class ForwardRequest(BaseModel):
    profile: SurfaceProfile
    bc: BoundaryCondition = Field(default_factory=Dirichlet)
    E: float = Field(default=0.0, ge=0)
    n_modes: int = Field(default=10, ge=1, le=settings.N_MAX_LIMIT)


class TransformRequest(BaseModel):
    profile: SurfaceProfile
    bc: BoundaryCondition = Field(default_factory=Dirichlet)
    E: float = Field(default=0.0, ge=0)


class VerifyBRequest(BaseModel):
    data: SpectralData
    n_terms: Optional[int] = Field(default=None, ge=0)


def raise_http(exc: Exception, action: str):
    """Map toolkit errors onto HTTP status codes"""
    if isinstance(exc, ConvergenceFailure):
        logger.warning(f"{action}: {exc}")
        raise HTTPException(status_code=422, detail=f"{type(exc).__name__}: {exc}")
    if isinstance(exc, (ValidationFailure, ValueError)):
        logger.info(f"{action} rejected: {exc}")
        raise HTTPException(status_code=400, detail=f"{type(exc).__name__}: {exc}")
    logger.error(f"Error in {action}: {exc}", exc_info=True)
    raise HTTPException(status_code=500, detail=str(exc))


@router.post("/forward", response_model=SpectralData)
def forward(request: ForwardRequest):
    """Eigenvalues, norming constants and remainders of one fiber mode"""
    try:
        return spectral_data.forward(request.profile, request.E, request.bc, request.n_modes)
    except Exception as e:
        raise_http(e, "forward")


@router.post("/transform", response_model=SchrodingerForm)
def transform(request: TransformRequest):
    """Schroedinger potential p, shift c0 and mapped boundary condition"""
    try:
        return sl_solver.to_schrodinger(SLProblem(profile=request.profile, E=request.E, bc=request.bc))
    except Exception as e:
        raise_http(e, "transform")


@router.post("/verify-b", response_model=BIdentityEstimate)
def verify_b(request: VerifyBRequest):
    """Recover b of Mixed data from eigenvalues and norming constants"""
    try:
        n_terms = request.data.n_modes if request.n_terms is None else request.n_terms
        return spectral_data.b_from_identity(request.data, n_terms)
    except Exception as e:
        raise_http(e, "verify-b")
