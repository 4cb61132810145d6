"""
Geometry API
Curvature mapping, its inverse and embedding recovery
"""
import logging

from fastapi import APIRouter
from pydantic import BaseModel

from app.api.spectra import raise_http
from app.models.grid import GridFunction
from app.models.riccati import CurvatureData
from app.models.surface import EmbeddedSurface
from app.services import geometry

router = APIRouter()
logger = logging.getLogger(__name__)


class CurvatureMapRequest(BaseModel):
    q: GridFunction
    q0: float = 0.0


class CurvatureInvertRequest(BaseModel):
    xi: GridFunction
    q0: float = 0.0


class CurvatureInvertResponse(BaseModel):
    q: GridFunction
    K0: float


class EmbedRequest(BaseModel):
    r: GridFunction


@router.post("/curvature-map", response_model=CurvatureData)
def curvature_map(request: CurvatureMapRequest):
    """Normalized curvature xi and K0 of the profile with logarithmic derivative q0 + q"""
    try:
        return geometry.curvature_map_G(request.q, request.q0)
    except Exception as e:
        raise_http(e, "curvature-map")


@router.post("/curvature-invert", response_model=CurvatureInvertResponse)
def curvature_invert(request: CurvatureInvertRequest):
    """q with the given normalized curvature"""
    try:
        q = geometry.curvature_invert(request.xi, request.q0)
        return CurvatureInvertResponse(q=q, K0=geometry.curvature_map_G(q, request.q0).K0)
    except Exception as e:
        raise_http(e, "curvature-invert")


@router.post("/embed", response_model=EmbeddedSurface)
def embed(request: EmbedRequest):
    """Graph f(x) over [0, x0] of the arclength profile r(t)"""
    try:
        return geometry.recover_embedding(request.r)
    except Exception as e:
        raise_http(e, "embed")
