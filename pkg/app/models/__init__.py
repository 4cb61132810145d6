"""Domain models"""
from app.models.grid import FloatArray, GridFunction, MembershipReport, Parity, SpaceKind, SpaceTag
from app.models.surface import EmbeddedSurface, SurfaceProfile
from app.models.spectral import (
    BIdentityEstimate,
    BoundaryCondition,
    Dirichlet,
    EigenResult,
    Mixed,
    Robin,
    SchrodingerForm,
    SLProblem,
    SpectralData,
    SurfaceEigenvalue,
    SurfaceSpectrum,
    make_boundary_condition,
)
from app.models.riccati import (
    CurvatureData,
    InversionResult,
    NewtonReport,
    NormBounds,
    PNormBounds,
    PotentialLaw,
    RiccatiImage,
)
from app.models.inverse import (
    Anchors,
    EndpointAnchor,
    ForwardSetup,
    InverseConfig,
    ReconstructionReport,
    RoundtripReport,
    SlopeAnchor,
)
