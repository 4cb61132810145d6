"""
Core Configuration
Loads environment variables and toolkit settings
"""
from typing import List

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application Settings"""

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=True, extra="ignore")

    # Application
    APP_NAME: str = "surfspec"
    APP_VERSION: str = "1.0.0"
    ENVIRONMENT: str = "development"
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # API Server
    API_HOST: str = "0.0.0.0"
    API_PORT: int = 8000
    ALLOWED_ORIGINS: List[str] = ["http://localhost:3000", "http://localhost:8000"]

    # Grid and quadrature
    GRID_N: int = 800
    MEMBERSHIP_TOL: float = 1e-6
    SLOPE_MARGIN: float = 1e-9

    # Newton inversion (riccati, curvature)
    NEWTON_MAX_ITER: int = 50
    NEWTON_TOL: float = 1e-10
    NEWTON_STEP_TOL: float = 1e-12
    NEWTON_MAX_HALVINGS: int = 30
    NEWTON_STALL_FACTOR: float = 10.0

    # Shooting eigensolver
    SHOOTING_REL_TOL: float = 1e-12
    SHOOTING_BRACKET_PAD: float = 10.0
    SHOOTING_MAX_WIDENINGS: int = 60
    SHOOTING_RICHARDSON: bool = True
    N_MAX_LIMIT: int = 200
    ORACLE_GRID_LIMIT: int = 4000

    # Spectral data
    W_TAIL_TERMS: int = 20000
    DEGENERATE_TOL: float = 1e-12

    # Inverse problem
    INVERSE_N_MODES: int = 16
    INVERSE_BASIS_SIZE: int = 12
    INVERSE_MAX_ITER: int = 30
    INVERSE_TOL: float = 1e-8
    INVERSE_FD_STEP: float = 1e-5
    MAX_WORKERS: int = 4


# Global settings instance
settings = Settings()
