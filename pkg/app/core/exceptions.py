"""
Toolkit Exceptions
Error hierarchy shared by the services, the CLI and the HTTP surface
"""
from typing import List, Optional


class ToolkitError(Exception):
    """Base class for all toolkit errors"""


class ValidationFailure(ToolkitError, ValueError):
    """Input or precondition rejected (CLI exit code 1)"""


class ConvergenceFailure(ToolkitError, RuntimeError):
    """An iterative solver gave up (CLI exit code 2)"""


class UnsupportedOrder(ValidationFailure):
    """Sobolev order above the supported maximum"""


class MembershipViolation(ValidationFailure):
    """A grid function failed a strict space-membership check"""


class NonpositiveRadius(ValidationFailure):
    """A radius sample is zero or negative"""


class SlopeTooSteep(ValidationFailure):
    """|r'(t)| reaches 1, so the surface is not a graph over the axis"""


class FitFailed(ValidationFailure):
    """Eigenvalue asymptotics fit produced a non-positive leading coefficient"""


class DegenerateBoundaryValue(ValidationFailure):
    """A norming-constant denominator vanished numerically"""


class PoleHit(ValidationFailure):
    """Product function evaluated at a pole of its tail model"""


class HypothesisViolation(ValidationFailure):
    """Inverse problem requested outside the cases where it is uniquely solvable"""


class NoConvergence(ConvergenceFailure):
    """Newton-type iteration exhausted its budget"""

    def __init__(self, message: str, history: Optional[List[float]] = None):
        super().__init__(message)
        self.history = list(history or [])

    @property
    def final_residual(self) -> Optional[float]:
        return self.history[-1] if self.history else None


class SolverStall(ConvergenceFailure):
    """Eigenvalue bracketing failed for a given index"""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index
