"""
Grid Models
Uniform-grid functions and the function-space tags used to measure them
"""
from enum import Enum
from typing import Annotated, Any, Callable, Dict, List, Optional

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    WithJsonSchema,
    model_validator,
)


def _as_float_array(value: Any) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.ndim != 1:
        raise ValueError("expected a one-dimensional array of reals")
    if not np.all(np.isfinite(arr)):
        raise ValueError("array values must be finite")
    arr.setflags(write=False)
    return arr


# Read-only float64 vector, serialized as a JSON list
FloatArray = Annotated[
    np.ndarray,
    PlainValidator(_as_float_array),
    PlainSerializer(lambda a: [float(v) for v in a], return_type=list),
    WithJsonSchema({"type": "array", "items": {"type": "number"}}),
]


class GridFunction(BaseModel):
    """
    Real function sampled at x_k = k * length / n_intervals, k = 0..n_intervals.

    Serialized as {"n": n_intervals, "values": [...], "length": length}.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    n_intervals: int = Field(alias="n", ge=2)
    values: FloatArray
    length: float = Field(default=1.0, gt=0, allow_inf_nan=False)

    @model_validator(mode="after")
    def _check_shape(self) -> "GridFunction":
        if self.values.shape[0] != self.n_intervals + 1:
            raise ValueError(
                f"expected {self.n_intervals + 1} samples, got {self.values.shape[0]}"
            )
        return self

    @classmethod
    def from_values(cls, values: Any, length: float = 1.0) -> "GridFunction":
        arr = np.asarray(values, dtype=float)
        return cls(n=arr.size - 1, values=arr, length=length)

    @classmethod
    def sample(
        cls,
        func: Callable[[np.ndarray], Any],
        n: int,
        length: float = 1.0,
    ) -> "GridFunction":
        """Sample func on the uniform grid of n intervals over [0, length]."""
        x = np.linspace(0.0, length, n + 1)
        values = np.broadcast_to(np.asarray(func(x), dtype=float), x.shape)
        return cls(n=n, values=values, length=length)

    @classmethod
    def zeros(cls, n: int, length: float = 1.0) -> "GridFunction":
        return cls(n=n, values=np.zeros(n + 1), length=length)

    @property
    def h(self) -> float:
        return self.length / self.n_intervals

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.n_intervals + 1)

    def with_values(self, values: Any) -> "GridFunction":
        """Same grid, new samples."""
        return GridFunction(n=self.n_intervals, values=values, length=self.length)

    def rescaled(self, length: float) -> "GridFunction":
        return GridFunction(n=self.n_intervals, values=self.values, length=length)

    def to_rows(self) -> np.ndarray:
        """(x, value) table for CSV export."""
        return np.column_stack([self.x, self.values])


class SpaceKind(str, Enum):
    """Function spaces on [0, 1]"""
    W10 = "W10"
    H = "H"
    L2 = "L2"


class Parity(str, Enum):
    """Symmetry about x = 1/2"""
    ANY = "any"
    EVEN = "even"
    ODD = "odd"


class SpaceTag(BaseModel):
    """
    Function space selector.

    W10: q(0) = q(1) = 0, norm ||q'||.
    H (alpha): integral of every derivative up to alpha vanishes, norm ||q^(alpha)||.
    L2: plain L2 norm.
    """

    model_config = ConfigDict(frozen=True)

    kind: SpaceKind
    alpha: int = Field(default=0, ge=0)
    parity: Parity = Parity.ANY

    @classmethod
    def w10(cls, parity: Parity = Parity.ANY) -> "SpaceTag":
        return cls(kind=SpaceKind.W10, parity=parity)

    @classmethod
    def h(cls, alpha: int = 0, parity: Parity = Parity.ANY) -> "SpaceTag":
        return cls(kind=SpaceKind.H, alpha=alpha, parity=parity)

    @classmethod
    def l2(cls, parity: Parity = Parity.ANY) -> "SpaceTag":
        return cls(kind=SpaceKind.L2, parity=parity)

    @property
    def derivative_order(self) -> int:
        if self.kind == SpaceKind.W10:
            return 1
        if self.kind == SpaceKind.H:
            return self.alpha
        return 0

    def label(self) -> str:
        base = f"H{self.alpha}" if self.kind == SpaceKind.H else self.kind.value
        return base if self.parity == Parity.ANY else f"{base}[{self.parity.value}]"


class MembershipReport(BaseModel):
    """Outcome of a tolerance membership check"""

    tag: str
    tol: float
    member: bool
    measurements: Dict[str, float] = Field(default_factory=dict)
    failures: List[str] = Field(default_factory=list)

    def __bool__(self) -> bool:
        return self.member

    def summary(self) -> str:
        if self.member:
            return f"{self.tag}: ok (tol={self.tol:g})"
        return f"{self.tag}: " + "; ".join(self.failures)


def grid_size(*functions: Optional[GridFunction]) -> int:
    """Common n_intervals of the given functions, ValueError on mismatch."""
    sizes = {f.n_intervals for f in functions if f is not None}
    if len(sizes) != 1:
        raise ValueError(f"grid functions live on different grids: {sorted(sizes)}")
    return sizes.pop()
