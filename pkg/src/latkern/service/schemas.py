"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

import math

from pydantic import BaseModel, Field

from ..weights import ProblemParams


class ProblemIn(BaseModel):
    """Problem parameters as entered on the wire.

    The fluctuation magnitude is given as c * sqrt(6), matching the common
    parameterization of the test problem, so 0.2 on the wire means
    c = 0.2 / sqrt(6).
    """

    theta: float = Field(gt=1.0)
    c_over_sqrt6: float = Field(gt=0.0)
    p: float = Field(gt=0.0, lt=1.0)
    s: int = Field(ge=1)

    def to_params(self) -> ProblemParams:
        return ProblemParams(
            theta=self.theta,
            c=self.c_over_sqrt6 / math.sqrt(6.0),
            p=self.p,
            s=self.s,
        )


class DerivedOut(BaseModel):
    alpha: int
    lam: float
    a_min: float
    a_max: float
    b_first: list[float]
    b_last: float


class CbcIn(ProblemIn):
    n: int = Field(ge=2)
    weights: str = "serendipitous"
    lambda_power: bool = False
    order_factor: bool = False


class CbcOut(BaseModel):
    n: int
    s: int
    z: list[int]
    criterion: float
    seconds: float


class ConvergenceIn(ProblemIn):
    weights: str = "serendipitous"
    n: list[int]
    mesh_exponent: int = Field(default=5, ge=1)
    L: int = Field(default=100, ge=1)
    eval_source: str = "sobol"
    seed: int = 0
    sobol_path: str | None = None
    vector_cache: str | None = None
    lambda_power: bool = False
    order_factor: bool = False


class RecordOut(BaseModel):
    theta: float
    c: float
    p: float
    s: int
    alpha: int
    lam: float
    weights: str
    n: int
    error: float | None  # None encodes a failed row (error = NaN in the CSV)
    seconds: float
    status: str


class RateOut(BaseModel):
    slope: float
    theoretical: float


class ConvergenceOut(BaseModel):
    records: list[RecordOut]
    csv: str
    rate: RateOut | None


class TransformCheckIn(BaseModel):
    samples: int = Field(default=100_000, ge=10_000)
    seed: int = 0


class TransformCheckOut(BaseModel):
    samples: int
    seed: int
    distance: float
    tolerance: float
    passed: bool


class FemCheckIn(BaseModel):
    mesh_exponents: list[int] = Field(default=[3, 4, 5], min_length=2)


class FemCheckOut(BaseModel):
    errors: dict[str, float]
    ratios: dict[str, float]
    tolerance: list[float]
    passed: bool


class OracleResult(BaseModel):
    max_deviation: float | None = None
    relative_error: float | None = None
    tolerance: float
    passed: bool


class KernelCheckIn(BaseModel):
    seed: int = 0


class KernelCheckOut(BaseModel):
    fourier: dict[str, OracleResult]
    dense_solve: dict[str, OracleResult]
    passed: bool


class SurrogateFitIn(ProblemIn):
    weights: str = "serendipitous"
    n: int = Field(ge=2)
    mesh_exponent: int = Field(default=5, ge=1)
    vector_cache: str | None = None


class SurrogateOut(BaseModel):
    id: str
    n: int
    s: int
    weights: str
    mesh_exponent: int
    n_interior: int
    seconds: float


class SurrogateEvalIn(BaseModel):
    points: list[list[float]] = Field(min_length=1)
    include_nodal: bool = False


class SurrogateEvalOut(BaseModel):
    integrals: list[float]
    l2_norms: list[float]
    nodal: list[list[float]] | None = None
