"""Request and response models for the HTTP service.

Responses carry schema_version so clients can detect breaking changes;
the current schema is "1".
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field

SCHEMA_VERSION = "1"


class HealthResponse(BaseModel):
    status: str
    version: str
    schema_version: str = SCHEMA_VERSION


class LsdRequest(BaseModel):
    c1: float
    c2: float
    grid_points: int = Field(default=0, ge=0, le=100_000)


class LsdResponse(BaseModel):
    schema_version: str = SCHEMA_VERSION
    c1: float
    c2: float
    d_minus: float
    d_plus: float
    r_c: float
    xi_tw: float
    grid_x: list[float] = []
    grid_density: list[float] = []


class EstimateRequest(BaseModel):
    """Spectrum input, either raw data blocks or eigenvalues.

    Raw blocks `x` (p rows) and `y` (q rows) hold one variable per row
    and one observation per column; they are centered by default
    (effective sample size n - 1).  Alternatively pass `eigenvalues`
    (descending) with explicit p, q, and the effective n.
    """

    x: Optional[list[list[float]]] = None
    y: Optional[list[list[float]]] = None
    eigenvalues: Optional[list[float]] = None
    p: Optional[int] = None
    q: Optional[int] = None
    n: Optional[int] = None
    center: bool = True
    alpha: float = 0.05
    epsilon: Optional[float] = None


class ConstantsModel(BaseModel):
    c1: float
    c2: float
    d_minus: float
    d_plus: float
    r_c: float
    xi_tw: float
    epsilon_n: float


class TestReportModel(BaseModel):
    name: str
    statistic: float
    quantile: float
    alpha: float
    reject: bool
    p_value: Optional[float] = None
    p_value_clamped: bool = False
    inputs: dict = {}


class SpikeEstimateModel(BaseModel):
    k_hat: int
    epsilon_n: float
    r_hat: list[float] = []
    rho_hat: list[float] = []
    groups: list[list[int]] = []
    clamp_flags: list[bool] = []


class EstimateResponse(BaseModel):
    schema_version: str = SCHEMA_VERSION
    p: int
    q: int
    effective_n: int
    eigenvalues: list[float]
    constants: ConstantsModel
    estimate: SpikeEstimateModel
    reports: list[TestReportModel]


class StudyRequest(BaseModel):
    """Exactly one of `preset` or `config` selects the study."""

    preset: Optional[str] = None
    config: Optional[dict] = None
    seed: Optional[int] = None
    reps: Optional[int] = None
    workers: Optional[int] = None
    alpha: Optional[float] = None


class StudyResponse(BaseModel):
    schema_version: str = SCHEMA_VERSION
    study: str
    rows: list[dict]
    csv: str
    summary: str
    histograms: dict = {}
    meta: dict = {}


class ErrorBody(BaseModel):
    category: str
    message: str


class ErrorResponse(BaseModel):
    error: ErrorBody
