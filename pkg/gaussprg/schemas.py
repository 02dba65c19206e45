"""Pydantic schemas for parameters, serialised families and every JSON report."""
from __future__ import annotations

from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

SCHEMA_VERSION = "1.0"

Verdict = Literal["pass", "fail"]


class TermModel(BaseModel):
    exponents: Dict[str, int] = Field(default_factory=dict, description="Coordinate (decimal string) -> power.")
    coeff: float


class PolynomialModel(BaseModel):
    dimension: int = Field(..., ge=1)
    terms: List[TermModel] = Field(default_factory=list)


class FamilyModel(BaseModel):
    """A function of k polynomial threshold functions."""

    polys: List[PolynomialModel] = Field(..., min_length=1)
    combiner_hex: str = Field(..., description="Truth table; entry m is bit m % 8 of byte m // 8.")


class PrgParams(BaseModel):
    """Full parameter tuple of the generator, including the field it hashes over."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1)
    k: int = Field(..., ge=1)
    d: int = Field(..., ge=1)
    eps: float = Field(..., gt=0, lt=1)
    R: int = Field(..., ge=1)
    L: int = Field(..., ge=1)
    M: int = Field(..., ge=2)
    wiseness: int
    const_c: float = Field(..., gt=0)
    const_c_prime: float = Field(..., gt=0)
    const_c_double_prime: float = Field(..., gt=0)
    polylog_exponent: int = Field(..., ge=0)
    bias_margin: int = Field(..., ge=0)
    modulus: int
    bit_width: int
    overrides_applied: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_wiseness(self) -> "PrgParams":
        if self.wiseness != 2 * self.d * self.R:
            raise ValueError(f"wiseness must equal 2*d*R = {2 * self.d * self.R}")
        if self.modulus < 1 << (self.M + self.bias_margin):
            raise ValueError("field modulus is below 2^(M + bias_margin)")
        return self


class PrgOutput(BaseModel):
    x: Optional[List[float]] = Field(default=None, description="Inline vector, omitted for long outputs.")
    x_digest: str
    n: int
    params: PrgParams
    seed_digest: str
    seed_bits: int
    sidecar: Optional[str] = None


class EstimateCI(BaseModel):
    mean: float
    n_samples: int
    successes: int
    half_width: float
    confidence: float
    sampler_id: str


class GapReport(BaseModel):
    prg_estimate: EstimateCI
    gaussian_estimate: EstimateCI
    gap: float
    gap_bound: float
    target_eps: float
    params: PrgParams
    family_digest: str
    verdict: Verdict


class IndependenceReport(BaseModel):
    p: int
    t: int
    indices: List[int]
    order: int
    seeds_enumerated: int
    subsets_checked: int
    worst_deviation: float = Field(..., description="Largest |count - expected| over all joint outcomes.")
    verdict: Verdict


class CouplingReport(BaseModel):
    M: int
    delta: float
    n_samples: int
    close_count: int
    rate: float
    standard_error: float
    threshold: float
    verdict: Verdict


class AntiConcentrationReport(BaseModel):
    d: int
    eps: float
    n_samples: int
    trials: int
    c: float
    bound: float
    rates: List[float]
    worst_slack: float = Field(..., description="min over trials of bound + 3 SE - rate.")
    verdict: Verdict


class CalibrationReport(BaseModel):
    repetitions: int
    n_samples: int
    covered: int
    coverage: float
    confidence: float
    verdict: Verdict


class MomentReport(BaseModel):
    n_samples: int
    moments: List[float]
    targets: List[float]
    tolerances: List[float]
    verdict: Verdict


class KsReport(BaseModel):
    n_samples: int
    statistic: float
    pvalue: float
    alpha: float
    verdict: Verdict


class LemmaCheck(BaseModel):
    name: str
    verdict: Verdict
    margin: float = Field(..., description="Distance from the failure threshold; negative when failing.")
    detail: Dict[str, Any] = Field(default_factory=dict)


class LemmaSuiteReport(BaseModel):
    checks: List[LemmaCheck]
    verdict: Verdict


class DerivativeBoundReport(BaseModel):
    order: int
    bound: float
    psi_max: float
    rho_max: float
    tail_max: float
    verdict: Verdict


class MollifierFactorModel(BaseModel):
    poly_index: int
    order: int
    numerator: float
    denominator: float
    log_ratio: Optional[float]
    value: float


class MollifierPointModel(BaseModel):
    x: List[float]
    factors: List[MollifierFactorModel]
    g: float


class MollifierReport(BaseModel):
    eps: float
    family_digest: str
    points: List[MollifierPointModel]


class RunConfig(BaseModel):
    command: Literal["params", "gen", "fool", "diag", "schema"]
    options: Dict[str, Any] = Field(default_factory=dict)
    master_seed: Optional[str] = None
    out_path: Optional[str] = None


class ReportEnvelope(BaseModel):
    """Top-level object of every report the command line writes."""

    schema_version: str = SCHEMA_VERSION
    tool_version: str
    config: RunConfig
    master_seed: Optional[str] = None
    verdict: Optional[Verdict] = None
    result: Dict[str, Any]


class ErrorBody(BaseModel):
    error: str
    detail: str
    exit_code: int


def to_verdict(passed: bool) -> Verdict:
    return "pass" if passed else "fail"


__all__ = [
    "AntiConcentrationReport",
    "CalibrationReport",
    "CouplingReport",
    "DerivativeBoundReport",
    "ErrorBody",
    "EstimateCI",
    "FamilyModel",
    "GapReport",
    "IndependenceReport",
    "KsReport",
    "LemmaCheck",
    "LemmaSuiteReport",
    "MollifierFactorModel",
    "MollifierPointModel",
    "MollifierReport",
    "MomentReport",
    "PolynomialModel",
    "PrgOutput",
    "PrgParams",
    "ReportEnvelope",
    "RunConfig",
    "SCHEMA_VERSION",
    "TermModel",
    "Verdict",
    "to_verdict",
]
