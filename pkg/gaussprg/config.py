"""Settings for the generator and the statistical harness."""
from __future__ import annotations

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Central configuration loaded from ``GAUSSPRG_*`` environment variables."""

    threads: int = Field(default=4, ge=1, le=64, description="Upper bound on worker threads used by sample loops.")
    chunk_size: int = Field(
        default=4096,
        ge=64,
        description="Fixed number of draws per chunk; reductions always run in chunk order.",
    )
    bias_margin: int = Field(default=32, ge=0, le=128, description="The field satisfies p >= 2^(M + bias_margin).")
    min_grid_bits: int = Field(default=2, ge=2, description="Lower clamp applied to the derived grid precision M.")
    const_c: float = Field(default=2.0, gt=0, description="Constant C in R = ceil(C log2(kd/eps)).")
    const_c_prime: float = Field(default=1.0, gt=0, description="Constant C' in the block count L.")
    const_c_double_prime: float = Field(default=1.0, gt=0, description="Constant C'' in the grid precision M.")
    polylog_exponent: int = Field(default=3, ge=0, description="Exponent of log2(kd/eps) in the default block count.")
    confidence: float = Field(default=0.99, gt=0, lt=1, description="Confidence level of Hoeffding intervals.")
    anticoncentration_c: float = Field(default=5.0, gt=0)
    growth_c: float = Field(default=10.0, gt=0)
    perturbation_c: float = Field(default=8.0, gt=0)
    inline_vector_limit: int = Field(
        default=64,
        ge=1,
        description="Generated vectors longer than this are reported by digest instead of inline.",
    )
    max_enumeration: int = Field(default=10_000_000, ge=1, description="Cap on seeds enumerated by exhaustive tests.")

    class Config:
        env_prefix = "GAUSSPRG_"
        env_file = ".env"
        extra = "ignore"


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return a cached ``Settings`` instance."""

    return Settings()
