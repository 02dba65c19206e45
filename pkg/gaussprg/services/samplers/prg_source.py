"""Samplers backed by the generator: one fresh seed per draw."""
from __future__ import annotations

from typing import Any, Mapping

import numpy as np

from ...schemas import PrgParams
from ..prg import draw_seeds, generate_batch, seed_bytes
from .base import SamplerConfigurationError, VectorSampler


class PrgSampler(VectorSampler):
    """Draw i runs the generator on SHAKE-256(master || i) cut to the exact seed length."""

    wiseness: int | None = None

    def __init__(self, sampler_id: str, config: Mapping[str, Any] | None = None) -> None:
        super().__init__(sampler_id, config)
        params = self.config.get("params")
        if not isinstance(params, PrgParams):
            raise SamplerConfigurationError(f"sampler {sampler_id} needs PrgParams under 'params'")
        self.params = params
        if "wiseness" in self.config:
            try:
                self.wiseness = int(self.config["wiseness"])
            except (TypeError, ValueError) as exc:
                raise SamplerConfigurationError(f"sampler {sampler_id} needs an integer 'wiseness'") from exc
            if self.wiseness < 1:
                raise SamplerConfigurationError("wiseness must be at least 1")

    @property
    def dimension(self) -> int:
        return self.params.n

    @property
    def seed_bytes(self) -> int:
        return seed_bytes(self.params, self.wiseness)

    def draw_chunk(self, seed: bytes, chunk_index: int, start: int, size: int) -> np.ndarray:
        seeds = draw_seeds(seed, start, size, self.seed_bytes)
        return generate_batch(self.params, seeds, wiseness=self.wiseness)


class UnderIndependentSampler(PrgSampler):
    """The generator with low-wiseness blocks; wiseness 1 makes every coordinate of a block equal."""

    wiseness = 1


__all__ = ["PrgSampler", "UnderIndependentSampler"]
