"""True-Gaussian baseline sampler."""
from __future__ import annotations

from typing import Any, Mapping

import numpy as np

from .base import SamplerConfigurationError, VectorSampler


class ReferenceSampler(VectorSampler):
    """Chunk c is drawn from PCG64 seeded by SeedSequence([seed, c])."""

    def __init__(self, sampler_id: str, config: Mapping[str, Any] | None = None) -> None:
        super().__init__(sampler_id, config)
        try:
            self._dimension = int(self.config["dimension"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SamplerConfigurationError(f"sampler {sampler_id} needs an integer 'dimension'") from exc
        if self._dimension < 1:
            raise SamplerConfigurationError("dimension must be at least 1")

    @property
    def dimension(self) -> int:
        return self._dimension

    def draw_chunk(self, seed: bytes, chunk_index: int, start: int, size: int) -> np.ndarray:
        sequence = np.random.SeedSequence([int.from_bytes(seed, "big"), chunk_index])
        return np.random.default_rng(sequence).standard_normal((size, self._dimension))


__all__ = ["ReferenceSampler"]
