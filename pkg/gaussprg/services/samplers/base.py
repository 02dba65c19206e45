"""Abstract vector sampler used by the estimation harness."""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from ..errors import DimensionMismatchError, SamplerConfigurationError, SamplerError
from ..logging import RunContext

logger = logging.getLogger(__name__)


@dataclass(slots=True, frozen=True)
class Chunk:
    """A contiguous run of draw indices ``[start, start + size)``."""

    index: int
    start: int
    size: int


class VectorSampler(ABC):
    """Common interface for sources of ``R^n`` vectors."""

    def __init__(self, sampler_id: str, config: Mapping[str, Any] | None = None) -> None:
        self.sampler_id = sampler_id
        self.config = dict(config or {})

    @property
    @abstractmethod
    def dimension(self) -> int:
        """Length of every vector the sampler draws."""

    def draw(self, seed: bytes, chunk: Chunk, context: RunContext | None = None) -> np.ndarray:
        """Draw a chunk and check its shape."""

        block = self.draw_chunk(seed, chunk.index, chunk.start, chunk.size)
        if block.shape != (chunk.size, self.dimension):
            raise DimensionMismatchError(
                f"sampler {self.sampler_id} returned shape {block.shape}, expected {(chunk.size, self.dimension)}"
            )
        if context:
            context.debug(
                logger,
                "sampler chunk drawn",
                event="sampler.chunk",
                sampler_id=self.sampler_id,
                chunk_index=chunk.index,
                size=chunk.size,
            )
        return block

    @abstractmethod
    def draw_chunk(self, seed: bytes, chunk_index: int, start: int, size: int) -> np.ndarray:
        """Return a ``(size, dimension)`` array of draws ``start .. start + size - 1``.

        Output must depend only on the arguments so chunked runs are reproducible.
        """


__all__ = ["Chunk", "SamplerConfigurationError", "SamplerError", "VectorSampler"]
