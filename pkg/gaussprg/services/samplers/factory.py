"""Factory responsible for instantiating samplers from the registry."""
from __future__ import annotations

import logging
from typing import Any, Dict, Mapping

from ..errors import ParameterError
from .base import SamplerConfigurationError, VectorSampler
from .registry import SamplerRegistryEntry, load_default_registry

logger = logging.getLogger(__name__)


class SamplerFactory:
    """Resolve sampler ids into configured sampler instances."""

    def __init__(self, registry: Mapping[str, SamplerRegistryEntry] | None = None) -> None:
        self._registry: Dict[str, SamplerRegistryEntry] = dict(registry or load_default_registry())

    @property
    def sampler_ids(self) -> list[str]:
        return sorted(self._registry)

    def get_sampler(self, sampler_id: str, **config: Any) -> VectorSampler:
        sampler_id = (sampler_id or "").strip()
        if not sampler_id:
            raise SamplerConfigurationError("sampler_id is required")
        entry = self._registry.get(sampler_id)
        if not entry:
            logger.warning("unknown sampler requested", extra={"sampler_id": sampler_id})
            raise SamplerConfigurationError(f"unknown sampler: {sampler_id}")
        merged = {**entry.config, **config}
        try:
            return entry.sampler(sampler_id=sampler_id, config=merged)
        except (ParameterError, TypeError, ValueError) as exc:
            logger.exception("sampler misconfigured", extra={"sampler_id": sampler_id})
            raise SamplerConfigurationError(str(exc)) from exc


__all__ = ["SamplerConfigurationError", "SamplerFactory"]
