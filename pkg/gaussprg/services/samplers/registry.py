"""Registry describing which sampler class to instantiate for a sampler id."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Type

from .base import VectorSampler
from .prg_source import PrgSampler, UnderIndependentSampler
from .reference import ReferenceSampler


@dataclass
class SamplerRegistryEntry:
    sampler: Type[VectorSampler]
    config: Mapping[str, Any] = field(default_factory=dict)


def load_default_registry() -> Dict[str, SamplerRegistryEntry]:
    return {
        "prg": SamplerRegistryEntry(sampler=PrgSampler),
        "reference": SamplerRegistryEntry(sampler=ReferenceSampler),
        "under-independent": SamplerRegistryEntry(sampler=UnderIndependentSampler, config={"wiseness": 1}),
    }
