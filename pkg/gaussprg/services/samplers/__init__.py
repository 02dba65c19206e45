"""Vector sampler implementations and factory helpers."""
from .base import Chunk, SamplerConfigurationError, SamplerError, VectorSampler
from .factory import SamplerFactory
from .prg_source import PrgSampler, UnderIndependentSampler
from .reference import ReferenceSampler
from .registry import SamplerRegistryEntry, load_default_registry

__all__ = [
    "Chunk",
    "PrgSampler",
    "ReferenceSampler",
    "SamplerConfigurationError",
    "SamplerError",
    "SamplerFactory",
    "SamplerRegistryEntry",
    "UnderIndependentSampler",
    "VectorSampler",
    "load_default_registry",
]
