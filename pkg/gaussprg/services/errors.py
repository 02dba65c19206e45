"""Error hierarchy shared by the generator, the polynomial stack and the harness."""
from __future__ import annotations


class GaussPrgError(Exception):
    """Base error for every failure raised by the package."""


class ParameterError(GaussPrgError, ValueError):
    """Raised when numeric parameters fall outside their documented ranges."""


class InsufficientSeedError(GaussPrgError):
    """Raised when a seed cannot supply the bits a source or block needs."""

    def __init__(self, needed_bits: int, available_bits: int) -> None:
        super().__init__(
            f"insufficient seed entropy: need {needed_bits} bits, seed supplies {available_bits}"
        )
        self.needed_bits = needed_bits
        self.available_bits = available_bits


class IndexOutOfFieldError(GaussPrgError):
    """Raised when an evaluation index is not an element of the field."""


class DimensionMismatchError(GaussPrgError, ValueError):
    """Raised when a vector does not match the dimension of a polynomial or family."""


class DomainError(GaussPrgError, ValueError):
    """Raised when an argument lies outside a function's mathematical domain."""


class InstanceTooLargeError(GaussPrgError):
    """Raised when an exhaustive enumeration would exceed the configured cap."""

    def __init__(self, size: int, limit: int) -> None:
        super().__init__(f"instance too large: {size} seeds to enumerate, limit is {limit}")
        self.size = size
        self.limit = limit


class SamplerError(GaussPrgError):
    """Base error for vector sampler failures."""


class SamplerConfigurationError(SamplerError):
    """Raised when a sampler id is unknown or its configuration is malformed."""


__all__ = [
    "DimensionMismatchError",
    "DomainError",
    "GaussPrgError",
    "IndexOutOfFieldError",
    "InstanceTooLargeError",
    "InsufficientSeedError",
    "ParameterError",
    "SamplerConfigurationError",
    "SamplerError",
]
