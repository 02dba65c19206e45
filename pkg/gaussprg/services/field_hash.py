"""t-wise independent values on an M-bit grid from polynomial hashing over a prime field.

A source of wiseness ``t`` is a polynomial of degree ``t - 1`` with coefficients
in F_p; its values at ``t`` distinct indices are independent and uniform when the
coefficients are. Field elements are folded onto the grid
``{2^-M, 2 * 2^-M, ..., 1}`` by ``(elem mod 2^M) + 1``.

Seeds are read as big-endian bit streams. A source with ``stream_id`` ``s`` and
wiseness ``t`` takes its coefficients from bits ``[s*t*bw, (s+1)*t*bw)`` where
``bw`` is the bit width of ``p``; each ``bw``-bit slice is reduced mod ``p``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from sympy import isprime, nextprime

from .errors import IndexOutOfFieldError, InsufficientSeedError, ParameterError

logger = logging.getLogger(__name__)

# Largest bit width the uint64 slicing path handles: a slice may start up to
# seven bits into its first byte and must fit in one 64-bit word.
_FAST_SLICE_BITS = 57
_UINT64_LIMIT = 1 << 64


@dataclass(frozen=True, slots=True)
class PrimeField:
    """Prime field F_p, optionally tied to the grid precision it must dominate."""

    modulus: int
    grid_bits: int | None = None
    bias_margin: int | None = None

    def __post_init__(self) -> None:
        if self.modulus < 2 or not isprime(self.modulus):
            raise ParameterError(f"field modulus {self.modulus} is not prime")
        if self.grid_bits is not None:
            margin = self.bias_margin or 0
            if self.modulus < 1 << (self.grid_bits + margin):
                raise ParameterError(
                    f"field modulus {self.modulus} is below 2^{self.grid_bits + margin} "
                    f"(M={self.grid_bits}, bias_margin={margin})"
                )

    @classmethod
    def for_grid(cls, grid_bits: int, bias_margin: int) -> "PrimeField":
        """Smallest prime p >= 2^(grid_bits + bias_margin)."""

        floor = 1 << (grid_bits + bias_margin)
        modulus = int(nextprime(floor - 1))
        return cls(modulus=modulus, grid_bits=grid_bits, bias_margin=bias_margin)

    @property
    def bit_width(self) -> int:
        """ceil(log2 p); p is odd for every field we build, so this is the bit length."""

        return (self.modulus - 1).bit_length()

    def uint64_safe(self, max_index: int) -> bool:
        """Whether Horner evaluation at indices <= max_index stays inside uint64."""

        return self.modulus * (max_index + 1) < _UINT64_LIMIT


@dataclass(frozen=True, slots=True)
class KWisePolySource:
    field: PrimeField
    wiseness: int
    coeffs: Tuple[int, ...]
    stream_id: int = 0

    def __post_init__(self) -> None:
        if self.wiseness < 1:
            raise ParameterError("wiseness must be at least 1")
        if len(self.coeffs) != self.wiseness:
            raise ParameterError(f"expected {self.wiseness} coefficients, got {len(self.coeffs)}")
        p = self.field.modulus
        if any(not 0 <= c < p for c in self.coeffs):
            raise ParameterError("source coefficients must lie in [0, p)")


@dataclass(frozen=True, slots=True)
class GridValue:
    """The grid point numerator * 2^-precision, never zero."""

    numerator: int
    precision: int

    def __post_init__(self) -> None:
        if not 1 <= self.numerator <= 1 << self.precision:
            raise ParameterError(f"grid numerator {self.numerator} outside [1, 2^{self.precision}]")

    @property
    def value(self) -> float:
        return math.ldexp(float(self.numerator), -self.precision)


def source_bits(t: int, stream_id: int, field: PrimeField) -> int:
    """Seed bits a source needs, counting the slices of every lower stream id."""

    return (stream_id + 1) * t * field.bit_width


def derive_source(seed_bytes: bytes, t: int, stream_id: int, field: PrimeField) -> KWisePolySource:
    """Cut the coefficient slice of ``stream_id`` out of the seed bit stream."""

    if t < 1:
        raise ParameterError("wiseness must be at least 1")
    if stream_id < 0:
        raise ParameterError("stream_id must be non-negative")
    available = len(seed_bytes) * 8
    needed = source_bits(t, stream_id, field)
    if available < needed:
        raise InsufficientSeedError(needed, available)

    width = field.bit_width
    mask = (1 << width) - 1
    seed_int = int.from_bytes(seed_bytes, "big")
    coeffs = []
    for i in range(t):
        start = (stream_id * t + i) * width
        raw = (seed_int >> (available - start - width)) & mask
        coeffs.append(raw % field.modulus)
    return KWisePolySource(field=field, wiseness=t, coeffs=tuple(coeffs), stream_id=stream_id)


def eval_index(src: KWisePolySource, j: int) -> int:
    """Horner evaluation of the source polynomial at index ``j``."""

    p = src.field.modulus
    if j < 0 or j >= p:
        raise IndexOutOfFieldError(f"index {j} exceeds field of order {p}")
    acc = 0
    for coeff in reversed(src.coeffs):
        acc = (acc * j + coeff) % p
    return acc


def to_grid(elem: int, M: int) -> GridValue:
    return GridValue(numerator=(elem % (1 << M)) + 1, precision=M)


def grid_histogram(p: int, M: int) -> np.ndarray:
    """Number of field elements landing on each of the 2^M grid cells."""

    cells = 1 << M
    quotient, remainder = divmod(p, cells)
    counts = np.full(cells, quotient, dtype=np.int64)
    counts[:remainder] += 1
    return counts


def slice_coefficients(seeds: np.ndarray, n_coeffs: int, field: PrimeField) -> np.ndarray:
    """Batch form of the seed slicing: ``(count, nbytes)`` uint8 -> ``(count, n_coeffs)`` field elements.

    Returns uint64 when the bit width allows it and an object array of Python
    ints otherwise.
    """

    seeds = np.asarray(seeds, dtype=np.uint8)
    if seeds.ndim != 2:
        raise ParameterError("seed batch must be two-dimensional")
    count, nbytes = seeds.shape
    width = field.bit_width
    needed = n_coeffs * width
    if nbytes * 8 < needed:
        raise InsufficientSeedError(needed, nbytes * 8)

    if width <= _FAST_SLICE_BITS:
        offsets = np.arange(n_coeffs, dtype=np.int64) * width
        byte_index = offsets // 8
        shifts = (offsets % 8).astype(np.uint64)
        padded = np.zeros((count, nbytes + 8), dtype=np.uint8)
        padded[:, :nbytes] = seeds
        window = padded[:, byte_index[:, None] + np.arange(8)]
        words = np.ascontiguousarray(window).view(">u8")[..., 0].astype(np.uint64)
        raw = (words << shifts) >> np.uint64(64 - width)
        return raw % np.uint64(field.modulus)

    mask = (1 << width) - 1
    out = np.empty((count, n_coeffs), dtype=object)
    total = nbytes * 8
    for row in range(count):
        seed_int = int.from_bytes(seeds[row].tobytes(), "big")
        for i in range(n_coeffs):
            start = i * width
            out[row, i] = ((seed_int >> (total - start - width)) & mask) % field.modulus
    return out


def eval_indices(coeffs: np.ndarray, indices: Sequence[int], field: PrimeField) -> np.ndarray:
    """Evaluate many sources at many indices: ``(..., t)`` coefficients -> ``(..., len(indices))``."""

    p = field.modulus
    index_list = [int(j) for j in indices]
    if any(j < 0 or j >= p for j in index_list):
        raise IndexOutOfFieldError(f"index exceeds field of order {p}")
    t = coeffs.shape[-1]
    max_index = max(index_list, default=0)

    if coeffs.dtype == np.uint64 and field.uint64_safe(max_index):
        points = np.asarray(index_list, dtype=np.uint64)
        modulus = np.uint64(p)
        acc = np.zeros(coeffs.shape[:-1] + (len(index_list),), dtype=np.uint64)
        for i in range(t - 1, -1, -1):
            acc = acc * points + coeffs[..., i, None]
            acc %= modulus
        return acc

    points = np.array(index_list, dtype=object)
    wide = coeffs.astype(object)
    acc = np.zeros(coeffs.shape[:-1] + (len(index_list),), dtype=object)
    for i in range(t - 1, -1, -1):
        acc = (acc * points + wide[..., i, None]) % p
    return acc


def to_grid_values(elems: np.ndarray, M: int) -> np.ndarray:
    """Vectorised ``to_grid(...).value`` as float64."""

    if elems.dtype == np.uint64 and M <= 63:
        numerators = (elems & np.uint64((1 << M) - 1)) + np.uint64(1)
        return np.ldexp(numerators.astype(np.float64), -M)
    cells = 1 << M
    flat = [math.ldexp(float((int(e) % cells) + 1), -M) for e in np.ravel(elems)]
    return np.asarray(flat, dtype=np.float64).reshape(np.shape(elems))


__all__ = [
    "GridValue",
    "KWisePolySource",
    "PrimeField",
    "derive_source",
    "eval_index",
    "eval_indices",
    "grid_histogram",
    "slice_coefficients",
    "source_bits",
    "to_grid",
    "to_grid_values",
]
