"""Functions of k polynomial threshold functions: F(x) = f(sign p_1(x), ..., sign p_k(x))."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..schemas import FamilyModel
from .errors import DimensionMismatchError, ParameterError
from .poly import MonomialPoly, MultiIndex, evaluate, evaluate_many, poly_from_model, poly_to_model, random_polynomial

# Truth tables for k = 2 keyed by the bit-packed sign vector s_0 + 2 s_1.
AND_TABLE: Tuple[int, ...] = (0, 0, 0, 1)
OR_TABLE: Tuple[int, ...] = (0, 1, 1, 1)


@dataclass(frozen=True)
class PtfFunction:
    polys: Tuple[MonomialPoly, ...]
    combiner: Tuple[int, ...]

    def __post_init__(self) -> None:
        polys = tuple(self.polys)
        combiner = tuple(int(bit) for bit in self.combiner)
        if not polys:
            raise ParameterError("a family needs at least one polynomial")
        dimensions = {poly.dimension for poly in polys}
        if len(dimensions) != 1:
            raise DimensionMismatchError(f"polynomials disagree on dimension: {sorted(dimensions)}")
        if len(combiner) != 1 << len(polys):
            raise ParameterError(f"combiner needs {1 << len(polys)} entries, got {len(combiner)}")
        if any(bit not in (0, 1) for bit in combiner):
            raise ParameterError("combiner entries must be 0 or 1")
        object.__setattr__(self, "polys", polys)
        object.__setattr__(self, "combiner", combiner)

    @property
    def k(self) -> int:
        return len(self.polys)

    @property
    def dimension(self) -> int:
        return self.polys[0].dimension

    @property
    def degree(self) -> int:
        return max(poly.degree for poly in self.polys)


def sign_of(v: float) -> int:
    """1 iff v >= 0; negative zero counts as zero."""

    return 1 if v >= 0 else 0


def sign_index(signs: Sequence[int]) -> int:
    """Bit-pack a sign vector, polynomial i at bit i."""

    return sum(int(bit) << i for i, bit in enumerate(signs))


def eval_ptf(F: PtfFunction, x: Sequence[float] | np.ndarray) -> int:
    point = np.asarray(x, dtype=np.float64).ravel()
    if point.shape[0] != F.dimension:
        raise DimensionMismatchError(f"expected a point of dimension {F.dimension}, got {point.shape[0]}")
    return F.combiner[sign_index(sign_of(evaluate(poly, point)) for poly in F.polys)]


def eval_ptf_many(F: PtfFunction, points: np.ndarray) -> np.ndarray:
    """Vectorised ``eval_ptf`` over the rows of an ``(N, n)`` matrix, as uint8."""

    matrix = np.asarray(points, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != F.dimension:
        raise DimensionMismatchError(f"expected points of shape (N, {F.dimension}), got {matrix.shape}")
    index = np.zeros(matrix.shape[0], dtype=np.int64)
    for i, poly in enumerate(F.polys):
        index |= (evaluate_many(poly, matrix) >= 0).astype(np.int64) << i
    return np.asarray(F.combiner, dtype=np.uint8)[index]


def random_family(rng_seed: int, n: int, d: int, k: int, normalize: bool = True) -> PtfFunction:
    """Gaussian Hermite coefficients per polynomial and a uniform truth table."""

    if min(n, d, k) < 1:
        raise ParameterError("random families need n, d, k >= 1")
    rng = np.random.default_rng(rng_seed)
    polys = tuple(random_polynomial(rng, n, d, normalize=normalize) for _ in range(k))
    combiner = tuple(int(bit) for bit in rng.integers(0, 2, size=1 << k))
    return PtfFunction(polys=polys, combiner=combiner)


def control_family(n: int, width: float = 0.1) -> PtfFunction:
    """Indicator of |x_0 - x_1| <= width.

    Sources that give every coordinate the same value always land inside the
    band, while true Gaussians rarely do.
    """

    if n < 2:
        raise ParameterError("the control family needs n >= 2")
    x0, x1 = MultiIndex.unit(0), MultiIndex.unit(1)
    const = MultiIndex()
    upper = MonomialPoly(n, {x0: 1.0, x1: -1.0, const: width})
    lower = MonomialPoly(n, {x0: -1.0, x1: 1.0, const: width})
    return PtfFunction(polys=(upper, lower), combiner=AND_TABLE)


def constant_family(n: int, value: int) -> PtfFunction:
    if value not in (0, 1):
        raise ParameterError("constant families take the value 0 or 1")
    return PtfFunction(polys=(MonomialPoly.variable(n, 0),), combiner=(value, value))


def combiner_hex(combiner: Sequence[int]) -> str:
    packed = bytearray((len(combiner) + 7) // 8)
    for m, bit in enumerate(combiner):
        if bit:
            packed[m // 8] |= 1 << (m % 8)
    return packed.hex()


def combiner_from_hex(text: str, k: int) -> Tuple[int, ...]:
    try:
        packed = bytes.fromhex(text)
    except ValueError as exc:
        raise ParameterError(f"combiner_hex is not valid hex: {text!r}") from exc
    size = 1 << k
    if len(packed) != (size + 7) // 8:
        raise ParameterError(f"combiner_hex must hold {(size + 7) // 8} bytes for k={k}")
    return tuple((packed[m // 8] >> (m % 8)) & 1 for m in range(size))


def family_to_model(F: PtfFunction) -> FamilyModel:
    return FamilyModel(polys=[poly_to_model(poly) for poly in F.polys], combiner_hex=combiner_hex(F.combiner))


def family_from_model(model: FamilyModel) -> PtfFunction:
    polys = tuple(poly_from_model(poly) for poly in model.polys)
    return PtfFunction(polys=polys, combiner=combiner_from_hex(model.combiner_hex, len(polys)))


def family_digest(F: PtfFunction) -> str:
    """sha256 of the canonical JSON encoding."""

    return hashlib.sha256(family_to_model(F).model_dump_json().encode("utf-8")).hexdigest()


__all__ = [
    "AND_TABLE",
    "OR_TABLE",
    "PtfFunction",
    "combiner_from_hex",
    "combiner_hex",
    "constant_family",
    "control_family",
    "eval_ptf",
    "eval_ptf_many",
    "family_digest",
    "family_from_model",
    "family_to_model",
    "random_family",
    "sign_index",
    "sign_of",
]
