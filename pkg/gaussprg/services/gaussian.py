"""Box-Muller sampling from grid uniforms, and coupled exact/truncated pairs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import DomainError
from .field_hash import KWisePolySource, PrimeField, eval_index, eval_indices, to_grid, to_grid_values

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, slots=True)
class UnitPair:
    u: float
    v: float

    def __post_init__(self) -> None:
        if not 0.0 < self.u <= 1.0:
            raise DomainError(f"u must lie in (0, 1], got {self.u!r}")
        if not 0.0 <= self.v <= 1.0:
            raise DomainError(f"v must lie in [0, 1], got {self.v!r}")


@dataclass(frozen=True, slots=True)
class CoupledSample:
    exact_y: float
    truncated_x: float
    delta_bound: float

    @property
    def close(self) -> bool:
        return abs(self.exact_y - self.truncated_x) <= self.delta_bound


def default_delta(M: int) -> float:
    """Coupling radius 2^(-M/2 + 1) used when none is given."""

    return 2.0 ** (-M / 2 + 1)


def box_muller(pair: UnitPair) -> float:
    """Cosine branch: sqrt(-2 ln u) * cos(2 pi v)."""

    return math.sqrt(-2.0 * math.log(pair.u)) * math.cos(TWO_PI * pair.v)


def box_muller_array(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if np.any(u <= 0.0):
        raise DomainError("u must be strictly positive")
    return np.sqrt(-2.0 * np.log(u)) * np.cos(TWO_PI * np.asarray(v, dtype=np.float64))


def sample_block_coordinate(u_src: KWisePolySource, v_src: KWisePolySource, j: int, M: int) -> float:
    """X_{i,j}: Box-Muller of the two grid values both sources take at index ``j``."""

    u_grid = to_grid(eval_index(u_src, j), M)
    v_grid = to_grid(eval_index(v_src, j), M)
    return box_muller(UnitPair(u_grid.value, v_grid.value))


def block_coordinates(
    u_coeffs: np.ndarray,
    v_coeffs: np.ndarray,
    indices: Sequence[int],
    M: int,
    field: PrimeField,
) -> np.ndarray:
    """Batch ``sample_block_coordinate`` over stacked source coefficients ``(..., t)``."""

    u = to_grid_values(eval_indices(u_coeffs, indices, field), M)
    v = to_grid_values(eval_indices(v_coeffs, indices, field), M)
    return box_muller_array(u, v)


def truncate_to_grid(u: np.ndarray, v: np.ndarray, M: int) -> Tuple[np.ndarray, np.ndarray]:
    """Floor both coordinates onto the 2^-M grid, keeping u at least 2^-M."""

    scale = math.ldexp(1.0, M)
    step = 1.0 / scale
    u_grid = np.maximum(np.floor(np.asarray(u, dtype=np.float64) * scale) / scale, step)
    v_grid = np.floor(np.asarray(v, dtype=np.float64) * scale) / scale
    return u_grid, v_grid


def coupled_sample(pair: UnitPair, M: int, delta: float | None = None) -> CoupledSample:
    u_grid, v_grid = truncate_to_grid(np.array([pair.u]), np.array([pair.v]), M)
    truncated = box_muller(UnitPair(float(u_grid[0]), float(v_grid[0])))
    return CoupledSample(
        exact_y=box_muller(pair),
        truncated_x=truncated,
        delta_bound=default_delta(M) if delta is None else delta,
    )


def coupled_samples(u: np.ndarray, v: np.ndarray, M: int) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised coupling: returns ``(exact_y, truncated_x)`` for uniform pairs."""

    u_grid, v_grid = truncate_to_grid(u, v, M)
    return box_muller_array(u, v), box_muller_array(u_grid, v_grid)


__all__ = [
    "CoupledSample",
    "UnitPair",
    "block_coordinates",
    "box_muller",
    "box_muller_array",
    "coupled_sample",
    "coupled_samples",
    "default_delta",
    "sample_block_coordinate",
    "truncate_to_grid",
]
