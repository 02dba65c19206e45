"""The generator: x = (1/sqrt(L)) * sum_i X_i over L discretized Box-Muller blocks.

Block i draws its u values from seed stream 2i and its v values from stream
2i + 1, each a wiseness-(2dR) polynomial source evaluated at the coordinate
index j. The seed therefore holds exactly ``L * 2 * wiseness * bit_width`` bits.
"""
from __future__ import annotations

import hashlib
import logging
import math
from functools import lru_cache
from pathlib import Path
from typing import Mapping

import numpy as np

from ..config import Settings, get_settings
from ..schemas import PrgOutput, PrgParams
from .errors import InsufficientSeedError, ParameterError
from .field_hash import PrimeField, slice_coefficients
from .gaussian import block_coordinates
from .logging import RunContext, log_event

logger = logging.getLogger(__name__)

OVERRIDABLE = ("R", "L", "M")


@lru_cache(maxsize=64)
def _field(modulus: int, grid_bits: int, bias_margin: int) -> PrimeField:
    return PrimeField(modulus=modulus, grid_bits=grid_bits, bias_margin=bias_margin)


def params_field(params: PrgParams) -> PrimeField:
    return _field(params.modulus, params.M, params.bias_margin)


def derive_params(
    k: int,
    d: int,
    eps: float,
    n: int,
    overrides: Mapping[str, int] | None = None,
    *,
    settings: Settings | None = None,
    context: RunContext | None = None,
) -> PrgParams:
    """Fill R, L, M from the asymptotic formulas unless overridden, then pick the field."""

    settings = settings or get_settings()
    if min(k, d, n) < 1:
        raise ParameterError("k, d and n must be at least 1")
    if not 0.0 < eps < 1.0:
        raise ParameterError(f"eps must lie in (0, 1), got {eps!r}")
    overrides = dict(overrides or {})
    unknown = sorted(set(overrides) - set(OVERRIDABLE))
    if unknown:
        raise ParameterError(f"unknown parameter overrides: {unknown}")

    log_kd = math.log2(k * d / eps)
    R = math.ceil(settings.const_c * log_kd)
    L = math.ceil(settings.const_c_prime * k**4 * d**9 / eps**2 * log_kd**settings.polylog_exponent)
    M = max(
        settings.min_grid_bits,
        math.ceil(settings.const_c_double_prime * k * d * math.log2(k * d * n / eps)),
    )
    R = int(overrides.get("R", R))
    L = int(overrides.get("L", L))
    M = int(overrides.get("M", M))
    if R < 1 or L < 1:
        raise ParameterError("R and L must be at least 1")
    if M < settings.min_grid_bits:
        raise ParameterError(f"M must be at least {settings.min_grid_bits}")

    field = PrimeField.for_grid(M, settings.bias_margin)
    params = PrgParams(
        n=n,
        k=k,
        d=d,
        eps=eps,
        R=R,
        L=L,
        M=M,
        wiseness=2 * d * R,
        const_c=settings.const_c,
        const_c_prime=settings.const_c_prime,
        const_c_double_prime=settings.const_c_double_prime,
        polylog_exponent=settings.polylog_exponent,
        bias_margin=settings.bias_margin,
        modulus=field.modulus,
        bit_width=field.bit_width,
        overrides_applied=sorted(overrides),
    )
    log_event(
        logger,
        context,
        "parameters derived",
        event="params.derived",
        R=R,
        L=L,
        M=M,
        bit_width=field.bit_width,
        overrides=params.overrides_applied or None,
    )
    return params


def seed_length(params: PrgParams, wiseness: int | None = None) -> int:
    """Exact seed bits: L blocks x 2 sources x wiseness coefficients x bit width."""

    return params.L * 2 * (wiseness or params.wiseness) * params.bit_width


def seed_bytes(params: PrgParams, wiseness: int | None = None) -> int:
    return -(-seed_length(params, wiseness) // 8)


def generate_batch(params: PrgParams, seeds: np.ndarray, *, wiseness: int | None = None) -> np.ndarray:
    """Run the generator on every row of a ``(count, nbytes)`` uint8 seed matrix.

    ``wiseness`` replaces 2dR for under-independent control sources.
    """

    t = wiseness or params.wiseness
    if t < 1:
        raise ParameterError("wiseness must be at least 1")
    field = params_field(params)
    seeds = np.asarray(seeds, dtype=np.uint8)
    if seeds.ndim != 2:
        raise ParameterError("seed batch must be two-dimensional")
    needed = seed_length(params, t)
    if seeds.shape[1] * 8 < needed:
        raise InsufficientSeedError(needed, seeds.shape[1] * 8)

    coeffs = slice_coefficients(seeds, 2 * params.L * t, field)
    coeffs = coeffs.reshape(seeds.shape[0], params.L, 2, t)
    blocks = block_coordinates(coeffs[:, :, 0, :], coeffs[:, :, 1, :], range(params.n), params.M, field)
    acc = np.zeros((seeds.shape[0], params.n), dtype=np.float64)
    for i in range(params.L):
        acc += blocks[:, i, :]
    return acc / math.sqrt(params.L)


def seed_digest(seed: bytes) -> str:
    return hashlib.sha256(seed).hexdigest()


def vector_digest(x: np.ndarray) -> str:
    """sha256 over the little-endian float64 encoding."""

    return hashlib.sha256(np.asarray(x, dtype="<f8").tobytes()).hexdigest()


def generate(
    params: PrgParams,
    seed: bytes,
    *,
    sidecar_path: str | Path | None = None,
    settings: Settings | None = None,
    context: RunContext | None = None,
) -> PrgOutput:
    """Deterministic generator output; vectors past the inline limit are kept only by digest and sidecar."""

    settings = settings or get_settings()
    needed = seed_length(params)
    x = generate_vector(params, seed)
    sidecar = str(write_sidecar(sidecar_path, x)) if sidecar_path is not None else None
    digest = seed_digest(seed)
    if context:
        context.attach_digest("seed", digest)
    log_event(logger, context, "vector generated", event="prg.generate", n=params.n, L=params.L, seed_bits=needed)
    return PrgOutput(
        x=x.tolist() if params.n <= settings.inline_vector_limit else None,
        x_digest=vector_digest(x),
        n=params.n,
        params=params,
        seed_digest=digest,
        seed_bits=needed,
        sidecar=sidecar,
    )


def generate_vector(params: PrgParams, seed: bytes) -> np.ndarray:
    needed = seed_length(params)
    if len(seed) * 8 < needed:
        raise InsufficientSeedError(needed, len(seed) * 8)
    return generate_batch(params, np.frombuffer(seed, dtype=np.uint8)[None, :])[0]


def generate_reference(n: int, rng_seed: int, count: int) -> np.ndarray:
    """``count`` standard Gaussian vectors from PCG64 seeded by ``rng_seed``."""

    if count < 1 or n < 1:
        raise ParameterError("count and n must be at least 1")
    return np.random.default_rng(rng_seed).standard_normal((count, n))


def draw_seed(master_seed: bytes, draw_index: int, n_bytes: int) -> bytes:
    """seed_i = SHAKE-256(master || i as 8 big-endian bytes)."""

    return hashlib.shake_256(master_seed + draw_index.to_bytes(8, "big")).digest(n_bytes)


def draw_seeds(master_seed: bytes, start: int, count: int, n_bytes: int) -> np.ndarray:
    rows = b"".join(draw_seed(master_seed, start + offset, n_bytes) for offset in range(count))
    return np.frombuffer(rows, dtype=np.uint8).reshape(count, n_bytes)


def expand_seed(seed: bytes, n_bits: int, *, raw: bool = False) -> bytes:
    """Stretch a short seed to ``n_bits`` with SHAKE-256; long seeds pass through untouched."""

    if len(seed) * 8 >= n_bits:
        return seed
    if raw:
        raise InsufficientSeedError(n_bits, len(seed) * 8)
    return hashlib.shake_256(seed).digest(-(-n_bits // 8))


def write_sidecar(path: str | Path, x: np.ndarray) -> Path:
    """Write the vector as raw little-endian float64."""

    target = Path(path)
    target.write_bytes(np.asarray(x, dtype="<f8").tobytes())
    return target


def read_sidecar(path: str | Path) -> np.ndarray:
    return np.frombuffer(Path(path).read_bytes(), dtype="<f8").astype(np.float64)


__all__ = [
    "OVERRIDABLE",
    "derive_params",
    "draw_seed",
    "draw_seeds",
    "expand_seed",
    "generate",
    "generate_batch",
    "generate_reference",
    "generate_vector",
    "params_field",
    "read_sidecar",
    "seed_bytes",
    "seed_digest",
    "seed_length",
    "vector_digest",
    "write_sidecar",
]
