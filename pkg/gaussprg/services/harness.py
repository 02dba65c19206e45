"""Monte Carlo and exhaustive statistical checks for the generator.

Sample loops run over fixed-size chunks, optionally on a thread pool, and are
reduced in chunk order with integer counts, so every report is reproducible
for a given seed regardless of the thread count.
"""
from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

import numpy as np
from scipy import stats

from ..config import Settings, get_settings
from ..schemas import (
    AntiConcentrationReport,
    CalibrationReport,
    CouplingReport,
    EstimateCI,
    GapReport,
    IndependenceReport,
    KsReport,
    MomentReport,
    PrgParams,
    to_verdict,
)
from .errors import DimensionMismatchError, InstanceTooLargeError, ParameterError
from .field_hash import PrimeField, eval_indices
from .gaussian import box_muller_array, coupled_samples, default_delta
from .logging import RunContext, log_event
from .poly import MonomialPoly, evaluate_many, random_polynomial
from .ptf import PtfFunction, eval_ptf_many, family_digest
from .samplers import Chunk, SamplerFactory, VectorSampler

logger = logging.getLogger(__name__)

T = TypeVar("T")

GAUSSIAN_MOMENTS = (0.0, 1.0, 0.0, 3.0)
MOMENT_TOLERANCES = (0.01, 0.02, 0.03, 0.06)
# rows of the seed enumeration processed at once
_ENUMERATION_BATCH = 1 << 18


def hoeffding_half_width(n_samples: int, confidence: float) -> float:
    """sqrt(ln(2 / alpha) / (2N)) with alpha = 1 - confidence."""

    if n_samples < 1:
        raise ParameterError("half width needs at least one sample")
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * n_samples))


def plan_chunks(total: int, chunk_size: int) -> List[Chunk]:
    return [
        Chunk(index=index, start=start, size=min(chunk_size, total - start))
        for index, start in enumerate(range(0, total, chunk_size))
    ]


def map_chunks(fn: Callable[[Chunk], T], chunks: Sequence[Chunk], threads: int) -> List[T]:
    """Apply ``fn`` to every chunk; results come back in chunk order."""

    workers = max(1, min(threads, len(chunks)))
    if workers == 1:
        return [fn(chunk) for chunk in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))


def estimate_mean(
    F: PtfFunction,
    sampler: VectorSampler,
    N: int,
    seed: bytes,
    *,
    settings: Settings | None = None,
    context: RunContext | None = None,
) -> EstimateCI:
    """Empirical mean of F over N sampler draws with a Hoeffding interval."""

    settings = settings or get_settings()
    if N < 100:
        raise ParameterError("estimate_mean needs N >= 100")
    if sampler.dimension != F.dimension:
        raise DimensionMismatchError(
            f"sampler {sampler.sampler_id} draws dimension {sampler.dimension}, family expects {F.dimension}"
        )
    chunks = plan_chunks(N, settings.chunk_size)
    log_event(
        logger,
        context,
        "chunk plan ready",
        level=logging.DEBUG,
        event="harness.chunk_plan",
        sampler_id=sampler.sampler_id,
        chunks=len(chunks),
        threads=settings.threads,
    )
    counts = map_chunks(
        lambda chunk: int(eval_ptf_many(F, sampler.draw(seed, chunk, context)).sum(dtype=np.int64)),
        chunks,
        settings.threads,
    )
    successes = sum(counts)
    estimate = EstimateCI(
        mean=successes / N,
        n_samples=N,
        successes=successes,
        half_width=hoeffding_half_width(N, settings.confidence),
        confidence=settings.confidence,
        sampler_id=sampler.sampler_id,
    )
    log_event(
        logger,
        context,
        "mean estimated",
        event="harness.estimate",
        sampler_id=sampler.sampler_id,
        mean=estimate.mean,
        n_samples=N,
    )
    return estimate


def fooling_gap(
    F: PtfFunction,
    params: PrgParams,
    N: int,
    master_seed: bytes,
    *,
    target_eps: float | None = None,
    prg_sampler: str = "prg",
    factory: SamplerFactory | None = None,
    settings: Settings | None = None,
    context: RunContext | None = None,
) -> GapReport:
    """|E[F(generator)] - E[F(Gaussian)]| with per-draw seeds SHAKE-256(master || i)."""

    settings = settings or get_settings()
    if N < 1000:
        raise ParameterError("fooling_gap needs N >= 1000")
    factory = factory or SamplerFactory()
    pseudo = factory.get_sampler(prg_sampler, params=params)
    reference = factory.get_sampler("reference", dimension=params.n)
    digest = family_digest(F)
    if context:
        context.attach_digest("family", digest)

    prg_estimate = estimate_mean(F, pseudo, N, master_seed, settings=settings, context=context)
    gaussian_estimate = estimate_mean(F, reference, N, master_seed, settings=settings, context=context)
    gap = abs(prg_estimate.mean - gaussian_estimate.mean)
    gap_bound = prg_estimate.half_width + gaussian_estimate.half_width
    target = params.eps if target_eps is None else target_eps
    report = GapReport(
        prg_estimate=prg_estimate,
        gaussian_estimate=gaussian_estimate,
        gap=gap,
        gap_bound=gap_bound,
        target_eps=target,
        params=params,
        family_digest=digest,
        verdict=to_verdict(gap <= target + gap_bound),
    )
    log_event(logger, context, "fooling gap measured", event="harness.gap", gap=gap, verdict=report.verdict)
    return report


def _enumerated_coefficients(p: int, t: int, start: int, stop: int) -> np.ndarray:
    flat = np.arange(start, stop, dtype=np.int64)
    digits = np.unravel_index(flat, (p,) * t)
    return np.stack(digits, axis=-1).astype(np.uint64)


def exhaustive_independence_test(
    p: int,
    t: int,
    indices: Sequence[int],
    order: int | None = None,
    *,
    settings: Settings | None = None,
    context: RunContext | None = None,
) -> IndependenceReport:
    """Enumerate all p^t coefficient tuples of a wiseness-t source and demand exactly
    uniform joint values on every subset of ``indices`` of size at most ``order``.
    """

    settings = settings or get_settings()
    field = PrimeField(modulus=p)
    order = t if order is None else order
    points = sorted({int(j) for j in indices})
    if t < 1 or order < 1:
        raise ParameterError("t and order must be at least 1")
    if len(points) != len(indices):
        raise ParameterError("indices must be distinct")
    if not points or points[0] < 0 or points[-1] >= p:
        raise ParameterError(f"indices must be non-empty and lie in [0, {p})")
    size = p**t
    if size > settings.max_enumeration:
        raise InstanceTooLargeError(size, settings.max_enumeration)

    subsets = [
        subset for width in range(1, min(order, len(points)) + 1) for subset in itertools.combinations(range(len(points)), width)
    ]
    counts = [np.zeros(p ** len(subset), dtype=np.int64) for subset in subsets]
    for start in range(0, size, _ENUMERATION_BATCH):
        coeffs = _enumerated_coefficients(p, t, start, min(size, start + _ENUMERATION_BATCH))
        values = eval_indices(coeffs, points, field).astype(np.int64)
        for subset, tally in zip(subsets, counts):
            code = np.zeros(values.shape[0], dtype=np.int64)
            for column in subset:
                code = code * p + values[:, column]
            tally += np.bincount(code, minlength=tally.shape[0])

    worst = 0.0
    for subset, tally in zip(subsets, counts):
        expected = size / p ** len(subset)
        worst = max(worst, float(np.max(np.abs(tally - expected))))
    report = IndependenceReport(
        p=p,
        t=t,
        indices=points,
        order=order,
        seeds_enumerated=size,
        subsets_checked=len(subsets),
        worst_deviation=worst,
        verdict=to_verdict(worst == 0.0),
    )
    log_event(
        logger,
        context,
        "independence enumerated",
        event="harness.independence",
        p=p,
        t=t,
        order=order,
        verdict=report.verdict,
    )
    return report


def _uniform_pairs(seed: int, chunk: Chunk) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(np.random.SeedSequence([seed, chunk.index]))
    # 1 - U keeps u inside (0, 1]
    u = 1.0 - rng.random(chunk.size)
    v = rng.random(chunk.size)
    return u, v


def coupling_test(
    M: int,
    delta: float | None,
    N: int,
    seed: int,
    *,
    settings: Settings | None = None,
    context: RunContext | None = None,
) -> CouplingReport:
    """Empirical Pr[|X - Y| <= delta] for exact vs grid-truncated Box-Muller, against 1 - delta - 3 SE."""

    settings = settings or get_settings()
    if M < 1:
        raise ParameterError("M must be at least 1")
    if N < 1:
        raise ParameterError("coupling_test needs N >= 1")
    delta = default_delta(M) if delta is None else delta
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must lie in (0, 1), got {delta!r}")

    def close_in(chunk: Chunk) -> int:
        exact, truncated = coupled_samples(*_uniform_pairs(seed, chunk), M)
        return int(np.count_nonzero(np.abs(exact - truncated) <= delta))

    close = sum(map_chunks(close_in, plan_chunks(N, settings.chunk_size), settings.threads))
    rate = close / N
    standard_error = math.sqrt(delta * (1.0 - delta) / N)
    threshold = 1.0 - delta - 3.0 * standard_error
    report = CouplingReport(
        M=M,
        delta=delta,
        n_samples=N,
        close_count=close,
        rate=rate,
        standard_error=standard_error,
        threshold=threshold,
        verdict=to_verdict(rate >= threshold),
    )
    log_event(logger, context, "coupling measured", event="harness.coupling", M=M, rate=rate, verdict=report.verdict)
    return report


def anti_concentration_test(
    d: int,
    eps: float,
    N: int,
    trials: int,
    c: float | None = None,
    *,
    seed: int = 0,
    n: int = 2,
    polys: Sequence[MonomialPoly] | None = None,
    settings: Settings | None = None,
    context: RunContext | None = None,
) -> AntiConcentrationReport:
    """Pr[|p(y)| <= eps] against c * d * eps^(1/d) + 3 SE for unit-norm degree-d polynomials.

    ``polys`` replaces the random instances; they must already be normalized.
    """

    settings = settings or get_settings()
    c = settings.anticoncentration_c if c is None else c
    if d < 1 or N < 1 or trials < 1:
        raise ParameterError("d, N and trials must be at least 1")
    if eps <= 0:
        raise ParameterError("eps must be positive")
    rng = np.random.default_rng(seed)
    instances = list(polys) if polys is not None else [random_polynomial(rng, n, d) for _ in range(trials)]
    bound = c * d * eps ** (1.0 / d)
    rates: List[float] = []
    slacks: List[float] = []
    for poly in instances:
        points = rng.standard_normal((N, poly.dimension))
        rate = float(np.count_nonzero(np.abs(evaluate_many(poly, points)) <= eps)) / N
        standard_error = math.sqrt(max(rate * (1.0 - rate), 1.0 / N) / N)
        rates.append(rate)
        slacks.append(bound + 3.0 * standard_error - rate)
    worst = min(slacks)
    report = AntiConcentrationReport(
        d=d,
        eps=eps,
        n_samples=N,
        trials=len(instances),
        c=c,
        bound=bound,
        rates=rates,
        worst_slack=worst,
        verdict=to_verdict(worst >= 0.0),
    )
    log_event(
        logger,
        context,
        "anti-concentration measured",
        event="harness.anticoncentration",
        d=d,
        eps=eps,
        verdict=report.verdict,
    )
    return report


def ci_calibration_check(
    repetitions: int = 1000,
    n_samples: int = 1000,
    seed: int = 0,
    *,
    settings: Settings | None = None,
) -> CalibrationReport:
    """Coverage of the Hoeffding interval for a Bernoulli(1/2) integrand."""

    settings = settings or get_settings()
    rng = np.random.default_rng(seed)
    means = rng.binomial(n_samples, 0.5, size=repetitions) / n_samples
    half_width = hoeffding_half_width(n_samples, settings.confidence)
    covered = int(np.count_nonzero(np.abs(means - 0.5) <= half_width))
    coverage = covered / repetitions
    return CalibrationReport(
        repetitions=repetitions,
        n_samples=n_samples,
        covered=covered,
        coverage=coverage,
        confidence=settings.confidence,
        verdict=to_verdict(coverage >= settings.confidence),
    )


def box_muller_reference_samples(N: int, seed: int) -> np.ndarray:
    """Box-Muller outputs from double-precision PCG64 uniforms."""

    rng = np.random.default_rng(seed)
    u = 1.0 - rng.random(N)
    v = rng.random(N)
    return box_muller_array(u, v)


def moment_check(
    samples: np.ndarray,
    targets: Sequence[float] = GAUSSIAN_MOMENTS,
    tolerances: Sequence[float] = MOMENT_TOLERANCES,
) -> MomentReport:
    values = np.asarray(samples, dtype=np.float64).ravel()
    moments = [float(np.mean(values**power)) for power in range(1, len(targets) + 1)]
    passed = all(abs(m - target) <= tol for m, target, tol in zip(moments, targets, tolerances))
    return MomentReport(
        n_samples=values.shape[0],
        moments=moments,
        targets=list(targets),
        tolerances=list(tolerances),
        verdict=to_verdict(passed),
    )


def ks_check(samples: np.ndarray, alpha: float = 0.01) -> KsReport:
    """Kolmogorov-Smirnov test against N(0, 1)."""

    values = np.asarray(samples, dtype=np.float64).ravel()
    result = stats.kstest(values, "norm")
    return KsReport(
        n_samples=values.shape[0],
        statistic=float(result.statistic),
        pvalue=float(result.pvalue),
        alpha=alpha,
        verdict=to_verdict(result.pvalue >= alpha),
    )


__all__ = [
    "GAUSSIAN_MOMENTS",
    "MOMENT_TOLERANCES",
    "anti_concentration_test",
    "box_muller_reference_samples",
    "ci_calibration_check",
    "coupling_test",
    "estimate_mean",
    "exhaustive_independence_test",
    "fooling_gap",
    "hoeffding_half_width",
    "ks_check",
    "map_chunks",
    "moment_check",
    "plan_chunks",
]
