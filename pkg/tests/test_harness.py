"""Tests for the estimation harness and its statistical checks."""

import math

import numpy as np
import pytest
from scipy import stats

from gaussprg.config import Settings
from gaussprg.services.errors import DimensionMismatchError, InstanceTooLargeError, ParameterError
from gaussprg.services.harness import (
    anti_concentration_test,
    ci_calibration_check,
    coupling_test,
    estimate_mean,
    exhaustive_independence_test,
    fooling_gap,
    hoeffding_half_width,
    moment_check,
    plan_chunks,
)
from gaussprg.services.logging import RunContext, run_log_store
from gaussprg.services.poly import MonomialPoly, MultiIndex
from gaussprg.services.prg import derive_params
from gaussprg.services.ptf import PtfFunction, constant_family, control_family, random_family
from gaussprg.services.samplers import ReferenceSampler

MASTER = bytes.fromhex("00")


def _build_params(n: int = 4, d: int = 2, k: int = 2, R: int = 2, L: int = 16, M: int = 24):
    return derive_params(k, d, 0.1, n, {"R": R, "L": L, "M": M})


def _settings(**overrides) -> Settings:
    return Settings(**{"chunk_size": 512, **overrides})


def test_hoeffding_half_width_formula() -> None:
    assert hoeffding_half_width(1000, 0.99) == pytest.approx(math.sqrt(math.log(200.0) / 2000.0))


def test_chunk_plan_covers_every_draw_once() -> None:
    chunks = plan_chunks(10, 4)

    assert [(c.index, c.start, c.size) for c in chunks] == [(0, 0, 4), (1, 4, 4), (2, 8, 2)]


def test_estimate_mean_validates_inputs() -> None:
    sampler = ReferenceSampler("reference", {"dimension": 3})

    with pytest.raises(ParameterError):
        estimate_mean(constant_family(3, 1), sampler, 50, MASTER)
    with pytest.raises(DimensionMismatchError):
        estimate_mean(constant_family(2, 1), sampler, 500, MASTER)


def test_estimate_of_constant_one_is_exact() -> None:
    sampler = ReferenceSampler("reference", {"dimension": 2})

    estimate = estimate_mean(constant_family(2, 1), sampler, 1000, MASTER, settings=_settings())

    assert estimate.mean == 1.0
    assert estimate.successes == 1000


def test_estimate_of_sign_of_first_coordinate() -> None:
    F = PtfFunction(polys=(MonomialPoly.variable(2, 0),), combiner=(0, 1))
    sampler = ReferenceSampler("reference", {"dimension": 2})

    estimate = estimate_mean(F, sampler, 100_000, MASTER, settings=_settings(chunk_size=8192))

    assert abs(estimate.mean - 0.5) <= 0.01
    assert estimate.half_width < 0.01


def test_estimate_of_shifted_halfspace_matches_normal_tail() -> None:
    shifted = MonomialPoly(2, {MultiIndex.unit(0): 1.0, MultiIndex(): -1.0})
    F = PtfFunction(polys=(shifted,), combiner=(0, 1))
    sampler = ReferenceSampler("reference", {"dimension": 2})

    estimate = estimate_mean(F, sampler, 100_000, bytes.fromhex("17"), settings=_settings(chunk_size=8192))

    assert abs(estimate.mean - float(stats.norm.sf(1.0))) <= 0.01


def test_estimate_mean_logs_every_chunk_through_the_context() -> None:
    context = RunContext(command="fool")
    sampler = ReferenceSampler("reference", {"dimension": 2})

    estimate_mean(constant_family(2, 1), sampler, 1200, MASTER, settings=_settings(chunk_size=500), context=context)

    chunk_events = [entry["extra"] for entry in run_log_store.get(context.run_id) if entry["extra"].get("event") == "sampler.chunk"]
    assert sorted(event["chunk_index"] for event in chunk_events) == [0, 1, 2]
    assert sum(event["size"] for event in chunk_events) == 1200
    assert all(event["sampler_id"] == "reference" for event in chunk_events)


def test_fooling_gap_of_constant_family_is_zero() -> None:
    context = RunContext(command="fool")

    report = fooling_gap(constant_family(4, 0), _build_params(), 2000, MASTER, settings=_settings(), context=context)

    assert report.gap == 0.0
    assert report.verdict == "pass"
    events = [entry["extra"]["event"] for entry in run_log_store.get(context.run_id)]
    assert events.count("harness.estimate") == 2
    assert events[-1] == "harness.gap"
    assert "family" in context.digests


def test_fooling_gap_on_random_family() -> None:
    F = random_family(1, 4, 2, 2)

    report = fooling_gap(F, _build_params(), 20_000, MASTER, settings=_settings(chunk_size=4096))

    assert report.gap <= 0.03
    assert report.verdict == "pass"


def test_under_independent_source_fails_the_control_family() -> None:
    report = fooling_gap(
        control_family(4),
        _build_params(),
        4000,
        MASTER,
        prg_sampler="under-independent",
        settings=_settings(),
    )

    assert report.prg_estimate.mean == 1.0
    assert report.gap > 0.05
    assert report.verdict == "fail"


def test_fooling_gap_is_independent_of_thread_count() -> None:
    F = random_family(2, 4, 2, 2)
    params = _build_params(L=4)

    single = fooling_gap(F, params, 3000, MASTER, settings=_settings(threads=1, chunk_size=128))
    pooled = fooling_gap(F, params, 3000, MASTER, settings=_settings(threads=8, chunk_size=128))

    assert single == pooled


@pytest.mark.slow
def test_desk_scale_fooling_gap() -> None:
    F = random_family(7, 4, 2, 2)
    params = derive_params(2, 2, 0.1, 4, {"R": 8, "L": 64, "M": 24})

    report = fooling_gap(F, params, 200_000, MASTER)
    control = fooling_gap(control_family(4), params, 200_000, MASTER, prg_sampler="under-independent")

    assert report.gap <= 0.02
    assert control.gap > 0.05


def test_independence_test_refuses_huge_instances() -> None:
    with pytest.raises(InstanceTooLargeError):
        exhaustive_independence_test(13, 3, range(4), settings=_settings(max_enumeration=1000))


def test_independence_test_validates_indices() -> None:
    with pytest.raises(ParameterError):
        exhaustive_independence_test(5, 2, [0, 0, 1])
    with pytest.raises(ParameterError):
        exhaustive_independence_test(5, 2, [1, 5])


def test_coupling_holds_at_sixteen_bits() -> None:
    report = coupling_test(16, 2.0**-7, 100_000, seed=1)

    assert report.verdict == "pass"
    assert report.rate >= 1.0 - 2.0**-7


def test_coupling_is_exact_at_double_precision() -> None:
    report = coupling_test(53, None, 10_000, seed=2)

    assert report.rate == 1.0


def test_coarse_grid_fails_coupling() -> None:
    report = coupling_test(2, 2.0**-7, 10_000, seed=3)

    assert report.verdict == "fail"


def test_coupling_rejects_degenerate_delta() -> None:
    with pytest.raises(ParameterError):
        coupling_test(2, None, 100, seed=0)


def test_coupling_report_is_thread_independent() -> None:
    single = coupling_test(12, None, 20_000, seed=4, settings=_settings(threads=1, chunk_size=1000))
    pooled = coupling_test(12, None, 20_000, seed=4, settings=_settings(threads=8, chunk_size=1000))

    assert single == pooled


def test_anti_concentration_passes_with_declared_constant() -> None:
    report = anti_concentration_test(2, 0.01, 20_000, 5, seed=3)

    assert report.verdict == "pass"
    assert report.c == 5.0
    assert len(report.rates) == 5


def test_anti_concentration_detects_a_concentrated_instance() -> None:
    report = anti_concentration_test(1, 0.01, 20_000, 1, c=1e-3, polys=[MonomialPoly.variable(2, 0)])

    assert report.verdict == "fail"


def test_hoeffding_interval_is_calibrated() -> None:
    report = ci_calibration_check(repetitions=1000, n_samples=1000, seed=5)

    assert report.verdict == "pass"
    assert report.coverage >= 0.99


def test_moment_check_flags_wrong_scale() -> None:
    samples = 2.0 * np.random.default_rng(0).standard_normal(50_000)

    assert moment_check(samples).verdict == "fail"
