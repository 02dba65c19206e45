"""Tests for the sparse polynomial and Hermite machinery."""

import math

import numpy as np
import pytest

from gaussprg.schemas import PolynomialModel
from gaussprg.services.errors import DimensionMismatchError, DomainError
from gaussprg.services.poly import (
    ZERO_INDEX,
    HermiteExpansion,
    MonomialPoly,
    MultiIndex,
    derivative,
    evaluate,
    evaluate_many,
    from_hermite,
    gradient_norm,
    gradient_norms,
    hermite_eval,
    hermite_evaluate,
    l2_norm,
    multi_indices,
    noise_operator,
    poly_from_model,
    poly_to_model,
    random_expansion,
    random_polynomial,
    shift_expansion,
    smooth,
    to_hermite,
)

Y = MultiIndex.unit(0)
Y2 = MultiIndex.unit(0, 2)


def _square(dimension: int = 1) -> MonomialPoly:
    return MonomialPoly(dimension, {Y2: 1.0})


def _naive_evaluate(p: MonomialPoly, x) -> float:
    total = 0.0
    for alpha, coeff in p.terms.items():
        term = coeff
        for coord in range(p.dimension):
            term *= x[coord] ** alpha.get(coord)
        total += term
    return total


def test_multi_index_drops_zero_exponents() -> None:
    alpha = MultiIndex.of({2: 3, 0: 0, 1: 1})

    assert alpha.exponents == ((1, 1), (2, 3))
    assert alpha.total == 4
    assert alpha.factorial == 6
    assert MultiIndex.of({0: 0}) == ZERO_INDEX


def test_zero_coefficients_are_not_stored() -> None:
    p = MonomialPoly(2, {Y: 0.0, ZERO_INDEX: 2.0})

    assert list(p.terms) == [ZERO_INDEX]
    assert p.degree == 0


def test_evaluate_simple_polynomials() -> None:
    assert evaluate(MonomialPoly.constant(3, 5.0), [1.0, 2.0, 3.0]) == 5.0
    assert evaluate(_square(), [3.0]) == 9.0


def test_evaluate_rejects_wrong_dimension() -> None:
    with pytest.raises(DimensionMismatchError):
        evaluate(_square(2), [1.0])


def test_evaluate_matches_naive_reference() -> None:
    rng = np.random.default_rng(3)
    p = random_polynomial(rng, 3, 3, normalize=False)
    points = rng.standard_normal((10, 3))

    for x in points:
        assert evaluate(p, x) == pytest.approx(_naive_evaluate(p, x), rel=1e-12, abs=1e-12)
    np.testing.assert_allclose(evaluate_many(p, points), [evaluate(p, x) for x in points], rtol=1e-12, atol=1e-12)


def test_hermite_eval_low_orders() -> None:
    assert hermite_eval(ZERO_INDEX, [0.7]) == 1.0
    assert hermite_eval(Y, [2.0]) == 2.0
    assert hermite_eval(Y2, [2.0]) == pytest.approx(3.0 / math.sqrt(2.0), rel=1e-15)


def test_to_hermite_examples() -> None:
    assert to_hermite(MonomialPoly.variable(1, 0)).terms == {Y: 1.0}
    assert to_hermite(MonomialPoly.constant(1, 1.0)).terms == {ZERO_INDEX: 1.0}

    square = to_hermite(_square())
    assert square.coefficient(ZERO_INDEX) == 1.0
    assert square.coefficient(Y2) == pytest.approx(math.sqrt(2.0), rel=1e-15)
    for y in (-2.0, -0.5, 0.0, 1.3, 4.0):
        assert hermite_evaluate(square, [y]) == pytest.approx(y * y, rel=1e-12, abs=1e-12)


def test_from_hermite_inverts_examples() -> None:
    expansion = HermiteExpansion(1, {ZERO_INDEX: 1.0, Y2: math.sqrt(2.0)})

    back = from_hermite(expansion)

    assert back.coefficient(Y2) == pytest.approx(1.0, rel=1e-15)
    assert abs(back.coefficient(ZERO_INDEX)) <= 1e-15


def test_round_trip_on_random_polynomials() -> None:
    rng = np.random.default_rng(8)
    for _ in range(10):
        p = random_polynomial(rng, 2, 6, normalize=False)
        back = from_hermite(to_hermite(p))
        for alpha in set(p.terms) | set(back.terms):
            assert back.coefficient(alpha) == pytest.approx(p.coefficient(alpha), abs=1e-12 * max(1.0, abs(p.coefficient(alpha))))


def test_l2_norm_examples() -> None:
    assert l2_norm(HermiteExpansion(2, {MultiIndex.of({0: 1, 1: 2}): 1.0})) == 1.0
    assert l2_norm(to_hermite(_square())) == pytest.approx(math.sqrt(3.0), abs=1e-12)

    e = random_expansion(np.random.default_rng(1), 2, 3, normalize=False)
    assert l2_norm(e.scaled(-2.5)) == pytest.approx(2.5 * l2_norm(e), rel=1e-14)


def test_noise_operator_limits_and_composition() -> None:
    e = random_expansion(np.random.default_rng(2), 2, 4)

    assert noise_operator(e, 1.0).terms == e.terms
    assert noise_operator(e, 0.0).terms == {ZERO_INDEX: e.coefficient(ZERO_INDEX)}
    assert noise_operator(noise_operator(e, 0.5), 0.5).terms == noise_operator(e, 0.25).terms


def test_gradient_norm_examples() -> None:
    p = _square()

    assert gradient_norm(p, [3.0], 0) == 9.0
    assert gradient_norm(p, [3.0], 1) == 6.0
    assert gradient_norm(p, [3.0], 2) == 2.0
    assert gradient_norm(p, [3.0], 3) == 0.0


def test_gradient_norm_matches_finite_differences() -> None:
    rng = np.random.default_rng(4)
    p = random_polynomial(rng, 2, 3, normalize=False)
    x = rng.standard_normal(2)
    h = 1e-4
    partials = []
    for coord in range(2):
        step = np.zeros(2)
        step[coord] = h
        partials.append((evaluate(p, x + step) - evaluate(p, x - step)) / (2 * h))

    assert gradient_norm(p, x, 1) == pytest.approx(math.hypot(*partials), rel=1e-5)


def test_vectorised_gradient_norms_agree() -> None:
    rng = np.random.default_rng(6)
    p = random_polynomial(rng, 3, 3)
    points = rng.standard_normal((5, 3))

    for t in range(4):
        np.testing.assert_allclose(gradient_norms(p, points, t), [gradient_norm(p, x, t) for x in points], rtol=1e-10, atol=1e-12)


def test_derivative_of_monomial() -> None:
    p = MonomialPoly(2, {MultiIndex.of({0: 3, 1: 1}): 2.0})

    assert derivative(p, MultiIndex.of({0: 2})).terms == {MultiIndex.of({0: 1, 1: 1}): 12.0}
    assert derivative(p, MultiIndex.of({1: 2})).terms == {}


def test_multi_indices_counts() -> None:
    assert len(multi_indices(3, 2)) == 6
    assert multi_indices(2, 0) == [ZERO_INDEX]


def test_smooth_examples() -> None:
    p = _square()
    linear = MonomialPoly(2, {Y: 2.0, MultiIndex.unit(1): -1.0, ZERO_INDEX: 0.5})

    assert smooth(p, 0.0) is p
    assert evaluate(smooth(p, 0.5), [1.0]) == pytest.approx(1.5, rel=1e-12)
    for lam in (0.1, 0.5, 0.9):
        smoothed = smooth(linear, lam)
        for alpha in linear.terms:
            assert smoothed.coefficient(alpha) == pytest.approx(linear.coefficient(alpha), rel=1e-12)


def test_smooth_rejects_lambda_at_one() -> None:
    with pytest.raises(DomainError):
        smooth(_square(), 1.0)


def test_shift_expansion_examples() -> None:
    p = MonomialPoly.variable(1, 0)

    at_zero = shift_expansion(_square(), [1.5], 0.0)
    linear = shift_expansion(p, [0.7], 0.3)

    assert at_zero.terms == {ZERO_INDEX: 2.25}
    assert linear.coefficient(ZERO_INDEX) == pytest.approx(0.7, rel=1e-14)
    assert linear.coefficient(Y) == pytest.approx(math.sqrt(0.3), rel=1e-14)


def test_shift_expansion_reproduces_shifted_evaluation() -> None:
    rng = np.random.default_rng(12)
    for lam in (0.0, 0.1, 0.5):
        p = random_polynomial(rng, 3, 4)
        x = rng.standard_normal(3)
        expansion = shift_expansion(p, x, lam)
        for y in rng.standard_normal((20, 3)):
            expected = evaluate(p, x + math.sqrt(lam) * y)
            assert hermite_evaluate(expansion, y) == pytest.approx(expected, rel=1e-8, abs=1e-8)


def test_random_polynomials_are_normalized() -> None:
    p = random_polynomial(np.random.default_rng(0), 2, 3)

    assert l2_norm(to_hermite(p)) == pytest.approx(1.0, abs=1e-12)


def test_polynomial_model_round_trip_is_canonical() -> None:
    p = MonomialPoly(3, {MultiIndex.of({2: 1}): -1.0, MultiIndex.of({0: 2, 1: 1}): 0.5, ZERO_INDEX: 3.0})

    model = poly_to_model(p)
    again = poly_from_model(PolynomialModel.model_validate_json(model.model_dump_json()))

    assert again.terms == p.terms
    assert model.terms[0].exponents == {}
    assert model.terms[-1].exponents == {"0": 2, "1": 1}
