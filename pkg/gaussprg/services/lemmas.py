"""Numerical checks of the analytic facts the construction relies on.

Each check returns a ``LemmaCheck`` with a signed margin (negative when it
fails). Big-O constants are replaced by the fixed test constants in
``Settings``; the checks establish plausibility at small sizes, not the
constants themselves.
"""
from __future__ import annotations

import logging
import math
from typing import Callable, List

import numpy as np
from numpy.polynomial import hermite_e

from ..config import Settings, get_settings
from ..schemas import LemmaCheck, LemmaSuiteReport, to_verdict
from .errors import ParameterError
from .harness import anti_concentration_test
from .logging import RunContext, log_event
from .mollifier import MAX_CHECKED_ORDER, derivative_bound_check, rho
from .poly import (
    ZERO_INDEX,
    HermiteExpansion,
    MonomialPoly,
    MultiIndex,
    derivative,
    derivative_support,
    evaluate,
    evaluate_many,
    from_hermite,
    gradient_norm_squared,
    gradient_norms,
    hermite_evaluate,
    hermite_evaluate_many,
    l2_norm,
    multi_indices_upto,
    noise_operator,
    random_expansion,
    random_polynomial,
    shift_expansion,
    smooth,
    to_hermite,
)

logger = logging.getLogger(__name__)

EXPANSION_LAMBDAS = (0.0, 0.1, 0.5)


def _result(name: str, passed: bool, margin: float, **detail) -> LemmaCheck:
    return LemmaCheck(name=name, verdict=to_verdict(passed), margin=float(margin), detail=detail)


def orthonormality_check(max_order: int = 6, n: int = 2, nodes: int = 8) -> LemmaCheck:
    """Gram matrix of h_alpha, |alpha| <= max_order, by tensor Gauss-HermiteE quadrature."""

    x, w = hermite_e.hermegauss(nodes)
    w = w / math.sqrt(2.0 * math.pi)
    grid = np.stack(np.meshgrid(*([x] * n), indexing="ij"), axis=-1).reshape(-1, n)
    weights = np.prod(np.stack(np.meshgrid(*([w] * n), indexing="ij"), axis=-1).reshape(-1, n), axis=1)
    indices = multi_indices_upto(n, max_order)
    table = np.stack([hermite_evaluate_many(HermiteExpansion(n, {alpha: 1.0}), grid) for alpha in indices])
    gram = (table * weights) @ table.T
    error = float(np.max(np.abs(gram - np.eye(len(indices)))))
    tolerance = 1e-9
    return _result("orthonormality", error <= tolerance, tolerance - error, max_error=error, basis_size=len(indices))


def _max_coefficient_gap(p: MonomialPoly, q: MonomialPoly) -> float:
    keys = set(p.terms) | set(q.terms)
    return max((abs(p.coefficient(alpha) - q.coefficient(alpha)) for alpha in keys), default=0.0)


def round_trip_check(rng: np.random.Generator, trials: int = 20, max_degree: int = 6) -> LemmaCheck:
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, 4))
        d = int(rng.integers(0, max_degree + 1))
        p = random_polynomial(rng, n, d)
        scale = max(1.0, max((abs(c) for c in p.terms.values()), default=0.0))
        worst = max(worst, _max_coefficient_gap(p, from_hermite(to_hermite(p))) / scale)
    tolerance = 1e-12
    return _result("hermite_round_trip", worst <= tolerance, tolerance - worst, max_relative_error=worst)


def l2_closed_form_check() -> LemmaCheck:
    """||y^2||_2 = sqrt(E[y^4]) = sqrt(3)."""

    norm = l2_norm(to_hermite(MonomialPoly(1, {MultiIndex.unit(0, 2): 1.0})))
    error = abs(norm - math.sqrt(3.0))
    return _result("l2_norm_y_squared", error <= 1e-12, 1e-12 - error, norm=norm)


def noise_semigroup_check(rng: np.random.Generator) -> LemmaCheck:
    e = random_expansion(rng, 3, 4)
    composed = noise_operator(noise_operator(e, 0.5), 0.25)
    dyadic_exact = composed.terms == noise_operator(e, 0.125).terms
    composed = noise_operator(noise_operator(e, 0.7), 1.3)
    direct = noise_operator(e, 0.7 * 1.3)
    relative = max(
        abs(composed.coefficient(alpha) - direct.coefficient(alpha)) / abs(direct.coefficient(alpha))
        for alpha in direct.terms
    )
    return _result(
        "noise_semigroup",
        dyadic_exact and relative <= 1e-14,
        1e-14 - relative,
        dyadic_exact=dyadic_exact,
        max_relative_error=relative,
    )


def parseval_check(rng: np.random.Generator, trials: int = 3, N: int = 100_000) -> LemmaCheck:
    worst = math.inf
    for _ in range(trials):
        e = random_expansion(rng, 2, 4)
        squares = hermite_evaluate_many(e, rng.standard_normal((N, 2))) ** 2
        standard_error = float(np.std(squares)) / math.sqrt(N)
        worst = min(worst, 3.0 * standard_error - abs(float(np.mean(squares)) - l2_norm(e) ** 2))
    return _result("parseval", worst >= 0.0, worst)


def expansion_identity_check(
    rng: np.random.Generator,
    cases: int = 50,
    points: int = 20,
    fault: float = 0.0,
) -> LemmaCheck:
    """Evaluating the shift expansion at y must reproduce p(x + sqrt(lam) y).

    ``fault`` is added to the constant coefficient of every expansion to prove
    the check can fail.
    """

    worst = 0.0
    exact_matches = 0
    for case in range(cases):
        lam = EXPANSION_LAMBDAS[case % len(EXPANSION_LAMBDAS)]
        n = int(rng.integers(1, 4))
        d = int(rng.integers(1, 5))
        p = random_polynomial(rng, n, d)
        x = rng.standard_normal(n)
        expansion = shift_expansion(p, x, lam)
        if fault:
            terms = dict(expansion.terms)
            terms[ZERO_INDEX] = terms.get(ZERO_INDEX, 0.0) + fault
            expansion = HermiteExpansion(n, terms)
        for y in rng.standard_normal((points, n)):
            lhs = hermite_evaluate(expansion, y)
            rhs = evaluate(p, x + math.sqrt(lam) * y)
            if lam == 0.0 and lhs == rhs:
                exact_matches += 1
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    tolerance = 1e-8
    return _result(
        "shift_expansion_identity",
        worst <= tolerance,
        tolerance - worst,
        max_relative_error=worst,
        exact_matches_at_zero=exact_matches,
        fault=fault,
    )


def hypercontractivity_check(rng: np.random.Generator, trials: int = 5, N: int = 100_000) -> LemmaCheck:
    """Monte Carlo ||f||_4 <= ||U_sqrt(3) f||_2 + 3 SE for degree <= 3."""

    worst = math.inf
    for _ in range(trials):
        e = random_expansion(rng, 2, int(rng.integers(1, 4)))
        fourth = hermite_evaluate_many(e, rng.standard_normal((N, 2))) ** 4
        m4 = float(np.mean(fourth))
        # delta method for the fourth root
        standard_error = float(np.std(fourth)) / math.sqrt(N) / (4.0 * m4 ** 0.75)
        bound = l2_norm(noise_operator(e, math.sqrt(3.0)))
        worst = min(worst, bound + 3.0 * standard_error - m4 ** 0.25)
    return _result("hypercontractivity", worst >= 0.0, worst)


def gradient_growth_check(
    rng: np.random.Generator,
    c: float,
    eps: float = 0.05,
    d: int = 3,
    n: int = 3,
    N: int = 10_000,
) -> LemmaCheck:
    """Pr[||D^t p(y)|| <= (c/eps) ||D^(t-1) p(y)|| for all t <= d] >= 1 - eps d^3."""

    p = random_polynomial(rng, n, d)
    points = rng.standard_normal((N, n))
    norms = [gradient_norms(p, points, t) for t in range(d + 1)]
    event = np.ones(N, dtype=bool)
    for t in range(1, d + 1):
        event &= norms[t] <= (c / eps) * norms[t - 1]
    rate = float(np.count_nonzero(event)) / N
    standard_error = math.sqrt(max(rate * (1.0 - rate), 1.0 / N) / N)
    bound = 1.0 - eps * d**3
    margin = rate + 3.0 * standard_error - bound
    return _result("gradient_growth", margin >= 0.0, margin, rate=rate, bound=bound, c=c)


def perturbation_check(
    rng: np.random.Generator,
    c: float,
    B: float = 2.0,
    delta: float = 1e-3,
    d: int = 3,
    n: int = 3,
    polys: int = 10,
    points: int = 100,
) -> LemmaCheck:
    """|p(x) - p(x')| <= delta n^(d/2) (c B)^d for unit-norm p, ||x||_inf <= B, ||x - x'||_inf <= delta."""

    bound = delta * n ** (d / 2) * (c * B) ** d
    worst = 0.0
    for _ in range(polys):
        p = random_polynomial(rng, n, d)
        x = rng.uniform(-B, B, size=(points, n))
        shifted = x + rng.uniform(-delta, delta, size=(points, n))
        worst = max(worst, float(np.max(np.abs(evaluate_many(p, x) - evaluate_many(p, shifted)))))
    return _result("perturbation", worst <= bound, bound - worst, max_change=worst, bound=bound, c=c)


def derivative_concentration_check(rng: np.random.Generator, trials: int = 10, R: int = 2) -> LemmaCheck:
    """At R = 2 the left side is a sum of squared non-constant Hermite coefficients.

    E||D^t p(x + sqrt(lam) y) - D^t phi(x)||^2 is read off the shift expansions of
    each d^alpha p and compared with sum_{j>t} (lam d R)^(j-t) ||D^j phi(x)||^2.
    """

    if R != 2:
        raise ParameterError("the closed form only covers R = 2")
    worst = math.inf
    for trial in range(trials):
        n = int(rng.integers(1, 4))
        d = int(rng.integers(1, 4))
        lam = (0.1, 0.3)[trial % 2]
        p = random_polynomial(rng, n, d)
        x = rng.standard_normal(n)
        phi = smooth(p, lam)
        for t in range(d + 1):
            lhs_sq = math.fsum(
                coeff * coeff
                for alpha in derivative_support(p, t)
                for beta, coeff in shift_expansion(derivative(p, alpha), x, lam).terms.items()
                if beta.total > 0
            )
            rhs_sq = math.fsum(
                (lam * d * R) ** (j - t) * gradient_norm_squared(phi, x, j) for j in range(t + 1, d + 1)
            )
            worst = min(worst, math.sqrt(rhs_sq) * (1.0 + 1e-9) + 1e-12 - math.sqrt(lhs_sq))
    return _result("derivative_concentration", worst >= 0.0, worst, R=R)


def rho_seam_check(steps: tuple[float, ...] = (1e-2, 1e-4, 1e-6)) -> LemmaCheck:
    upper = [abs(rho(1.0 - h) - 1.0) for h in steps]
    lower = [rho(h) for h in steps]
    monotone = all(a >= b for a, b in zip(upper, upper[1:])) and all(a >= b for a, b in zip(lower, lower[1:]))
    tail = max(upper[-1], lower[-1])
    return _result("rho_seams", monotone and tail <= 1e-10, 1e-10 - tail, upper=upper, lower=lower)


def derivative_bound_checks() -> List[LemmaCheck]:
    # order 1 is excluded: max |rho'| is about 2 while 1^6 = 1
    checks = []
    for t in range(2, MAX_CHECKED_ORDER + 1):
        report = derivative_bound_check(t)
        margin = report.bound - max(report.psi_max, report.rho_max)
        checks.append(
            _result(
                f"derivative_bound_t{t}",
                report.verdict == "pass",
                margin,
                psi_max=report.psi_max,
                rho_max=report.rho_max,
                bound=report.bound,
            )
        )
    return checks


def anti_concentration_check(seed: int, settings: Settings) -> LemmaCheck:
    report = anti_concentration_test(
        d=2,
        eps=0.01,
        N=20_000,
        trials=5,
        c=settings.anticoncentration_c,
        seed=seed,
        settings=settings,
    )
    return _result("anti_concentration", report.verdict == "pass", report.worst_slack, bound=report.bound, rates=report.rates)


def lemma_suite(
    seed: int = 0,
    *,
    expansion_fault: float = 0.0,
    settings: Settings | None = None,
    context: RunContext | None = None,
) -> LemmaSuiteReport:
    """Run every check with child generators of ``seed`` and aggregate the verdicts."""

    settings = settings or get_settings()
    streams = iter(np.random.SeedSequence(seed).spawn(16))

    def rng() -> np.random.Generator:
        return np.random.default_rng(next(streams))

    runners: List[Callable[[], LemmaCheck | List[LemmaCheck]]] = [
        lambda: orthonormality_check(),
        lambda: round_trip_check(rng()),
        lambda: l2_closed_form_check(),
        lambda: noise_semigroup_check(rng()),
        lambda: parseval_check(rng()),
        lambda: expansion_identity_check(rng(), fault=expansion_fault),
        lambda: hypercontractivity_check(rng()),
        lambda: gradient_growth_check(rng(), c=settings.growth_c),
        lambda: perturbation_check(rng(), c=settings.perturbation_c),
        lambda: derivative_concentration_check(rng()),
        lambda: rho_seam_check(),
        lambda: derivative_bound_checks(),
        lambda: anti_concentration_check(seed, settings),
    ]
    checks: List[LemmaCheck] = []
    for runner in runners:
        outcome = runner()
        for check in outcome if isinstance(outcome, list) else [outcome]:
            log_event(
                logger,
                context,
                "lemma check finished",
                event="lemmas.check",
                check=check.name,
                verdict=check.verdict,
                margin=check.margin,
            )
            checks.append(check)
    failed = sum(1 for check in checks if check.verdict == "fail")
    report = LemmaSuiteReport(checks=checks, verdict=to_verdict(failed == 0))
    log_event(
        logger,
        context,
        "lemma suite finished",
        event="lemmas.summary",
        passed=len(checks) - failed,
        failed=failed,
    )
    return report


__all__ = [
    "EXPANSION_LAMBDAS",
    "anti_concentration_check",
    "derivative_bound_checks",
    "derivative_concentration_check",
    "expansion_identity_check",
    "gradient_growth_check",
    "hypercontractivity_check",
    "l2_closed_form_check",
    "lemma_suite",
    "noise_semigroup_check",
    "orthonormality_check",
    "parseval_check",
    "perturbation_check",
    "rho_seam_check",
    "round_trip_check",
]
