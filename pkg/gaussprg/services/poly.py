"""Sparse polynomials on Gaussian space and their normalized Hermite expansions.

Polynomials are kept in two dual sparse forms keyed by ``MultiIndex``:
monomial coefficients (``MonomialPoly``) and coefficients over the orthonormal
basis ``h_alpha(y) = prod_j h_{alpha_j}(y_j)`` with ``h_k = He_k / sqrt(k!)``
(``HermiteExpansion``). Basis changes use exact integer tables and accumulate
with ``math.fsum``.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from ..schemas import PolynomialModel, TermModel
from .errors import DimensionMismatchError, DomainError, ParameterError


@dataclass(frozen=True, slots=True)
class MultiIndex:
    """Sparse exponent vector; zero exponents are never stored."""

    exponents: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        cleaned = tuple(sorted((int(coord), int(power)) for coord, power in self.exponents if power != 0))
        coords = [coord for coord, _ in cleaned]
        if len(set(coords)) != len(coords):
            raise ParameterError("multi-index repeats a coordinate")
        if any(coord < 0 or power < 0 for coord, power in cleaned):
            raise ParameterError("multi-index coordinates and exponents must be non-negative")
        object.__setattr__(self, "exponents", cleaned)

    @classmethod
    def of(cls, mapping: Mapping[int, int] | None = None) -> "MultiIndex":
        return cls(tuple((mapping or {}).items()))

    @classmethod
    def unit(cls, coord: int, power: int = 1) -> "MultiIndex":
        return cls(((coord, power),))

    @property
    def total(self) -> int:
        return sum(power for _, power in self.exponents)

    @property
    def factorial(self) -> int:
        return math.prod(math.factorial(power) for _, power in self.exponents)

    @property
    def width(self) -> int:
        """Smallest dimension containing every coordinate of the index."""

        return self.exponents[-1][0] + 1 if self.exponents else 0

    @property
    def sort_key(self) -> Tuple[int, Tuple[Tuple[int, int], ...]]:
        return self.total, self.exponents

    def get(self, coord: int) -> int:
        for c, power in self.exponents:
            if c == coord:
                return power
        return 0

    def as_dict(self) -> Dict[int, int]:
        return dict(self.exponents)

    def dominates(self, other: "MultiIndex") -> bool:
        """Whether every exponent of ``other`` is at most the matching exponent here."""

        return all(self.get(coord) >= power for coord, power in other.exponents)


ZERO_INDEX = MultiIndex()


@dataclass(frozen=True)
class _SparseForm:
    dimension: int
    terms: Dict[MultiIndex, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ParameterError("dimension must be at least 1")
        cleaned: Dict[MultiIndex, float] = {}
        for alpha, coeff in sorted(self.terms.items(), key=lambda item: item[0].sort_key):
            if alpha.width > self.dimension:
                raise DimensionMismatchError(
                    f"multi-index {alpha.as_dict()} does not fit dimension {self.dimension}"
                )
            value = float(coeff)
            if not math.isfinite(value):
                raise ParameterError("coefficients must be finite")
            if value != 0.0:
                cleaned[alpha] = value
        object.__setattr__(self, "terms", cleaned)

    @property
    def degree(self) -> int:
        return max((alpha.total for alpha in self.terms), default=0)

    def coefficient(self, alpha: MultiIndex) -> float:
        return self.terms.get(alpha, 0.0)

    def scaled(self, factor: float):
        return type(self)(self.dimension, {alpha: coeff * factor for alpha, coeff in self.terms.items()})


@dataclass(frozen=True)
class MonomialPoly(_SparseForm):
    """Real polynomial as a sparse map from monomial exponents to coefficients."""

    @classmethod
    def constant(cls, dimension: int, value: float) -> "MonomialPoly":
        return cls(dimension, {ZERO_INDEX: value})

    @classmethod
    def variable(cls, dimension: int, coord: int) -> "MonomialPoly":
        return cls(dimension, {MultiIndex.unit(coord): 1.0})

    @classmethod
    def from_pairs(cls, dimension: int, pairs: Iterable[Tuple[Mapping[int, int], float]]) -> "MonomialPoly":
        terms: Dict[MultiIndex, float] = {}
        for exponents, coeff in pairs:
            alpha = MultiIndex.of(exponents)
            terms[alpha] = terms.get(alpha, 0.0) + coeff
        return cls(dimension, terms)


@dataclass(frozen=True)
class HermiteExpansion(_SparseForm):
    """Coefficients over the normalized multivariate Hermite basis."""

    @property
    def coeffs(self) -> Dict[MultiIndex, float]:
        return self.terms


def _as_point(x: Sequence[float] | np.ndarray, dimension: int) -> List[float]:
    values = np.asarray(x, dtype=np.float64).ravel()
    if values.shape[0] != dimension:
        raise DimensionMismatchError(f"expected a point of dimension {dimension}, got {values.shape[0]}")
    return values.tolist()


def _as_points(points: np.ndarray, dimension: int) -> np.ndarray:
    matrix = np.asarray(points, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != dimension:
        raise DimensionMismatchError(f"expected points of shape (N, {dimension}), got {matrix.shape}")
    return matrix


def _monomial(alpha: MultiIndex, values: Sequence[float]) -> float:
    return math.prod(values[coord] ** power for coord, power in alpha.exponents)


def evaluate(p: MonomialPoly, x: Sequence[float] | np.ndarray) -> float:
    values = _as_point(x, p.dimension)
    return math.fsum(coeff * _monomial(alpha, values) for alpha, coeff in p.terms.items())


def evaluate_many(p: MonomialPoly, points: np.ndarray) -> np.ndarray:
    """Evaluate at every row of an ``(N, n)`` matrix, summing terms in canonical order."""

    matrix = _as_points(points, p.dimension)
    acc = np.zeros(matrix.shape[0], dtype=np.float64)
    for alpha, coeff in p.terms.items():
        term = np.full(matrix.shape[0], coeff, dtype=np.float64)
        for coord, power in alpha.exponents:
            term = term * matrix[:, coord] ** power
        acc += term
    return acc


def hermite_values(k_max: int, y: float | np.ndarray) -> np.ndarray:
    """``h_0 .. h_{k_max}`` at ``y`` via h_{j+1} = (y h_j - sqrt(j) h_{j-1}) / sqrt(j+1)."""

    if k_max < 0:
        raise ParameterError("Hermite order must be non-negative")
    y = np.asarray(y, dtype=np.float64)
    out = np.empty((k_max + 1,) + y.shape, dtype=np.float64)
    out[0] = 1.0
    if k_max >= 1:
        out[1] = y
    for j in range(1, k_max):
        out[j + 1] = (y * out[j] - math.sqrt(j) * out[j - 1]) / math.sqrt(j + 1)
    return out


def _hermite_scalar(k: int, y: float) -> float:
    previous, current = 1.0, y
    if k == 0:
        return previous
    for j in range(1, k):
        previous, current = current, (y * current - math.sqrt(j) * previous) / math.sqrt(j + 1)
    return current


def hermite_eval(alpha: MultiIndex, y: Sequence[float] | np.ndarray) -> float:
    values = np.asarray(y, dtype=np.float64).ravel().tolist()
    if alpha.width > len(values):
        raise DimensionMismatchError(f"point of length {len(values)} is too short for {alpha.as_dict()}")
    return math.prod(_hermite_scalar(power, values[coord]) for coord, power in alpha.exponents)


def hermite_evaluate(e: HermiteExpansion, y: Sequence[float] | np.ndarray) -> float:
    values = _as_point(y, e.dimension)
    return math.fsum(coeff * hermite_eval(alpha, values) for alpha, coeff in e.terms.items())


def hermite_evaluate_many(e: HermiteExpansion, points: np.ndarray) -> np.ndarray:
    matrix = _as_points(points, e.dimension)
    top: Dict[int, int] = {}
    for alpha in e.terms:
        for coord, power in alpha.exponents:
            top[coord] = max(top.get(coord, 0), power)
    tables = {coord: hermite_values(power, matrix[:, coord]) for coord, power in top.items()}
    acc = np.zeros(matrix.shape[0], dtype=np.float64)
    for alpha, coeff in e.terms.items():
        term = np.full(matrix.shape[0], coeff, dtype=np.float64)
        for coord, power in alpha.exponents:
            term = term * tables[coord][power]
        acc += term
    return acc


@lru_cache(maxsize=None)
def _power_in_hermite(m: int) -> Tuple[Tuple[int, int], ...]:
    # y^m = sum_j a_j He_{m-2j},  a_j = m! / ((m-2j)! 2^j j!)
    return tuple(
        (m - 2 * j, math.factorial(m) // (math.factorial(m - 2 * j) * 2**j * math.factorial(j)))
        for j in range(m // 2 + 1)
    )


@lru_cache(maxsize=None)
def _hermite_in_powers(k: int) -> Tuple[Tuple[int, int], ...]:
    # He_k = sum_j (-1)^j k! / ((k-2j)! 2^j j!) y^{k-2j}
    return tuple(
        (k - 2 * j, (-1) ** j * (math.factorial(k) // (math.factorial(k - 2 * j) * 2**j * math.factorial(j))))
        for j in range(k // 2 + 1)
    )


def _expand(
    terms: Mapping[MultiIndex, float],
    table,
    weight_of,
) -> Dict[MultiIndex, float]:
    partials: Dict[MultiIndex, List[float]] = {}
    for alpha, coeff in terms.items():
        per_coord = [[(coord, k, a) for k, a in table(power)] for coord, power in alpha.exponents]
        for combo in itertools.product(*per_coord):
            beta = MultiIndex(tuple((coord, k) for coord, k, _ in combo))
            integer_weight = math.prod(a for _, _, a in combo)
            partials.setdefault(beta, []).append(weight_of(coeff, integer_weight, alpha, beta))
    return {beta: math.fsum(values) for beta, values in partials.items()}


def to_hermite(p: MonomialPoly) -> HermiteExpansion:
    """Monomial -> normalized Hermite coefficients; He_k = sqrt(k!) h_k."""

    coeffs = _expand(
        p.terms,
        _power_in_hermite,
        lambda coeff, weight, _alpha, beta: coeff * weight * math.sqrt(beta.factorial),
    )
    return HermiteExpansion(p.dimension, coeffs)


def from_hermite(e: HermiteExpansion) -> MonomialPoly:
    terms = _expand(
        e.terms,
        _hermite_in_powers,
        lambda coeff, weight, alpha, _beta: coeff * weight / math.sqrt(alpha.factorial),
    )
    return MonomialPoly(e.dimension, terms)


def l2_norm(e: HermiteExpansion) -> float:
    return math.sqrt(math.fsum(coeff * coeff for coeff in e.terms.values()))


def noise_operator(e: HermiteExpansion, rho: float) -> HermiteExpansion:
    """U_rho: scale the coefficient of h_alpha by rho^|alpha|; rho > 1 is allowed."""

    if rho < 0:
        raise ParameterError("noise rate must be non-negative")
    return HermiteExpansion(e.dimension, {alpha: coeff * rho**alpha.total for alpha, coeff in e.terms.items()})


def derivative(p: MonomialPoly, alpha: MultiIndex) -> MonomialPoly:
    """Exact partial derivative d^alpha p."""

    if alpha.width > p.dimension:
        raise DimensionMismatchError(f"derivative {alpha.as_dict()} does not fit dimension {p.dimension}")
    terms: Dict[MultiIndex, float] = {}
    for beta, coeff in p.terms.items():
        if not beta.dominates(alpha):
            continue
        factor = math.prod(math.perm(beta.get(coord), power) for coord, power in alpha.exponents)
        reduced = MultiIndex(tuple((coord, power - alpha.get(coord)) for coord, power in beta.exponents))
        terms[reduced] = coeff * factor
    return MonomialPoly(p.dimension, terms)


def multi_indices(n: int, t: int) -> List[MultiIndex]:
    """Every multi-index over ``n`` coordinates with total order ``t``."""

    if n < 1 or t < 0:
        raise ParameterError("multi_indices needs n >= 1 and t >= 0")
    indices = [
        MultiIndex(tuple(Counter(combo).items())) for combo in itertools.combinations_with_replacement(range(n), t)
    ]
    return sorted(indices, key=lambda alpha: alpha.sort_key)


def multi_indices_upto(n: int, d: int) -> List[MultiIndex]:
    return [alpha for t in range(d + 1) for alpha in multi_indices(n, t)]


def _sub_indices(alpha: MultiIndex) -> Iterable[MultiIndex]:
    ranges = [[(coord, k) for k in range(power + 1)] for coord, power in alpha.exponents]
    for combo in itertools.product(*ranges):
        yield MultiIndex(combo)


def derivative_support(p: MonomialPoly, t: int | None = None) -> List[MultiIndex]:
    """Multi-indices whose derivative of ``p`` is not identically zero, optionally of order ``t``."""

    found = {beta for alpha in p.terms for beta in _sub_indices(alpha) if t is None or beta.total == t}
    return sorted(found, key=lambda alpha: alpha.sort_key)


def gradient_norm_squared(p: MonomialPoly, x: Sequence[float] | np.ndarray, t: int) -> float:
    if t < 0:
        raise ParameterError("derivative order must be non-negative")
    point = _as_point(x, p.dimension)
    return math.fsum(evaluate(derivative(p, alpha), point) ** 2 for alpha in derivative_support(p, t))


def gradient_norm(p: MonomialPoly, x: Sequence[float] | np.ndarray, t: int) -> float:
    """Norm of the order-``t`` derivative tensor, summing over multi-indices with |alpha| = t."""

    if t == 0:
        return abs(evaluate(p, x))
    return math.sqrt(gradient_norm_squared(p, x, t))


def gradient_norms(p: MonomialPoly, points: np.ndarray, t: int) -> np.ndarray:
    """Vectorised ``gradient_norm`` over the rows of ``points``."""

    if t < 0:
        raise ParameterError("derivative order must be non-negative")
    matrix = _as_points(points, p.dimension)
    acc = np.zeros(matrix.shape[0], dtype=np.float64)
    for alpha in derivative_support(p, t):
        acc += evaluate_many(derivative(p, alpha), matrix) ** 2
    return np.sqrt(acc)


def smooth(p: MonomialPoly, lam: float) -> MonomialPoly:
    """phi(x) = E_y[p(x + sqrt(lam) y)], computed as U_{sqrt(1-lam)} p evaluated at x / sqrt(1-lam)."""

    if not 0.0 <= lam < 1.0:
        raise DomainError(f"smoothing parameter must lie in [0, 1), got {lam!r}")
    if lam == 0.0:
        return p
    rho = math.sqrt(1.0 - lam)
    damped = from_hermite(noise_operator(to_hermite(p), rho))
    return MonomialPoly(p.dimension, {alpha: coeff / rho**alpha.total for alpha, coeff in damped.terms.items()})


def shift_expansion(p: MonomialPoly, x: Sequence[float] | np.ndarray, lam: float) -> HermiteExpansion:
    """Hermite expansion in y of p(x + sqrt(lam) y).

    The coefficient of h_alpha is d^alpha phi(x) * lam^(|alpha|/2) / sqrt(alpha!)
    with ``phi = smooth(p, lam)``.
    """

    phi = smooth(p, lam)
    point = _as_point(x, p.dimension)
    coeffs: Dict[MultiIndex, float] = {}
    for alpha in derivative_support(phi):
        value = evaluate(derivative(phi, alpha), point)
        coeffs[alpha] = value * lam ** (alpha.total / 2) / math.sqrt(alpha.factorial)
    return HermiteExpansion(p.dimension, coeffs)


def random_expansion(rng: np.random.Generator, n: int, d: int, normalize: bool = True) -> HermiteExpansion:
    """Standard Gaussian coefficients on every h_alpha with |alpha| <= d."""

    if n < 1 or d < 0:
        raise ParameterError("random polynomials need n >= 1 and d >= 0")
    indices = multi_indices_upto(n, d)
    draws = rng.standard_normal(len(indices)).tolist()
    expansion = HermiteExpansion(n, dict(zip(indices, draws)))
    if normalize:
        expansion = expansion.scaled(1.0 / l2_norm(expansion))
    return expansion


def random_polynomial(rng: np.random.Generator, n: int, d: int, normalize: bool = True) -> MonomialPoly:
    return from_hermite(random_expansion(rng, n, d, normalize=normalize))


def poly_to_model(p: MonomialPoly) -> PolynomialModel:
    return PolynomialModel(
        dimension=p.dimension,
        terms=[
            TermModel(exponents={str(coord): power for coord, power in alpha.exponents}, coeff=coeff)
            for alpha, coeff in p.terms.items()
        ],
    )


def poly_from_model(model: PolynomialModel) -> MonomialPoly:
    return MonomialPoly.from_pairs(
        model.dimension,
        (({int(coord): power for coord, power in term.exponents.items()}, term.coeff) for term in model.terms),
    )


__all__ = [
    "HermiteExpansion",
    "MonomialPoly",
    "MultiIndex",
    "ZERO_INDEX",
    "derivative",
    "derivative_support",
    "evaluate",
    "evaluate_many",
    "from_hermite",
    "gradient_norm",
    "gradient_norm_squared",
    "gradient_norms",
    "hermite_eval",
    "hermite_evaluate",
    "hermite_evaluate_many",
    "hermite_values",
    "l2_norm",
    "multi_indices",
    "multi_indices_upto",
    "noise_operator",
    "poly_from_model",
    "poly_to_model",
    "random_expansion",
    "random_polynomial",
    "shift_expansion",
    "smooth",
    "to_hermite",
]
