"""Bump functions psi and rho, and the derivative-control mollifier G.

G(x) = prod_i prod_{t<d} rho(log(||D^t p_i(x)||^2 / (16 eps^2 ||D^{t+1} p_i(x)||^2)))
is 1 where every derivative order of every polynomial is controlled by the
next one and 0 where some order is dominated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ..schemas import DerivativeBoundReport, MollifierFactorModel, to_verdict
from .errors import DimensionMismatchError, ParameterError
from .poly import gradient_norm_squared
from .ptf import PtfFunction

MAX_CHECKED_ORDER = 4


def psi_array(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    out[inside] = np.exp(1.0 / (x[inside] ** 2 - 1.0))
    return out


def rho_array(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.where(x >= 1.0, 1.0, 0.0)
    middle = (x > 0.0) & (x < 1.0)
    out[middle] = math.e * np.exp(1.0 / ((x[middle] - 1.0) ** 2 - 1.0))
    return out


def psi(x: float) -> float:
    """e^(1/(x^2 - 1)) inside (-1, 1), zero elsewhere."""

    if abs(x) >= 1.0:
        return 0.0
    return math.exp(1.0 / (x * x - 1.0))


def rho(x: float) -> float:
    """Smooth step: 0 for x <= 0, 1 for x >= 1, e * e^(1/((x-1)^2 - 1)) between."""

    if x >= 1.0:
        return 1.0
    if x <= 0.0:
        return 0.0
    return math.e * math.exp(1.0 / ((x - 1.0) ** 2 - 1.0))


@dataclass(frozen=True)
class MollifierConfig:
    eps: float
    family: PtfFunction

    def __post_init__(self) -> None:
        if not 0.0 < self.eps < 1.0:
            raise ParameterError(f"mollifier eps must lie in (0, 1), got {self.eps!r}")


def _factor(numerator: float, denominator: float, eps: float) -> tuple[float | None, float]:
    if numerator == 0.0:
        # vacuous when the next order vanishes too
        return None, 1.0 if denominator == 0.0 else 0.0
    if denominator == 0.0:
        return None, 1.0
    log_ratio = math.log(numerator) - math.log(16.0 * eps * eps * denominator)
    return log_ratio, rho(log_ratio)


def mollifier_factors(cfg: MollifierConfig, x: Sequence[float] | np.ndarray) -> List[MollifierFactorModel]:
    point = np.asarray(x, dtype=np.float64).ravel()
    if point.shape[0] != cfg.family.dimension:
        raise DimensionMismatchError(
            f"expected a point of dimension {cfg.family.dimension}, got {point.shape[0]}"
        )
    d = cfg.family.degree
    factors: List[MollifierFactorModel] = []
    for i, poly in enumerate(cfg.family.polys):
        norms = [gradient_norm_squared(poly, point, t) for t in range(d + 1)]
        for t in range(d):
            log_ratio, value = _factor(norms[t], norms[t + 1], cfg.eps)
            factors.append(
                MollifierFactorModel(
                    poly_index=i,
                    order=t,
                    numerator=norms[t],
                    denominator=norms[t + 1],
                    log_ratio=log_ratio,
                    value=value,
                )
            )
    return factors


def mollifier_g(cfg: MollifierConfig, x: Sequence[float] | np.ndarray) -> float:
    return math.prod(factor.value for factor in mollifier_factors(cfg, x))


def _finite_difference(fn, x: np.ndarray, order: int, step: float) -> np.ndarray:
    # central stencil sum_i (-1)^i C(t, i) f(x + (t/2 - i) h) / h^t
    acc = np.zeros_like(x)
    for i in range(order + 1):
        acc += (-1) ** i * math.comb(order, i) * fn(x + (order / 2 - i) * step)
    return acc / step**order


def derivative_bound_check(t: int, points: int = 1000, step: float = 1e-2) -> DerivativeBoundReport:
    """Finite-difference estimates of psi^(t) and rho^(t) against the surrogate bound t^(6t)."""

    if not 1 <= t <= MAX_CHECKED_ORDER:
        raise ParameterError(f"derivative order must lie in [1, {MAX_CHECKED_ORDER}]")
    bound = float(t ** (6 * t))
    psi_grid = np.linspace(-1.5, 1.5, points)
    rho_grid = np.linspace(-0.5, 1.5, points)
    psi_max = float(np.max(np.abs(_finite_difference(psi_array, psi_grid, t, step))))
    rho_max = float(np.max(np.abs(_finite_difference(rho_array, rho_grid, t, step))))
    tail = psi_grid[np.abs(psi_grid) > 1.0 + t * step]
    tail_max = float(np.max(np.abs(_finite_difference(psi_array, tail, t, step)), initial=0.0))
    return DerivativeBoundReport(
        order=t,
        bound=bound,
        psi_max=psi_max,
        rho_max=rho_max,
        tail_max=tail_max,
        verdict=to_verdict(psi_max <= bound and rho_max <= bound and tail_max == 0.0),
    )


__all__ = [
    "MAX_CHECKED_ORDER",
    "MollifierConfig",
    "derivative_bound_check",
    "mollifier_factors",
    "mollifier_g",
    "psi",
    "psi_array",
    "rho",
    "rho_array",
]
