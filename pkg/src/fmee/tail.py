"""Conditional tail index and tail-ratio estimators.

The tail index is estimated on the first margin by a weighted
log-quantile-spacing (functional Hill) estimator; tail ratios of the other
margins follow from their quantiles at the same intermediate level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conditional import CondEcdf, _check_margin, _check_weights
from .covariate import WeightVector
from .errors import (DegenerateTailError, InfiniteMeanError, LogDomainError,
                     ParameterError)
from .sample import Sample

__all__ = ["HillConfig", "TailEstimate", "functional_hill", "hill_functional",
           "tail_ratio", "estimate_tail"]


def _default_taus(J: int) -> tuple[float, ...]:
    return tuple(1.0 / i for i in range(1, J + 1))


@dataclass(frozen=True)
class HillConfig:
    """Tuning of the functional Hill estimator.

    ``alpha_n`` is the intermediate level; the spacings use the levels
    ``1 - tau_i * (1 - alpha_n)``. ``taus`` defaults to ``1/i``.
    """

    alpha_n: float
    J: int = 9
    taus: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.J < 1:
            raise ParameterError("J must be a positive integer")
        taus = self.taus if self.taus is not None else _default_taus(self.J)
        taus = tuple(float(t) for t in taus)
        if len(taus) != self.J:
            raise ParameterError(f"expected {self.J} taus, got {len(taus)}")
        if any(not 0 < t <= 1 for t in taus):
            raise ParameterError("taus must lie in (0, 1]")
        if any(a < b for a, b in zip(taus, taus[1:])):
            raise ParameterError("taus must be nonincreasing")
        if not -sum(np.log(taus)) > 0:
            raise ParameterError("taus must not all equal 1")
        if not 0 < self.alpha_n < 1:
            raise ParameterError("alpha_n must lie in (0, 1)")
        object.__setattr__(self, "taus", taus)

    @property
    def levels(self) -> np.ndarray:
        return 1.0 - np.asarray(self.taus) * (1.0 - self.alpha_n)


@dataclass(frozen=True)
class TailEstimate:
    gamma_hat: float
    c_hat: np.ndarray
    alpha_n: float
    quantiles: np.ndarray = field(repr=False)  # q_j(alpha_n) per margin
    hill_levels: np.ndarray = field(repr=False)


def functional_hill(quantile, alpha_n: float, taus) -> float:
    """Hill-type estimate from a quantile function of margin 1.

    ``quantile`` maps an array of levels to quantiles. The result is
    validated to lie in ``(0, 1)``.
    """
    taus = np.asarray(taus, dtype=float)
    denom = -np.sum(np.log(taus))
    if not denom > 0:
        raise ParameterError("taus must not all equal 1")
    levels = 1.0 - taus * (1.0 - alpha_n)
    q_top = np.asarray(quantile(levels), dtype=float)
    q_base = float(np.asarray(quantile(np.array([alpha_n])), dtype=float)[0])
    if q_base <= 0 or np.any(q_top <= 0):
        raise LogDomainError(
            f"nonpositive quantile at level {alpha_n:g} or above; the tail "
            "must be positive", stage="hill")
    gamma = float(np.sum(np.log(q_top) - np.log(q_base)) / denom)
    if not np.isfinite(gamma) or gamma <= 0:
        raise DegenerateTailError(
            f"tail index estimate {gamma:g} is not positive (flat tail)",
            stage="hill")
    if gamma >= 1:
        raise InfiniteMeanError(
            f"tail index estimate {gamma:g} >= 1: the mean is infinite and "
            "the expectile system is undefined", stage="hill")
    return gamma


def hill_functional(sample: Sample, w: WeightVector, cfg: HillConfig) -> float:
    weights = _check_weights(sample, w)
    ecdf = CondEcdf(sample.x[:, 0], weights)
    return functional_hill(ecdf.quantile, cfg.alpha_n, cfg.taus)


def tail_ratio(sample: Sample, w: WeightVector, alpha_n: float,
               gamma_hat: float, j: int) -> float:
    """``(q_j(alpha_n) / q_1(alpha_n)) ** (1/gamma_hat)``; ``j`` is 0-based."""
    _check_margin(sample, j)
    if not gamma_hat > 0:
        raise ParameterError("gamma_hat must be positive")
    if j == 0:
        return 1.0
    weights = _check_weights(sample, w)
    q1 = CondEcdf(sample.x[:, 0], weights).quantile(alpha_n)
    qj = CondEcdf(sample.x[:, j], weights).quantile(alpha_n)
    if q1 <= 0 or qj <= 0:
        raise LogDomainError(
            f"nonpositive quantile at level {alpha_n:g} for margin {j}",
            stage="tail_ratio")
    return float((qj / q1) ** (1.0 / gamma_hat))


def estimate_tail(sample: Sample, w: WeightVector, cfg: HillConfig) -> TailEstimate:
    """Tail index and all tail ratios at one covariate point."""
    weights = _check_weights(sample, w)
    ecdfs = [CondEcdf(sample.x[:, j], weights) for j in range(sample.d)]
    gamma = functional_hill(ecdfs[0].quantile, cfg.alpha_n, cfg.taus)
    qs = np.array([float(e.quantile(cfg.alpha_n)) for e in ecdfs])
    if np.any(qs <= 0):
        bad = int(np.argmax(qs <= 0))
        raise LogDomainError(
            f"nonpositive quantile at level {cfg.alpha_n:g} for margin {bad}",
            stage="tail_ratio")
    c = (qs / qs[0]) ** (1.0 / gamma)
    c[0] = 1.0
    return TailEstimate(gamma, c, cfg.alpha_n, qs, cfg.levels)
