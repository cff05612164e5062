"""Covariate space: metrics, kernels, Nadaraya-Watson weights, small balls.

Covariates are curves sampled on a common grid of ``p`` points and stored
as rows of a 2-D array. A single covariate point is a 1-D array of length
``p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DimensionError, EmptyNeighborhoodError, ParameterError
from .sample import Sample

__all__ = [
    "Metric",
    "Kernel",
    "WeightVector",
    "distance",
    "distances",
    "nw_weights",
    "small_ball_estimate",
    "auto_bandwidth",
    "kernel_admissibility",
]

_METRICS = ("l2_grid", "sup")
_KERNELS = ("uniform", "quadratic")


@dataclass(frozen=True)
class Metric:
    """Distance between discretized curves.

    ``l2_grid`` is the Riemann approximation of the L2 norm,
    ``sqrt(step * sum((a - b)**2))``; ``step`` defaults to ``1/p``
    (curves on the unit interval). ``sup`` is the max absolute difference.
    """

    kind: str = "l2_grid"
    step: float | None = None

    def __post_init__(self):
        kind = {"l2": "l2_grid"}.get(self.kind, self.kind)
        if kind not in _METRICS:
            raise ParameterError(f"unknown metric {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.step is not None and not self.step > 0:
            raise ParameterError("grid step must be positive")

    def pairwise(self, ys: np.ndarray, y: np.ndarray) -> np.ndarray:
        ys = np.atleast_2d(np.asarray(ys, dtype=float))
        y = np.asarray(y, dtype=float).ravel()
        if ys.shape[1] != y.shape[0]:
            raise DimensionError(
                f"grid size mismatch: {ys.shape[1]} != {y.shape[0]}")
        diff = ys - y
        if self.kind == "sup":
            return np.max(np.abs(diff), axis=1)
        step = self.step if self.step is not None else 1.0 / y.shape[0]
        return np.sqrt(step * np.einsum("ij,ij->i", diff, diff))


@dataclass(frozen=True)
class Kernel:
    """Kernel supported on ``[0, 1]``.

    uniform: ``K(s) = 1``; quadratic: ``K(s) = 1.5 * (1 - s**2)``.
    """

    kind: str = "quadratic"

    def __post_init__(self):
        if self.kind not in _KERNELS:
            raise ParameterError(f"unknown kernel {self.kind!r}")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        inside = (s >= 0.0) & (s <= 1.0)
        if self.kind == "uniform":
            return np.where(inside, 1.0, 0.0)
        return np.where(inside, 1.5 * (1.0 - s * s), 0.0)

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        inside = (s >= 0.0) & (s < 1.0)
        if self.kind == "uniform":
            return np.zeros_like(s)
        return np.where(inside, -3.0 * s, 0.0)


@dataclass(frozen=True)
class WeightVector:
    weights: np.ndarray

    @property
    def effective_count(self) -> int:
        return int(np.count_nonzero(self.weights > 0))

    @property
    def n(self) -> int:
        return self.weights.shape[0]


def distance(a, b, m: Metric | None = None) -> float:
    """Distance between two covariate points."""
    m = m or Metric()
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise DimensionError(f"grid size mismatch: {a.size} != {b.size}")
    return float(m.pairwise(a[None, :], b)[0])


def distances(sample: Sample, y, m: Metric | None = None) -> np.ndarray:
    """Distances from every covariate of ``sample`` to ``y``."""
    return (m or Metric()).pairwise(sample.y, y)


def weights_from_distances(dist, h: float, k: Kernel | None = None) -> WeightVector:
    """Nadaraya-Watson weights ``K(dist_i/h) / sum_s K(dist_s/h)``.

    ``k`` may be any callable kernel supported on ``[0, 1]``.
    """
    if not h > 0:
        raise ParameterError("bandwidth h must be positive")
    k = k if k is not None else Kernel()
    dist = np.asarray(dist, dtype=float)
    raw = np.asarray(k(dist / h), dtype=float)
    raw = np.where(dist <= h, raw, 0.0)
    total = raw.sum()
    if not total > 0:
        raise EmptyNeighborhoodError(
            f"no observation with positive kernel weight within h={h:g}; "
            "increase the bandwidth or the sample size", stage="weights")
    w = raw / total
    w.setflags(write=False)
    return WeightVector(w)


def nw_weights(sample: Sample, y, h: float, k: Kernel | None = None,
               m: Metric | None = None) -> WeightVector:
    """Nadaraya-Watson weights localizing ``sample`` at covariate ``y``."""
    return weights_from_distances(distances(sample, y, m), h, k)


def small_ball_estimate(sample: Sample, y, h: float,
                        m: Metric | None = None) -> float:
    """Fraction of covariates within distance ``h`` of ``y``."""
    dist = distances(sample, y, m)
    return float(np.count_nonzero(dist <= h)) / dist.size


def auto_bandwidth(sample: Sample, y, m: Metric | None = None,
                   exponent: float = 0.7) -> float:
    """Smallest radius holding ``ceil(n**exponent)`` neighbours of ``y``.

    When that radius is zero (ties at ``y``, e.g. a constant covariate) the
    bandwidth falls back to a tiny positive value, which keeps exactly the
    tied observations.
    """
    dist = np.sort(distances(sample, y, m))
    count = min(dist.size, max(1, math.ceil(dist.size ** exponent)))
    r = float(dist[count - 1])
    if r > 0:
        # the quadratic kernel vanishes at s=1; nudge so the farthest
        # neighbour keeps a positive weight
        return r * (1.0 + 1e-9)
    return 1e-12


def kernel_admissibility(k: Kernel, tau) -> float:
    """``K(1) - int_0^1 K'(s) tau(s) ds``; positive for admissible kernels."""
    val, _ = integrate.quad(lambda s: float(k.derivative(s)) * tau(s), 0.0, 1.0)
    return float(k(1.0)) - val
