"""Kernel-weighted conditional distribution functions and quantiles."""

from __future__ import annotations

import numpy as np

from .covariate import WeightVector
from .errors import DimensionError, DomainError
from .sample import Sample

__all__ = ["cond_marginal_ecdf", "cond_quantile", "pseudo_obs", "CondEcdf"]

# slack for cumulative weights that should hit a level exactly
_CUM_TOL = 1e-12


def _check_margin(sample: Sample, j: int) -> None:
    if not 0 <= j < sample.d:
        raise DimensionError(f"margin {j} out of range for d={sample.d}",
                             stage="margin")


def _check_weights(sample: Sample, w: WeightVector) -> np.ndarray:
    weights = np.asarray(w.weights if isinstance(w, WeightVector) else w,
                         dtype=float)
    if weights.shape != (sample.n,):
        raise DimensionError(
            f"weight vector has length {weights.size}, sample has n={sample.n}")
    return weights


class CondEcdf:
    """Weighted step distribution function of one margin.

    Equal values are merged into a single atom carrying their total weight.
    Only atoms with positive weight are kept.
    """

    def __init__(self, values, weights):
        values = np.asarray(values, dtype=float)
        weights = np.asarray(weights, dtype=float)
        keep = weights > 0
        if not np.any(keep):
            raise DomainError("conditional ecdf needs a positive weight")
        v, w = values[keep], weights[keep]
        order = np.argsort(v, kind="stable")
        v, w = v[order], w[order]
        atoms, start = np.unique(v, return_index=True)
        self.values = atoms
        self.cumulative = np.cumsum(np.add.reduceat(w, start))

    def __call__(self, x):
        idx = np.searchsorted(self.values, x, side="right")
        cum = np.concatenate(([0.0], self.cumulative))
        return cum[idx]

    def quantile(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        if np.any((alpha < 0) | (alpha > 1)):
            raise DomainError("quantile level must lie in [0, 1]")
        idx = np.searchsorted(self.cumulative, alpha - _CUM_TOL, side="left")
        idx = np.minimum(idx, self.values.size - 1)
        return self.values[idx]


def cond_marginal_ecdf(sample: Sample, w: WeightVector, j: int, x) -> float:
    """``sum_i w_i 1{X_ij <= x}``; ``j`` is 0-based."""
    _check_margin(sample, j)
    weights = _check_weights(sample, w)
    xs = np.asarray(x, dtype=float)
    out = (weights[:, None] * (sample.x[:, j][:, None] <= xs.ravel()[None, :])).sum(axis=0)
    out = np.minimum(out, 1.0)
    return float(out[0]) if xs.ndim == 0 else out.reshape(xs.shape)


def cond_quantile(sample: Sample, w: WeightVector, j: int, alpha):
    """Generalized inverse ``inf{x : F_j(x) >= alpha}`` of the weighted ecdf.

    ``alpha = 0`` yields the smallest value carrying positive weight.
    """
    _check_margin(sample, j)
    weights = _check_weights(sample, w)
    q = CondEcdf(sample.x[:, j], weights).quantile(alpha)
    return float(q) if np.ndim(q) == 0 else q


def pseudo_obs(sample: Sample, w: WeightVector) -> np.ndarray:
    """Matrix of ``F_j(X_ij)`` under the weighted conditional margins."""
    weights = _check_weights(sample, w)
    out = np.empty_like(sample.x)
    for j in range(sample.d):
        out[:, j] = CondEcdf(sample.x[:, j], weights)(sample.x[:, j])
    return np.minimum(out, 1.0)
