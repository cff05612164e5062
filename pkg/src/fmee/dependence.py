"""Conditional empirical copula and tail dependence estimators.

Tail dependence functions are handled through their restriction
``u -> lambda(u, 1)``; by degree-1 homogeneity this determines the whole
bivariate function. Two concrete kinds exist: closed forms used as oracles
and piecewise-linear interpolants of the empirical estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariate import WeightVector
from .errors import DomainError, ParameterError, UnsupportedError
from .sample import Sample

__all__ = [
    "KnConfig",
    "default_kn",
    "cond_empirical_copula",
    "stdf_hat",
    "lambda_hat",
    "lambda_oracle",
    "LambdaFunction",
    "ClosedFormLambda",
    "EmpiricalLambda",
    "empirical_lambda_grid",
    "FAMILIES",
]

FAMILIES = ("survival_clayton", "comonotone", "independence")

# pseudo-observations are cumulative sums of weights; compare with slack
_TOL = 1e-12


@dataclass(frozen=True)
class KnConfig:
    """Intermediate sequence ``k_n`` with ``1 < k_n < n``."""

    k_n: float
    n: int

    def __post_init__(self):
        if not 1 < self.k_n < self.n:
            raise ParameterError(
                f"k_n={self.k_n} must satisfy 1 < k_n < n={self.n}")

    @property
    def fraction(self) -> float:
        return self.k_n / self.n


def default_kn(n: int, psi_hat: float, rule: str = "auto") -> KnConfig:
    """Default intermediate sequence from the small-ball estimate.

    ``"small_ball"``: ``k_n = ceil(n * psi_hat)``.
    ``"auto"``: ``k_n = ceil(sqrt(n / psi_hat))``, i.e. a tail fraction
    ``k_n/n`` equal to ``m**-0.5`` for the local sample size
    ``m = n * psi_hat``. Unlike ``"small_ball"`` it stays intermediate when
    ``psi_hat`` does not shrink (e.g. a constant covariate).
    """
    if not psi_hat > 0:
        raise DomainError("small-ball estimate is zero: empty neighbourhood",
                          stage="weights")
    if rule == "small_ball":
        k = math.ceil(n * psi_hat)
    elif rule == "auto":
        k = math.ceil(math.sqrt(n / psi_hat))
    else:
        raise ParameterError(f"unknown k_n rule {rule!r}")
    k = min(max(k, 2), n - 1)
    return KnConfig(k, n)


def _weights(w) -> np.ndarray:
    return np.asarray(w.weights if isinstance(w, WeightVector) else w, dtype=float)


def cond_empirical_copula(pseudo: np.ndarray, w: WeightVector, j: int, k: int,
                          u, v):
    """``sum_i w_i 1{P_ij <= u, P_ik <= v}``; vectorized over ``u``, ``v``."""
    weights = _weights(w)
    u_arr, v_arr = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    pj = pseudo[:, j][:, None]
    pk = pseudo[:, k][:, None]
    hit = (pj <= u_arr.ravel()[None, :] + _TOL) & (pk <= v_arr.ravel()[None, :] + _TOL)
    out = np.minimum(weights @ hit, 1.0).reshape(u_arr.shape)
    return float(out) if out.ndim == 0 else out


def _copula_at_fixed_v(pseudo, weights, j, k, u, v):
    """Copula values for many ``u`` and one ``v`` in O(n log n)."""
    mask = (pseudo[:, k] <= v + _TOL) & (weights > 0)
    pj = pseudo[mask, j]
    wj = weights[mask]
    order = np.argsort(pj, kind="stable")
    pj, cum = pj[order], np.concatenate(([0.0], np.cumsum(wj[order])))
    return np.minimum(cum[np.searchsorted(pj, np.asarray(u) + _TOL, side="right")], 1.0)


def _kn_fraction(kn, n):
    if isinstance(kn, KnConfig):
        return kn.fraction
    return float(kn) / n


def stdf_hat(sample: Sample, w: WeightVector, j: int, k: int, kn, x,
             pseudo: np.ndarray | None = None) -> float:
    """Empirical stable tail dependence ``(n/k)(1 - C(1 - (k/n) x))``."""
    from .conditional import pseudo_obs

    t = _kn_fraction(kn, sample.n)
    x1, x2 = (float(a) for a in x)
    if x1 < 0 or x2 < 0:
        raise DomainError("tail dependence arguments must be nonnegative")
    if t * max(x1, x2) > 1 + _TOL:
        raise DomainError(
            f"(k_n/n)*max(x)={t * max(x1, x2):g} exceeds 1", stage="dependence")
    if pseudo is None:
        pseudo = pseudo_obs(sample, w)
    c = cond_empirical_copula(pseudo, w, j, k, 1.0 - t * x1, 1.0 - t * x2)
    return (1.0 - c) / t


def lambda_hat(sample: Sample, w: WeightVector, j: int, k: int, kn, x,
               pseudo: np.ndarray | None = None) -> float:
    """``||x||_1 - L_hat(x)`` clamped into ``[0, min(x)]``."""
    x1, x2 = (float(a) for a in x)
    raw = x1 + x2 - stdf_hat(sample, w, j, k, kn, (x1, x2), pseudo)
    return float(min(max(raw, 0.0), min(x1, x2)))


def lambda_oracle(family: str, param: float | None, x) -> float:
    """Closed-form upper tail dependence function of a copula family."""
    x1, x2 = (float(a) for a in x)
    if family == "independence":
        return 0.0
    if family == "comonotone":
        return min(x1, x2)
    if family == "survival_clayton":
        if param is None or not param > 0:
            raise ParameterError("survival Clayton needs theta > 0")
        if x1 == 0 or x2 == 0:
            return 0.0
        return (x1 ** -param + x2 ** -param) ** (-1.0 / param)
    raise UnsupportedError(f"unsupported copula family {family!r}")


class LambdaFunction:
    """``u -> lambda(u, 1)`` for one ordered pair of margins."""

    pair: tuple[int, int] | None = None
    breakpoints: tuple[float, ...] = ()

    def __call__(self, u):
        raise NotImplementedError


class ClosedFormLambda(LambdaFunction):
    def __init__(self, family: str, theta: float | None = None,
                 pair: tuple[int, int] | None = None):
        if family not in FAMILIES:
            raise UnsupportedError(f"unsupported copula family {family!r}")
        if family == "survival_clayton" and (theta is None or not theta > 0):
            raise ParameterError("survival Clayton needs theta > 0")
        self.family = family
        self.theta = theta
        self.pair = pair
        self.breakpoints = (1.0,) if family == "comonotone" else ()

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.family == "independence":
            return np.zeros_like(u)
        if self.family == "comonotone":
            return np.minimum(u, 1.0)
        th = self.theta
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            small = u * (1.0 + u ** th) ** (-1.0 / th)
            large = (1.0 + u ** -th) ** (-1.0 / th)
        return np.where(u <= 1.0, small, large)

    def __repr__(self):
        return f"ClosedFormLambda({self.family!r}, theta={self.theta!r})"


class EmpiricalLambda(LambdaFunction):
    """Piecewise-linear interpolant through ``(grid, values)``.

    The grid starts at ``u=0`` with value 0; beyond the last grid point the
    function is held constant.
    """

    def __init__(self, grid, values, pair: tuple[int, int] | None = None):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid[0] != 0.0 or values[0] != 0.0:
            grid = np.concatenate(([0.0], grid))
            values = np.concatenate(([0.0], values))
        if np.any(np.diff(grid) <= 0):
            raise ParameterError("lambda grid must be strictly increasing")
        self.grid = grid
        self.values = np.clip(values, 0.0, np.minimum(grid, 1.0))
        self.pair = pair
        self.grid.setflags(write=False)
        self.values.setflags(write=False)

    @property
    def u_max(self) -> float:
        return float(self.grid[-1])

    def __call__(self, u):
        return np.interp(u, self.grid, self.values)

    def weighted_integral(self, upper: float, gamma: float) -> float:
        """Exact ``int_0^upper lambda(u) u**(-gamma-1) du``."""
        g, v = self.grid, self.values
        a, b = g[:-1], g[1:]
        slope = np.diff(v) / np.diff(g)
        icpt = v[:-1] - slope * a
        b_cl = np.minimum(b, upper)
        live = a < upper
        a, b_cl, slope, icpt = a[live], b_cl[live], slope[live], icpt[live]
        with np.errstate(divide="ignore", invalid="ignore"):
            lin = slope * (b_cl ** (1 - gamma) - a ** (1 - gamma)) / (1 - gamma)
            const = np.where(a > 0, icpt * (a ** -gamma - b_cl ** -gamma) / gamma, 0.0)
        total = float(np.sum(lin + const))
        if upper > g[-1]:
            total += v[-1] * (g[-1] ** -gamma - upper ** -gamma) / gamma
        return total

    def __repr__(self):
        return f"EmpiricalLambda(pair={self.pair}, points={self.grid.size}, u_max={self.u_max:g})"


def empirical_lambda_grid(sample: Sample, w: WeightVector, j: int, k: int, kn,
                          u_max: float | None = None, points: int = 64,
                          pseudo: np.ndarray | None = None) -> EmpiricalLambda:
    """Clamped ``lambda_hat(u, 1)`` on a grid over ``(0, u_max]``.

    ``u_max`` is capped at ``n/k_n``, the largest argument for which the
    copula stays inside the unit square. The grid is geometric from
    ``1/k_n`` (the resolution of the estimator) up to ``u_max``.
    """
    from .conditional import pseudo_obs

    t = _kn_fraction(kn, sample.n)
    cap = 1.0 / t
    u_max = cap if u_max is None else min(float(u_max), cap)
    if not u_max > 0:
        raise DomainError("u_max must be positive")
    if pseudo is None:
        pseudo = pseudo_obs(sample, w)
    weights = _weights(w)
    u_lo = min(1.0 / (t * sample.n), u_max / points)
    grid = np.geomspace(u_lo, u_max, points) if u_max > u_lo else np.array([u_max])
    cop = _copula_at_fixed_v(pseudo, weights, j, k, 1.0 - t * grid, 1.0 - t)
    raw = grid + 1.0 - (1.0 - cop) / t
    vals = np.clip(raw, 0.0, np.minimum(grid, 1.0))
    return EmpiricalLambda(grid, vals, pair=(j, k))
