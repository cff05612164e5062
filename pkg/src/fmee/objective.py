"""Optimum system of the extreme expectile, its loss and gradient.

Unknowns are ``theta = (eta, beta_2, ..., beta_d)`` with ``beta_1 = 1``.
For each margin ``k`` the system component is::

    phi_k = g/(1-g) - eta * beta_k**(1/g) / c_k * (1 + sum_{j!=k} beta_j/beta_k)
            + sum_{j!=k} int_{beta_j/beta_k}^inf lam_jk(c_j/c_k * t**(-1/g), 1) dt

and the loss is ``0.5 * sum_k phi_k**2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .covariate import WeightVector
from .dependence import ClosedFormLambda, EmpiricalLambda, LambdaFunction
from .errors import (DimensionError, DomainError, InfiniteMeanError,
                     NumericError, OptimizationError, ParameterError)
from .quadrature import QuadratureConfig, singular_power_integral
from .sample import Sample

__all__ = [
    "ThetaVector",
    "XiEstimate",
    "QuadratureConfig",
    "tail_integral",
    "phi",
    "phi_jacobian",
    "loss",
    "loss_gradient",
    "MEELoss",
    "direct_empirical_expectile",
    "expectile_score",
    "assemble_expectile",
    "default_starts",
]


@dataclass(frozen=True)
class ThetaVector:
    eta: float
    betas: tuple[float, ...]

    def __post_init__(self):
        betas = tuple(float(b) for b in np.atleast_1d(self.betas))
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "betas", betas)
        if not (self.eta > 0 and all(b > 0 for b in betas)):
            raise DomainError(f"theta must be strictly positive, got {self}")

    @classmethod
    def from_array(cls, arr) -> "ThetaVector":
        arr = np.asarray(arr, dtype=float).ravel()
        return cls(arr[0], tuple(arr[1:]))

    def as_array(self) -> np.ndarray:
        return np.array((self.eta, *self.betas))

    @property
    def beta_full(self) -> np.ndarray:
        return np.array((1.0, *self.betas))

    @property
    def d(self) -> int:
        return len(self.betas) + 1


@dataclass(frozen=True)
class XiEstimate:
    """Plug-in vector: tail index, tail ratios, pairwise tail dependence.

    ``lam`` maps each ordered pair ``(j, k)``, ``j != k`` (0-based), to
    ``u -> lambda_jk(u, 1)``.
    """

    gamma: float
    c: np.ndarray
    lam: Mapping[tuple[int, int], LambdaFunction] = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        object.__setattr__(self, "c", c)
        if c.size < 2:
            raise DimensionError("the optimum system needs d >= 2")
        if not 0 < self.gamma < 1:
            raise InfiniteMeanError(
                f"tail index {self.gamma:g} must lie in (0, 1)")
        if np.any(c <= 0) or c[0] != 1.0:
            raise ParameterError("tail ratios must be positive with c[0] == 1")
        missing = [(j, k) for j in range(c.size) for k in range(c.size)
                   if j != k and (j, k) not in self.lam]
        if missing:
            raise ParameterError(f"missing tail dependence for pairs {missing}")

    @property
    def d(self) -> int:
        return self.c.size

    @classmethod
    def closed_form(cls, gamma: float, c, family: str,
                    theta: float | None = None) -> "XiEstimate":
        """Same closed-form tail dependence for every pair of margins."""
        c = np.asarray(c, dtype=float)
        lam = {(j, k): ClosedFormLambda(family, theta, pair=(j, k))
               for j in range(c.size) for k in range(c.size) if j != k}
        return cls(gamma, c, lam)


def tail_integral(lam: LambdaFunction, gamma: float, cj: float, ck: float,
                  lower: float, q: QuadratureConfig | None = None) -> float:
    """``int_lower^inf lam((cj/ck) t**(-1/gamma), 1) dt``.

    Evaluated after substituting ``u = (cj/ck) t**(-1/gamma)`` as
    ``gamma (cj/ck)**gamma int_0^M lam(u,1) u**(-gamma-1) du`` with
    ``M = (cj/ck) lower**(-1/gamma)``.
    """
    if not 0 < gamma < 1:
        raise InfiniteMeanError(f"tail index {gamma:g} must lie in (0, 1)")
    if not lower > 0:
        raise DomainError("lower integration bound must be positive")
    r = cj / ck
    upper = r * lower ** (-1.0 / gamma)
    if isinstance(lam, EmpiricalLambda):
        inner = lam.weighted_integral(upper, gamma)
    elif isinstance(lam, ClosedFormLambda) and lam.family == "independence":
        inner = 0.0
    else:
        q = q or QuadratureConfig()
        inner, _ = singular_power_integral(lam, gamma, upper, q,
                                           getattr(lam, "breakpoints", ()))
    return gamma * r ** gamma * inner


def _theta_array(theta) -> np.ndarray:
    if isinstance(theta, ThetaVector):
        return theta.as_array()
    arr = np.asarray(theta, dtype=float).ravel()
    if arr[0] < 0 or np.any(arr[1:] <= 0):
        raise DomainError("need eta >= 0 and strictly positive betas")
    return arr


def phi_jacobian(theta, xi: XiEstimate, q: QuadratureConfig | None = None,
                 with_jacobian: bool = True):
    """System vector and its Jacobian with respect to ``(eta, beta_2..)``."""
    th = _theta_array(theta)
    d = xi.d
    if th.size != d:
        raise DimensionError(f"theta has {th.size} entries, expected d={d}")
    g = xi.gamma
    c = xi.c
    eta = th[0]
    beta = np.concatenate(([1.0], th[1:]))
    total = beta.sum()
    a = 1.0 / g
    out = np.empty(d)
    jac = np.zeros((d, d)) if with_jacobian else None
    for k in range(d):
        bk = beta[k]
        scale = bk ** (a - 1.0) / c[k]
        out[k] = g / (1.0 - g) - eta * scale * total
        if with_jacobian:
            jac[k, 0] = -scale * total
            for r in range(1, d):
                dr = eta * scale
                if r == k:
                    dr += eta * (a - 1.0) * bk ** (a - 2.0) / c[k] * total
                jac[k, r] -= dr
        for j in range(d):
            if j == k:
                continue
            lower = beta[j] / bk
            lam = xi.lam[(j, k)]
            out[k] += tail_integral(lam, g, c[j], c[k], lower, q)
            if with_jacobian:
                # Leibniz: d/d(lower) of the integral is minus the integrand
                edge = float(lam(c[j] / c[k] * lower ** -a))
                if j > 0:
                    jac[k, j] -= edge / bk
                if k > 0:
                    jac[k, k] += edge * beta[j] / bk ** 2
    if not np.all(np.isfinite(out)) or (with_jacobian and not np.all(np.isfinite(jac))):
        raise NumericError(f"non-finite system value at theta={th}",
                           stage="objective")
    return (out, jac) if with_jacobian else out


def phi(theta, xi: XiEstimate, q: QuadratureConfig | None = None) -> np.ndarray:
    return phi_jacobian(theta, xi, q, with_jacobian=False)


def loss(theta, xi: XiEstimate, q: QuadratureConfig | None = None) -> float:
    v = phi(theta, xi, q)
    return 0.5 * float(v @ v)


def loss_gradient(theta, xi: XiEstimate,
                  q: QuadratureConfig | None = None) -> np.ndarray:
    v, jac = phi_jacobian(theta, xi, q)
    return jac.T @ v


class MEELoss:
    """Loss and gradient as plain functions of an array, sharing one evaluation."""

    def __init__(self, xi: XiEstimate, q: QuadratureConfig | None = None):
        self.xi = xi
        self.q = q or QuadratureConfig()
        self._key = None
        self._val = None
        self.evaluations = 0

    def _eval(self, x):
        x = np.asarray(x, dtype=float)
        key = x.tobytes()
        if key != self._key:
            v, jac = phi_jacobian(x, self.xi, self.q)
            self._val = (0.5 * float(v @ v), jac.T @ v)
            self._key = key
            self.evaluations += 1
        return self._val

    def fun(self, x) -> float:
        return self._eval(x)[0]

    def grad(self, x) -> np.ndarray:
        return self._eval(x)[1].copy()


def default_starts(gamma: float, c, box) -> list[np.ndarray]:
    """Start points for minimizing the loss, projected into ``box``.

    The independence-symmetric root ``(g/(d(1-g)), 1, ..)`` comes first,
    then the comonotone-symmetric root ``(g/(1-g), 1, ..)``, then both with
    ``beta_k = c_k**g`` (the quantile ratios of the margins).
    """
    c = np.asarray(c, dtype=float)
    d = c.size
    g = gamma / (1.0 - gamma)
    ratios = c[1:] ** gamma
    raw = [np.r_[g / d, np.ones(d - 1)], np.r_[g, np.ones(d - 1)],
           np.r_[g / d, ratios], np.r_[g, ratios]]
    starts: list[np.ndarray] = []
    for s in raw:
        s = box.project(s)
        if not any(np.array_equal(s, t) for t in starts):
            starts.append(s)
    return starts


def expectile_score(x, data: np.ndarray, weights: np.ndarray, alpha: float):
    """Weighted L1-expectile score and its gradient at ``x``."""
    diff = data - x
    pos = np.maximum(diff, 0.0).sum(axis=1)
    neg = np.maximum(-diff, 0.0).sum(axis=1)
    val = float(weights @ (alpha * pos ** 2 + (1.0 - alpha) * neg ** 2))
    grad = 2.0 * ((-(alpha * weights * pos)) @ (diff > 0)
                  + ((1.0 - alpha) * weights * neg) @ (diff < 0))
    return val, grad


def _min_norm_in_hull(grads: np.ndarray) -> np.ndarray:
    """Approximate minimum-norm point of the convex hull of the rows of ``grads``."""
    from scipy.optimize import nnls

    m = grads.shape[0]
    big = 1e4 * max(1.0, float(np.abs(grads).max()))
    a = np.vstack([grads.T, np.full((1, m), big)])
    b = np.r_[np.zeros(grads.shape[1]), big]
    lam, _ = nnls(a, b)
    lam = lam / lam.sum() if lam.sum() > 0 else np.full(m, 1.0 / m)
    return lam @ grads


def _sampling_offsets(d: int) -> np.ndarray:
    """Unit offsets probing every orthant (small d) or the coordinate axes."""
    eye = np.eye(d)
    offsets = [np.zeros(d), *eye, *-eye]
    if d <= 4:
        signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * d)).reshape(d, -1).T
        offsets += list(signs)
    return np.array(offsets)


def _polish_nonsmooth(evaluate, x, tol, curvature, radius, max_iter=500):
    """Gradient sampling with a shrinking radius for the piecewise smooth score.

    The score has gradient jumps where a coordinate of ``x`` crosses an
    observation, so its minimizer may sit on a kink where no gradient
    vanishes. Stationarity is measured by the minimum-norm element of the
    convex hull of gradients sampled around ``x``.
    """
    d = x.size
    offsets = _sampling_offsets(d)
    radius_final = tol / (4.0 * curvature)
    radius = max(radius, radius_final)
    f = evaluate(x)[0]
    for _ in range(max_iter):
        grads = np.array([evaluate(x + radius * o)[1] for o in offsets])
        g = _min_norm_in_hull(grads)
        gnorm = float(np.max(np.abs(g)))
        level = max(tol, curvature * radius)
        if gnorm <= level:
            if radius <= radius_final:
                return x, True
            radius = max(0.1 * radius, radius_final)
            continue
        step = 1.0 / curvature
        moved = False
        for _ in range(60):
            x_new = x - step * g
            f_new = evaluate(x_new)[0]
            if f_new <= f - 1e-4 * step * float(g @ g):
                x, f, moved = x_new, f_new, True
                break
            step *= 0.5
        if not moved:
            if radius <= radius_final:
                return x, False
            radius = max(0.1 * radius, radius_final)
    return x, False


def direct_empirical_expectile(sample: Sample, w: WeightVector, alpha: float,
                               opts=None) -> np.ndarray:
    """Kernel-weighted multivariate L1-expectile at a moderate level.

    Minimizes the convex score of :func:`expectile_score` with the
    box-constrained quasi-Newton solver on an unbounded box. For ``d >= 2``
    the score is only piecewise smooth, so a gradient-sampling stage
    finishes the job whenever the quasi-Newton line search stalls on a kink.
    """
    from .optimize import Box, OptimizerOptions, minimize_box

    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    weights = np.asarray(w.weights if isinstance(w, WeightVector) else w, float)
    keep = weights > 0
    data = sample.x[keep]
    wk = weights[keep] / weights[keep].sum()
    start = wk @ data
    # tolerance follows the data scale so the result is scale equivariant
    scale = float(wk @ np.abs(data).max(axis=1)) or 1.0
    opts = opts or OptimizerOptions(grad_tol=1e-8, max_iter=1000)
    tol = opts.grad_tol * scale
    opts = OptimizerOptions(memory=opts.memory, grad_tol=tol,
                            max_iter=opts.max_iter, restarts=opts.restarts)
    cache = {}

    def evaluate(x):
        key = x.tobytes()
        if key not in cache:
            if len(cache) > 64:
                cache.clear()
            cache[key] = expectile_score(x, data, wk, alpha)
        return cache[key]

    rep = minimize_box(lambda x: evaluate(x)[0], lambda x: evaluate(x)[1],
                       Box.unbounded(sample.d), start, opts)
    if rep.converged:
        return rep.x
    # Hessian bound of the score: 2 max(alpha, 1-alpha) d
    curvature = 2.0 * max(alpha, 1.0 - alpha) * sample.d
    x, ok = _polish_nonsmooth(evaluate, rep.x, tol, curvature, 1e-6 * scale)
    if not ok:
        raise OptimizationError(
            f"direct expectile did not converge (projected gradient "
            f"{rep.pg_norm:.3g})", stage="direct_expectile")
    return x


def assemble_expectile(q1_hat: float, theta, gamma: float) -> np.ndarray:
    """``q1_hat * eta**gamma * (1, beta_2, ..., beta_d)``."""
    if not q1_hat > 0:
        raise DomainError("q1_hat must be positive")
    if not 0 < gamma < 1:
        raise InfiniteMeanError(f"tail index {gamma:g} must lie in (0, 1)")
    th = theta if isinstance(theta, ThetaVector) else ThetaVector.from_array(theta)
    return q1_hat * th.eta ** gamma * th.beta_full
