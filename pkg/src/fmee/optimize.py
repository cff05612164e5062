"""Projected limited-memory BFGS for box-constrained minimization.

Each iteration fixes the variables sitting on a bound whose gradient points
outward, builds an L-BFGS direction on the remaining (free) variables with
the two-loop recursion, and runs a projected backtracking line search with
an Armijo test. Memory costs ``O(p * d)`` storage and ``O(p * d)`` work per
direction.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, OptimizationError, ParameterError

__all__ = ["Box", "OptimizerOptions", "OptimizerReport", "minimize_box",
           "multi_start_minimize", "MultiStartReport"]

_C1 = 1e-4
_CURVATURE_EPS = 1e-10
_MAX_BACKTRACK = 60


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).ravel()
        hi = np.asarray(self.upper, dtype=float).ravel()
        if lo.shape != hi.shape:
            raise ParameterError("box bounds differ in length")
        if not np.all(lo < hi):
            raise ParameterError("box needs lower < upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def uniform(cls, d: int, lo: float, hi: float) -> "Box":
        return cls(np.full(d, lo), np.full(d, hi))

    @classmethod
    def unbounded(cls, d: int) -> "Box":
        return cls(np.full(d, -np.inf), np.full(d, np.inf))

    @property
    def d(self) -> int:
        return self.lower.size

    def project(self, x) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


@dataclass(frozen=True)
class OptimizerOptions:
    memory: int = 7
    grad_tol: float = 1e-8
    max_iter: int = 500
    restarts: int = 4

    def __post_init__(self):
        if self.memory < 1 or self.max_iter < 1 or self.restarts < 0:
            raise ParameterError("invalid optimizer options")
        if not self.grad_tol > 0:
            raise ParameterError("grad_tol must be positive")


@dataclass
class OptimizerReport:
    x: np.ndarray
    fun: float
    pg_norm: float
    iterations: int
    evaluations: int
    converged: bool
    restarts_used: int
    message: str = ""
    history: list = field(default_factory=list, repr=False)
    path: list = field(default_factory=list, repr=False)

    @property
    def minimizer(self) -> np.ndarray:
        return self.x


def projected_gradient(x, g, box: Box) -> np.ndarray:
    return x - box.project(x - g)


def _two_loop(g, pairs):
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    s, y, _ = pairs[-1]
    q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return q


def minimize_box(fun, grad, box: Box, x0, opts: OptimizerOptions | None = None
                 ) -> OptimizerReport:
    """Minimize ``fun`` over ``box`` starting from ``x0``.

    A run that exhausts ``max_iter`` returns ``converged=False`` rather than
    raising. NaN or infinite objective values raise :class:`NumericError`.
    """
    opts = opts or OptimizerOptions()
    x = np.asarray(x0, dtype=float).ravel().copy()
    if x.size != box.d:
        raise ParameterError("start point and box differ in dimension")
    if not box.contains(x):
        raise ParameterError(f"start point {x} lies outside the box")
    lo, hi = box.lower, box.upper

    def evaluate(z):
        fz = float(fun(z))
        gz = np.asarray(grad(z), dtype=float).ravel()
        if not (math.isfinite(fz) and np.all(np.isfinite(gz))):
            raise NumericError(f"non-finite objective or gradient at {z}",
                               stage="optimizer")
        return fz, gz

    f, g = evaluate(x)
    n_eval = 1
    pairs: deque = deque(maxlen=opts.memory)
    restarts = 0
    history = [f]
    path = [x.copy()]
    message = "maximum iterations reached"
    converged = False
    it = 0
    pg = projected_gradient(x, g, box)
    while it < opts.max_iter:
        pg_norm = float(np.max(np.abs(pg)))
        if pg_norm <= opts.grad_tol:
            converged = True
            message = "projected gradient below tolerance"
            break
        it += 1
        free = ~(((x <= lo) & (g > 0)) | ((x >= hi) & (g < 0)))
        gf = np.where(free, g, 0.0)
        if pairs:
            d = -_two_loop(gf, list(pairs))
            d[~free] = 0.0
            if not gf @ d < 0:
                pairs.clear()
                d = -gf
        else:
            d = -gf
        step = 1.0 if pairs else min(1.0, 1.0 / max(np.max(np.abs(d)), 1e-300))
        accepted = False
        for _ in range(_MAX_BACKTRACK):
            x_new = box.project(x + step * d)
            s = x_new - x
            if not np.any(s):
                break
            f_new = float(fun(x_new))
            n_eval += 1
            if math.isfinite(f_new) and f_new <= f + _C1 * (g @ s):
                accepted = True
                break
            if not math.isfinite(f_new) and math.isnan(f_new):
                raise NumericError(f"NaN objective at {x_new}", stage="optimizer")
            step *= 0.5
        if not accepted:
            if pairs and restarts < opts.restarts:
                pairs.clear()
                restarts += 1
                continue
            message = "line search failed"
            break
        f_new, g_new = evaluate(x_new)
        y = g_new - g
        sy = s @ y
        if sy > _CURVATURE_EPS * np.linalg.norm(s) * np.linalg.norm(y):
            pairs.append((s, y, 1.0 / sy))
        x, f, g = x_new, f_new, g_new
        pg = projected_gradient(x, g, box)
        history.append(f)
        path.append(x.copy())
    pg_norm = float(np.max(np.abs(projected_gradient(x, g, box))))
    if not converged and pg_norm <= opts.grad_tol:
        converged = True
        message = "projected gradient below tolerance"
    return OptimizerReport(x, f, pg_norm, it, n_eval, converged, restarts,
                           message, history, path)


@dataclass
class MultiStartReport:
    best: OptimizerReport
    runs: list
    minima: list  # distinct convergent endpoints, best first

    @property
    def x(self):
        return self.best.x

    @property
    def fun(self):
        return self.best.fun


def multi_start_minimize(fun, grad, box: Box, starts, opts: OptimizerOptions | None = None,
                         distinct_tol: float = 1e-4) -> MultiStartReport:
    """Run :func:`minimize_box` from every start and collect distinct minima."""
    starts = [np.asarray(s, dtype=float) for s in starts]
    if not starts:
        raise ParameterError("at least one start is required")
    runs = [minimize_box(fun, grad, box, s, opts) for s in starts]
    ranked = sorted(runs, key=lambda r: (not r.converged, r.fun))
    best = ranked[0]
    minima = []
    for r in ranked:
        if not r.converged:
            continue
        if all(np.linalg.norm(r.x - m.x) > distinct_tol for m in minima):
            minima.append(r)
    if not best.converged and not np.isfinite(best.fun):
        raise OptimizationError("no start produced a finite objective",
                                stage="optimizer")
    return MultiStartReport(best, runs, minima)
