"""End-to-end estimation of extreme multivariate expectiles at a covariate point.

weights -> (tail index, tail ratios, tail dependence grids) -> plug-in loss
-> multi-start bound-constrained minimization -> assembled expectile.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .conditional import CondEcdf, pseudo_obs
from .covariate import (Kernel, Metric, WeightVector, auto_bandwidth,
                        nw_weights, small_ball_estimate)
from .dependence import KnConfig, default_kn, empirical_lambda_grid
from .errors import (DimensionError, DomainError, MEEError, NumericError,
                     ParameterError)
from .objective import (MEELoss, QuadratureConfig, ThetaVector, XiEstimate,
                        assemble_expectile, default_starts,
                        direct_empirical_expectile)
from .optimize import Box, OptimizerOptions, multi_start_minimize
from .sample import Sample
from .tail import HillConfig, estimate_tail

__all__ = ["EstimationConfig", "RatePlan", "MEEResult", "rate_plan",
           "estimate_mee", "moderate_level_check", "ModerateLevelCheck"]

_TIE_TOL = 1e-8


@dataclass(frozen=True)
class EstimationConfig:
    """Tuning of :func:`estimate_mee`.

    ``h`` and ``kn`` accept ``"auto"``; ``kn`` also accepts ``"small_ball"``
    (``k_n = ceil(n * psi_hat)``). ``alpha_n`` defaults to ``1 - k_n/n``.
    ``box`` defaults to ``[1e-3, 1e3]^d``.
    """

    alpha: float
    h: float | str = "auto"
    kernel: Kernel = field(default_factory=Kernel)
    metric: Metric = field(default_factory=Metric)
    J: int = 9
    taus: tuple | None = None
    kn: int | str = "auto"
    alpha_n: float | None = None
    box: Box | None = None
    optimizer: OptimizerOptions = field(default_factory=OptimizerOptions)
    lambda_points: int = 64
    mu: float = 1.0
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ParameterError("alpha must lie in (0, 1)")
        if isinstance(self.h, str) and self.h != "auto":
            raise ParameterError(f"h must be positive or 'auto', got {self.h!r}")
        if not isinstance(self.h, str) and not self.h > 0:
            raise ParameterError("bandwidth h must be positive")
        if isinstance(self.kn, str) and self.kn not in ("auto", "small_ball"):
            raise ParameterError(f"unknown k_n rule {self.kn!r}")
        if self.lambda_points < 2:
            raise ParameterError("lambda_points must be at least 2")
        if not self.mu > 0:
            raise ParameterError("mu must be positive")


@dataclass(frozen=True)
class RatePlan:
    delta0: float
    delta_minus1: float
    delta_gamma: float
    combined: float
    coupled: bool
    note: str = ("delta_gamma is the Lomax specialization gamma*(1-alpha_n)^-gamma; "
                 "for other margins it is not available")

    def as_dict(self) -> dict:
        return {"delta0": self.delta0, "delta_minus1": self.delta_minus1,
                "delta_gamma": self.delta_gamma, "combined": self.combined,
                "coupled": self.coupled, "note": self.note}


def rate_plan(n: int, alpha_n: float, psi_hat: float, k_n: float,
              gamma_hat: float, mu: float = 1.0) -> RatePlan:
    """Scaling sequences bounding the statistical convergence rate.

    When ``k_n = n * psi_hat`` the first two sequences collapse into
    ``(n psi_hat)**min(1/2, mu)``.
    """
    if not psi_hat > 0:
        raise DomainError("small-ball estimate is zero: degenerate neighbourhood",
                          stage="rates")
    if not 0 < alpha_n < 1:
        raise DomainError("alpha_n must lie in (0, 1)", stage="rates")
    if not (n > 0 and k_n > 0 and gamma_hat > 0 and mu > 0):
        raise DomainError("rate inputs must be positive", stage="rates")
    tail = 1.0 - alpha_n
    delta0 = math.sqrt(n * tail * psi_hat)
    delta_m1 = (n / k_n) ** mu
    delta_g = gamma_hat * tail ** -gamma_hat
    m = n * psi_hat
    coupled = math.isclose(k_n, m, rel_tol=1e-9) or k_n == math.ceil(m)
    if coupled:
        combined = min(delta_g, m ** min(0.5, mu))
    else:
        combined = min(delta0, delta_m1, delta_g)
    return RatePlan(delta0, delta_m1, delta_g, combined, coupled)


@dataclass
class MEEResult:
    theta_hat: ThetaVector
    gamma_hat: float
    c_hat: np.ndarray
    expectile: np.ndarray
    q1_hat: float
    report: object = field(repr=False)
    rate_plan: RatePlan = field(repr=False)
    warnings: list = field(default_factory=list)
    h: float = float("nan")
    psi_hat: float = float("nan")
    k_n: int = 0
    alpha_n: float = float("nan")
    alpha: float = float("nan")
    minima: list = field(default_factory=list, repr=False)

    @property
    def converged(self) -> bool:
        return bool(self.report.best.converged)

    def as_dict(self) -> dict:
        best = self.report.best
        return {
            "alpha": self.alpha,
            "theta_hat": {"eta": self.theta_hat.eta,
                          "betas": list(self.theta_hat.betas)},
            "gamma_hat": self.gamma_hat,
            "c_hat": self.c_hat.tolist(),
            "expectile": self.expectile.tolist(),
            "q1_hat": self.q1_hat,
            "optimizer": {
                "minimizer": best.x.tolist(),
                "objective": best.fun,
                "projected_gradient_norm": best.pg_norm,
                "iterations": best.iterations,
                "evaluations": best.evaluations,
                "converged": best.converged,
                "restarts_used": best.restarts_used,
                "message": best.message,
            },
            "distinct_minima": [m.as_array().tolist() for m in self.minima],
            "rate_plan": self.rate_plan.as_dict(),
            "diagnostics": {"h": self.h, "psi_hat": self.psi_hat,
                            "k_n": self.k_n, "alpha_n": self.alpha_n},
            "warnings": list(self.warnings),
        }


@contextmanager
def _stage(name: str):
    try:
        yield
    except MEEError as exc:
        if exc.stage is None:
            exc.stage = name
        raise


def _finite(name, value, stage):
    if not np.all(np.isfinite(value)):
        raise NumericError(f"{name} is not finite: {value}", stage=stage)


def _lambda_u_max(box: Box, gamma: float, c: np.ndarray) -> np.ndarray:
    """Largest ``lambda`` argument reachable from ``box``, per ordered pair."""
    d = c.size
    lo = np.concatenate(([1.0], box.lower[1:]))
    hi = np.concatenate(([1.0], box.upper[1:]))
    out = np.zeros((d, d))
    for j in range(d):
        for k in range(d):
            if j != k:
                out[j, k] = c[j] / c[k] * (lo[j] / hi[k]) ** (-1.0 / gamma)
    return out


def _prepare(sample: Sample, y, cfg: EstimationConfig):
    if sample.d < 2:
        raise DimensionError("expectile estimation needs d >= 2", stage="input")
    y = np.asarray(y, dtype=float).ravel()
    with _stage("weights"):
        h = auto_bandwidth(sample, y, cfg.metric) if cfg.h == "auto" else float(cfg.h)
        w = nw_weights(sample, y, h, cfg.kernel, cfg.metric)
        psi = small_ball_estimate(sample, y, h, cfg.metric)
        if isinstance(cfg.kn, str):
            kn = default_kn(sample.n, psi, cfg.kn)
        else:
            kn = KnConfig(cfg.kn, sample.n)
        alpha_n = cfg.alpha_n if cfg.alpha_n is not None else 1.0 - kn.fraction
    return y, h, w, psi, kn, alpha_n


def estimate_mee(sample: Sample, y, cfg: EstimationConfig) -> MEEResult:
    """Estimate the extreme L1-expectile of ``X`` given covariate ``y``.

    Errors carry the name of the failing stage (``weights``, ``hill``,
    ``tail_ratio``, ``dependence``, ``optimization``, ``assembly``).
    """
    y, h, w, psi, kn, alpha_n = _prepare(sample, y, cfg)
    d = sample.d
    warnings = []
    with _stage("hill"):
        tail = estimate_tail(sample, w, HillConfig(alpha_n, cfg.J, cfg.taus))
        _finite("gamma_hat", tail.gamma_hat, "hill")
    with _stage("tail_ratio"):
        _finite("c_hat", tail.c_hat, "tail_ratio")
    box = cfg.box or Box.uniform(d, 1e-3, 1e3)
    if box.d != d:
        raise ParameterError(f"box has dimension {box.d}, expected {d}")
    with _stage("dependence"):
        pseudo = pseudo_obs(sample, w)
        u_max = _lambda_u_max(box, tail.gamma_hat, tail.c_hat)
        lam = {}
        for j in range(d):
            for k in range(d):
                if j != k:
                    lam[(j, k)] = empirical_lambda_grid(
                        sample, w, j, k, kn, u_max[j, k], cfg.lambda_points, pseudo)
                    _finite(f"lambda_hat{(j, k)}", lam[(j, k)].values, "dependence")
        xi = XiEstimate(tail.gamma_hat, tail.c_hat, lam)
    with _stage("optimization"):
        objective = MEELoss(xi, cfg.quadrature)
        starts = default_starts(xi.gamma, xi.c, box)
        rep = multi_start_minimize(objective.fun, objective.grad, box, starts,
                                   cfg.optimizer)
        _finite("theta_hat", rep.x, "optimization")
        if not rep.best.converged:
            warnings.append(f"optimizer did not converge: {rep.best.message}")
        ties = [m for m in rep.minima if abs(m.fun - rep.best.fun) <= _TIE_TOL]
        if len(ties) > 1:
            warnings.append(
                f"{len(ties)} distinct minima with equal loss; the optimum may "
                "not be unique")
        theta = ThetaVector.from_array(rep.x)
    with _stage("assembly"):
        q1 = float(CondEcdf(sample.x[:, 0], w.weights).quantile(cfg.alpha))
        expectile = assemble_expectile(q1, theta, tail.gamma_hat)
        _finite("expectile", expectile, "assembly")
    with _stage("rates"):
        plan = rate_plan(sample.n, alpha_n, psi, kn.k_n, tail.gamma_hat, cfg.mu)
    return MEEResult(theta, tail.gamma_hat, tail.c_hat, expectile, q1, rep, plan,
                     warnings, h, psi, int(kn.k_n), alpha_n, cfg.alpha,
                     [ThetaVector.from_array(m.x) for m in rep.minima])


@dataclass(frozen=True)
class ModerateLevelCheck:
    alpha: float
    direct: np.ndarray
    assembled: np.ndarray
    rel_gap: np.ndarray
    result: MEEResult


def moderate_level_check(sample: Sample, y, cfg: EstimationConfig,
                         alpha_moderate: float) -> ModerateLevelCheck:
    """Compare the direct weighted expectile with the assembled one.

    Both are computed at ``alpha_moderate``; the relative gap is taken
    componentwise with respect to the direct expectile.
    """
    if sample.d < 2:
        raise DimensionError("the moderate-level check needs d >= 2",
                             stage="input")
    if not 0.9 < alpha_moderate < 0.99:
        raise DomainError("alpha_moderate must lie in (0.9, 0.99)")
    from dataclasses import replace

    res = estimate_mee(sample, y, replace(cfg, alpha=alpha_moderate))
    _, _, w, *_ = _prepare(sample, y, cfg)
    with _stage("direct_expectile"):
        direct = direct_empirical_expectile(sample, w, alpha_moderate)
    gap = np.abs(res.expectile - direct) / np.abs(direct)
    return ModerateLevelCheck(alpha_moderate, direct, res.expectile, gap, res)
