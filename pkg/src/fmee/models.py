"""Synthetic conditional models with known tail behaviour.

A :class:`ConditionalModel` draws a functional covariate per observation,
maps it to a tail index (shared by all margins) and a copula parameter,
then samples heavy-tailed margins through their inverse survival
functions. Its ``xi_true`` and ``theta_star_*`` methods supply the exact
quantities the estimators are checked against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dependence import FAMILIES
from .errors import (DomainError, ModelError, OptimizationError,
                     ParameterError, UnsupportedError)
from .objective import MEELoss, ThetaVector, XiEstimate, default_starts, loss
from .optimize import Box, OptimizerOptions, multi_start_minimize
from .sample import Sample

__all__ = [
    "MarginalFamily",
    "CopulaModel",
    "ConditionalModel",
    "marginal_inverse_survival",
    "marginal_survival",
    "sample_copula",
    "generate_dataset",
    "theta_star_analytic",
    "theta_star_reference",
]

_MARGINALS = ("lomax", "burr", "frechet", "hall_weiss")


@dataclass(frozen=True)
class MarginalFamily:
    """Heavy-tailed margin.

    ========== ================================ =================
    kind       survival function                tail index
    ========== ================================ =================
    lomax      ``(1 + x/scale)**(-1/gamma)``    ``gamma``
    burr       ``(1 + x**tau)**(-lam)``         ``1/(tau*lam)``
    frechet    ``1 - exp(-x**(-1/gamma))``      ``gamma``
    hall_weiss ``x**(-alpha) (1 + x**rho)/2``   ``1/alpha``
    ========== ================================ =================

    Hall-Weiss lives on ``[1, inf)``; the others on ``[0, inf)``.
    """

    kind: str
    gamma: float | None = None
    scale: float = 1.0
    tau: float | None = None
    lam: float | None = None
    alpha: float | None = None
    rho: float | None = None

    def __post_init__(self):
        if self.kind not in _MARGINALS:
            raise ParameterError(f"unknown marginal family {self.kind!r}")
        need = {"lomax": ("gamma", "scale"), "burr": ("tau", "lam"),
                "frechet": ("gamma",), "hall_weiss": ("alpha", "rho")}[self.kind]
        for name in need:
            v = getattr(self, name)
            if v is None or not np.isfinite(v):
                raise ParameterError(f"{self.kind} needs parameter {name}")
            if name != "rho" and not v > 0:
                raise ParameterError(f"{self.kind}: {name} must be positive")
        if self.kind == "hall_weiss" and not self.rho < 0:
            raise ParameterError("hall_weiss needs rho < 0")

    @property
    def tail_index(self) -> float:
        if self.kind in ("lomax", "frechet"):
            return self.gamma
        if self.kind == "burr":
            return 1.0 / (self.tau * self.lam)
        return 1.0 / self.alpha

    @property
    def left_endpoint(self) -> float:
        return 1.0 if self.kind == "hall_weiss" else 0.0

    def with_gamma(self, gamma: float) -> "MarginalFamily":
        """Same family with tail index ``gamma``; shape parameters kept."""
        if self.kind in ("lomax", "frechet"):
            return _replace(self, gamma=gamma)
        if self.kind == "burr":
            return _replace(self, lam=1.0 / (self.tau * gamma))
        return _replace(self, alpha=1.0 / gamma)

    def tail_constant(self, gamma: float | None = None) -> float:
        """``C`` in ``survival(x) ~ C x**(-1/gamma)`` as ``x -> inf``."""
        fam = self if gamma is None else self.with_gamma(gamma)
        if fam.kind == "lomax":
            return fam.scale ** (1.0 / fam.gamma)
        if fam.kind == "hall_weiss":
            return 0.5
        return 1.0


def _replace(fam, **kw):
    from dataclasses import replace
    return replace(fam, **kw)


def _params(fam: MarginalFamily, gamma):
    """Family parameters, with the tail index optionally overridden per row."""
    if gamma is None:
        gamma = fam.tail_index
    gamma = np.asarray(gamma, dtype=float)
    if fam.kind == "lomax":
        return {"gamma": gamma, "scale": fam.scale}
    if fam.kind == "frechet":
        return {"gamma": gamma}
    if fam.kind == "burr":
        return {"tau": fam.tau, "lam": 1.0 / (fam.tau * gamma)}
    return {"alpha": 1.0 / gamma, "rho": fam.rho}


def marginal_survival(fam: MarginalFamily, x, gamma=None):
    x = np.asarray(x, dtype=float)
    p = _params(fam, gamma)
    if fam.kind == "lomax":
        return (1.0 + x / p["scale"]) ** (-1.0 / p["gamma"])
    if fam.kind == "burr":
        return (1.0 + x ** p["tau"]) ** (-p["lam"])
    if fam.kind == "frechet":
        with np.errstate(divide="ignore"):
            return -np.expm1(-x ** (-1.0 / p["gamma"]))
    xc = np.maximum(x, 1.0)
    return np.where(x < 1.0, 1.0,
                    0.5 * xc ** -p["alpha"] * (1.0 + xc ** p["rho"]))


def _hall_weiss_inverse(u, alpha, rho):
    # survival is decreasing on [1, inf); u**(-1/alpha) is an upper bracket
    # since x**rho <= 1 there, bisection runs on log x
    lo = np.zeros_like(u)
    hi = np.maximum(-np.log(u) / alpha, 0.0) + 1e-300
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        x = np.exp(mid)
        above = 0.5 * x ** -alpha * (1.0 + x ** rho) > u
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
        if np.all(hi - lo <= 1e-13 * np.maximum(hi, 1.0)):
            break
    return np.exp(0.5 * (lo + hi))


def marginal_inverse_survival(fam: MarginalFamily, u, gamma=None):
    """``x`` with ``survival(x) = u`` for ``u`` in ``(0, 1]``."""
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u > 1)) or np.any(~np.isfinite(u)):
        raise DomainError("inverse survival needs u in (0, 1]")
    p = _params(fam, gamma)
    if fam.kind == "lomax":
        out = p["scale"] * np.expm1(-p["gamma"] * np.log(u))
    elif fam.kind == "burr":
        out = np.expm1(-np.log(u) / p["lam"]) ** (1.0 / p["tau"])
    elif fam.kind == "frechet":
        with np.errstate(divide="ignore"):
            out = (-np.log1p(-u)) ** (-p["gamma"])
        out = np.where(u >= 1.0, 0.0, out)
    else:
        alpha = np.broadcast_to(p["alpha"], u.shape)
        out = np.where(u >= 1.0, 1.0,
                       _hall_weiss_inverse(u, alpha, p["rho"]))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CopulaModel:
    kind: str
    d: int = 2
    theta: float | None = None

    def __post_init__(self):
        if self.kind not in FAMILIES:
            raise UnsupportedError(f"unsupported copula {self.kind!r}")
        if self.d < 1:
            raise ParameterError("copula dimension must be positive")
        if self.kind == "survival_clayton" and (self.theta is None or not self.theta > 0):
            raise ParameterError("survival Clayton needs theta > 0")


def _survival_uniforms(kind, theta, n, d, rng):
    """Sample ``1 - V`` for ``V`` from the copula, kept exact near 0.

    ``theta`` may be a per-row array for the Clayton family.
    """
    if kind == "comonotone":
        u = 1.0 - rng.random(n)
        return np.repeat(u[:, None], d, axis=1)
    if kind == "independence":
        return 1.0 - rng.random((n, d))
    theta = np.broadcast_to(np.asarray(theta, dtype=float), (n,))
    if np.any(theta <= 0):
        raise ParameterError("Clayton parameter must be positive")
    # gamma frailty: V ~ Gamma(1/theta), U_j = (1 + E_j/V)**(-1/theta)
    frailty = rng.gamma(1.0 / theta, 1.0, size=n)
    expo = rng.exponential(1.0, size=(n, d))
    s = np.exp(-np.log1p(expo / frailty[:, None]) / theta[:, None])
    return np.clip(s, np.finfo(float).tiny, 1.0)


def sample_copula(model: CopulaModel, n: int, seed=None) -> np.ndarray:
    """``n`` draws from the copula as an ``(n, d)`` array."""
    if n < 1:
        raise ParameterError("n must be positive")
    rng = np.random.default_rng(seed)
    return 1.0 - _survival_uniforms(model.kind, model.theta, n, model.d, rng)


@dataclass(frozen=True)
class ConditionalModel:
    """Covariate-dependent heavy-tailed model with equivalent marginal tails.

    The tail index is ``gamma(y) = gamma_intercept + gamma_slope * mean(y)``,
    clipped to ``gamma_clip`` when given; the Clayton parameter is
    ``theta_intercept + theta_slope * mean(y)``. Every margin is its template
    family with the tail index replaced by ``gamma(y)``.

    Covariates: ``"fourier"`` curves ``c + a sin(2 pi t) + b cos(2 pi t)`` on
    ``p`` grid points of ``[0, 1]`` with ``a, b, c`` uniform on ``[-1, 1]``;
    ``"constant"`` curves equal to ``constant_level`` everywhere.
    """

    margins: tuple
    copula: str = "independence"
    gamma_intercept: float = 0.5
    gamma_slope: float = 0.0
    gamma_clip: tuple | None = (0.2, 0.8)
    theta_intercept: float | None = None
    theta_slope: float = 0.0
    covariate: str = "constant"
    p: int = 100
    constant_level: float = 0.0

    def __post_init__(self):
        margins = tuple(self.margins)
        object.__setattr__(self, "margins", margins)
        if len(margins) < 1:
            raise ModelError("at least one margin is required")
        if self.copula not in FAMILIES:
            raise UnsupportedError(f"unsupported copula {self.copula!r}")
        if self.copula == "survival_clayton" and self.theta_intercept is None:
            raise ModelError("survival Clayton needs theta_intercept")
        if self.covariate not in ("fourier", "constant"):
            raise ModelError(f"unknown covariate process {self.covariate!r}")
        if self.p < 1:
            raise ModelError("grid size p must be positive")

    @property
    def d(self) -> int:
        return len(self.margins)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.p)

    def covariates(self, n: int, rng) -> np.ndarray:
        if self.covariate == "constant":
            return np.full((n, self.p), float(self.constant_level))
        coef = rng.uniform(-1.0, 1.0, size=(n, 3))
        t = 2.0 * np.pi * self.grid
        return (coef[:, :1] + coef[:, 1:2] * np.sin(t)[None, :]
                + coef[:, 2:3] * np.cos(t)[None, :])

    def gamma_at(self, y) -> np.ndarray | float:
        y = np.asarray(y, dtype=float)
        g = self.gamma_intercept + self.gamma_slope * y.mean(axis=-1)
        if self.gamma_clip is not None:
            g = np.clip(g, *self.gamma_clip)
        return g

    def theta_at(self, y):
        if self.copula != "survival_clayton":
            return None
        y = np.asarray(y, dtype=float)
        th = self.theta_intercept + self.theta_slope * y.mean(axis=-1)
        if np.any(th <= 0):
            raise ModelError("Clayton parameter theta(y) must be positive")
        return th

    def tail_ratios(self, y) -> np.ndarray:
        g = float(self.gamma_at(y))
        consts = np.array([m.tail_constant(g) for m in self.margins])
        return consts / consts[0]

    def xi_true(self, y) -> XiEstimate:
        """Exact plug-in vector at covariate ``y``."""
        g = float(self.gamma_at(y))
        th = self.theta_at(y)
        return XiEstimate.closed_form(g, self.tail_ratios(y), self.copula,
                                      None if th is None else float(th))


def generate_dataset(model: ConditionalModel, n: int, seed=None) -> Sample:
    """Draw ``n`` observations; identical seeds give identical samples."""
    if n < 1:
        raise ParameterError("n must be positive")
    rng = np.random.default_rng(seed)
    y = model.covariates(n, rng)
    gamma = np.broadcast_to(model.gamma_at(y), (n,))
    if np.any((gamma <= 0) | (gamma >= 1)):
        raise ModelError("gamma(y) must lie in (0, 1) for every covariate")
    theta = model.theta_at(y)
    s = _survival_uniforms(model.copula, theta, n, model.d, rng)
    x = np.column_stack([
        marginal_inverse_survival(fam, s[:, j], gamma)
        for j, fam in enumerate(model.margins)
    ])
    return Sample(x, y)


def theta_star_analytic(model: ConditionalModel, y) -> ThetaVector | None:
    """Closed-form root for symmetric independence or comonotone models."""
    if model.copula not in ("independence", "comonotone"):
        return None
    if not np.allclose(model.tail_ratios(y), 1.0, rtol=1e-12, atol=0.0):
        return None
    g = float(model.gamma_at(y))
    d = model.d
    eta = g / (1.0 - g) / (d if model.copula == "independence" else 1)
    return ThetaVector(eta, (1.0,) * (d - 1))


def theta_star_reference(xi_true: XiEstimate, box: Box | None = None,
                         opts: OptimizerOptions | None = None,
                         loss_tol: float = 1e-12) -> ThetaVector:
    """Numerical minimizer of the exact loss, checked to be a root."""
    box = box or Box.uniform(xi_true.d, 1e-3, 1e3)
    objective = MEELoss(xi_true)
    starts = default_starts(xi_true.gamma, xi_true.c, box)
    rep = multi_start_minimize(objective.fun, objective.grad, box, starts, opts)
    value = loss(rep.x, xi_true)
    if not value <= loss_tol:
        raise OptimizationError(
            f"no start reached a root: best loss {value:.3g}",
            stage="theta_star_reference")
    return ThetaVector.from_array(rep.x)
