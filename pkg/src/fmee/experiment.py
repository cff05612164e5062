"""Monte Carlo experiments: repeated simulate-and-estimate over a grid of n.

Every replication draws its data from a seed derived from
``(master_seed, n_index, rep)`` alone, so the rows do not depend on the
number of workers or the order in which replications finish.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import MEEError, ParameterError
from .io import format_float
from .models import (ConditionalModel, generate_dataset, theta_star_analytic,
                     theta_star_reference)
from .pipeline import EstimationConfig, estimate_mee

__all__ = ["ExperimentConfig", "ResultRow", "run_experiment", "write_rows",
           "row_seed", "worker_count", "result_columns"]


@dataclass(frozen=True)
class ExperimentConfig:
    """``y`` defaults to the constant curve at the model's ``constant_level``.

    ``record_timing=False`` writes an empty ``wall_time_ms`` so that outputs
    of repeated runs can be compared byte for byte.
    """

    model: ConditionalModel
    grid: tuple
    reps: int
    seed: int
    estimation: EstimationConfig
    y: np.ndarray | None = None
    out: str | None = None
    record_timing: bool = True

    def __post_init__(self):
        grid = tuple(int(n) for n in np.atleast_1d(self.grid))
        object.__setattr__(self, "grid", grid)
        if self.reps < 1:
            raise ParameterError("reps must be at least 1")
        if not grid or min(grid) < 100:
            raise ParameterError("every sample size must be at least 100")
        if self.y is not None:
            y = np.asarray(self.y, dtype=float).ravel()
            if y.size != self.model.p:
                raise ParameterError(
                    f"covariate point has {y.size} entries, model uses p={self.model.p}")
            object.__setattr__(self, "y", y)

    @property
    def point(self) -> np.ndarray:
        if self.y is not None:
            return self.y
        return np.full(self.model.p, float(self.model.constant_level))


@dataclass
class ResultRow:
    n: int
    rep: int
    seed: int
    gamma_hat: float = math.nan
    c_hat: tuple = ()
    theta_hat: tuple = ()
    theta_star: tuple | None = None
    l1_error: float | None = None
    expectile: tuple = ()
    rate_combined: float = math.nan
    wall_time_ms: float | None = None
    converged: bool = False
    error: str = ""
    warnings: list = field(default_factory=list)


def result_columns(d: int) -> list[str]:
    cols = ["n", "rep", "seed", "gamma_hat"]
    cols += [f"c_hat_{j + 1}" for j in range(d)]
    cols += ["eta_hat"] + [f"beta_hat_{j + 1}" for j in range(1, d)]
    cols += ["eta_star"] + [f"beta_star_{j + 1}" for j in range(1, d)]
    cols += ["l1_error"] + [f"expectile_{j + 1}" for j in range(d)]
    cols += ["rate_combined", "wall_time_ms", "converged", "error"]
    return cols


def row_seed(master: int, n_index: int, rep: int) -> int:
    ss = np.random.SeedSequence([master, n_index, rep])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def worker_count(tasks: int) -> int:
    """Workers to use, capped by the ``MEE_THREADS`` environment variable."""
    env = os.environ.get("MEE_THREADS")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ParameterError(f"MEE_THREADS must be an integer, got {env!r}") from None
        if cap < 1:
            raise ParameterError("MEE_THREADS must be positive")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, tasks))


def _theta_star(cfg: ExperimentConfig):
    y = cfg.point
    star = theta_star_analytic(cfg.model, y)
    if star is not None:
        return star.as_array()
    try:
        return theta_star_reference(cfg.model.xi_true(y)).as_array()
    except MEEError:
        return None


def _one(args) -> ResultRow:
    cfg, n_index, rep, star = args
    n = cfg.grid[n_index]
    seed = row_seed(cfg.seed, n_index, rep)
    row = ResultRow(n=n, rep=rep, seed=seed, theta_star=None if star is None
                    else tuple(star))
    t0 = time.perf_counter()
    try:
        sample = generate_dataset(cfg.model, n, seed)
        res = estimate_mee(sample, cfg.point, cfg.estimation)
    except MEEError as exc:
        row.error = str(exc)
    else:
        th = res.theta_hat.as_array()
        row.gamma_hat = res.gamma_hat
        row.c_hat = tuple(res.c_hat)
        row.theta_hat = tuple(th)
        row.expectile = tuple(res.expectile)
        row.rate_combined = res.rate_plan.combined
        row.converged = res.converged
        row.warnings = list(res.warnings)
        if star is not None:
            row.l1_error = float(np.abs(th - star).sum())
    if cfg.record_timing:
        row.wall_time_ms = 1e3 * (time.perf_counter() - t0)
    return row


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> list[ResultRow]:
    """All ``len(grid) * reps`` rows, sorted by ``(n, rep)``.

    Failed replications are kept as rows with ``converged=False`` and the
    error text; the run continues.
    """
    star = _theta_star(cfg)
    tasks = [(cfg, i, r, star) for i in range(len(cfg.grid)) for r in range(cfg.reps)]
    workers = worker_count(len(tasks)) if workers is None else max(1, int(workers))
    if workers == 1:
        rows = [_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_one, tasks))
    rows.sort(key=lambda r: (r.n, r.rep))
    if cfg.out:
        write_rows(rows, cfg.out, cfg.model.d)
    return rows


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "" if math.isnan(v) else format_float(v)


def _padded(values, d):
    values = tuple(values or ())
    return values if len(values) == d else (None,) * d


def write_rows(rows: list[ResultRow], target, d: int) -> None:
    """Write rows as CSV in the fixed column order of :func:`result_columns`.

    ``target`` is a path or an open text file.
    """
    if hasattr(target, "write"):
        _write_rows(rows, target, d)
        return
    with open(target, "w", newline="", encoding="utf-8") as fh:
        _write_rows(rows, fh, d)


def _write_rows(rows, fh, d):
    out = csv.writer(fh, lineterminator="\n")
    out.writerow(result_columns(d))
    for r in rows:
        cells = [r.n, r.rep, r.seed, r.gamma_hat, *_padded(r.c_hat, d),
                 *_padded(r.theta_hat, d), *_padded(r.theta_star, d),
                 r.l1_error, *_padded(r.expectile, d), r.rate_combined,
                 r.wall_time_ms, r.converged]
        out.writerow([_cell(c) for c in cells] + [r.error])
