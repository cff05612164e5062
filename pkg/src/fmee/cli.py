"""Command-line entry point: ``fmee <subcommand> [flags]``.

Subcommands ``simulate``, ``estimate``, ``experiment``, ``oracle`` and
``rates``. Exit status 0 on success, 1 on a usage error, 2 on a runtime
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from .covariate import Kernel, Metric
from .errors import MEEError
from .experiment import ExperimentConfig, run_experiment, write_rows
from .io import (estimation_config_from_dict, load_json, model_from_dict,
                 parse_dataset, write_dataset)
from .models import (ConditionalModel, MarginalFamily, generate_dataset,
                     theta_star_analytic, theta_star_reference)
from .objective import direct_empirical_expectile
from .optimize import Box
from .pipeline import EstimationConfig, _prepare, estimate_mee, rate_plan

__all__ = ["cli_main", "build_parser"]


class _UsageError(Exception):
    def __init__(self, message, parser=None):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}", self)


def _h(text):
    if text == "auto":
        return text
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a float or 'auto'") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("bandwidth must be positive")
    return v


def _kn(text):
    if text in ("auto", "small_ball"):
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer, 'auto' or 'small_ball'") from None


def _bounds(text):
    try:
        lo, hi = (float(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO:HI") from None
    if not 0 < lo < hi:
        raise argparse.ArgumentTypeError("need 0 < LO < HI")
    return lo, hi


def _floats(text):
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated floats") from None


def _grid(text):
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers") from None


def _estimation_flags(p, alpha_required):
    p.add_argument("--alpha", type=float, required=alpha_required,
                   help="extreme level in (0, 1)")
    p.add_argument("--h", type=_h, help="bandwidth or 'auto'")
    p.add_argument("--kernel", choices=("uniform", "quadratic"))
    p.add_argument("--metric", choices=("l2", "sup"))
    p.add_argument("--J", type=int, help="number of Hill levels")
    p.add_argument("--kn", type=_kn, help="intermediate sequence: INT, auto or small_ball")
    p.add_argument("--bounds", type=_bounds, help="optimization box LO:HI")
    p.add_argument("--mu", type=float, help="copula-rate exponent for the rate plan")


def _model_flags(p):
    p.add_argument("--config", help="model JSON file")
    p.add_argument("--copula", default="comonotone",
                   choices=("independence", "comonotone", "survival_clayton"))
    p.add_argument("--d", type=int, default=2, help="response dimension")
    p.add_argument("--gamma", type=float, default=0.5, help="tail index")
    p.add_argument("--theta", type=float, help="Clayton parameter")
    p.add_argument("--covariate", default="constant", choices=("constant", "fourier"))
    p.add_argument("--p", type=int, default=20, help="covariate grid size")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fmee", description=(
        "Extreme multivariate expectiles of heavy-tailed responses given a "
        "functional covariate."))
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="draw a dataset CSV from a model")
    _model_flags(p)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="dataset CSV to write")

    p = sub.add_parser("estimate", help="estimate the expectile at a covariate point")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--y", type=_floats,
                   help="covariate point, comma separated (default: mean curve)")
    _estimation_flags(p, alpha_required=True)
    p.add_argument("--out", help="result JSON (default: stdout)")

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment")
    p.add_argument("--config", required=True, help="experiment JSON file")
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--n", type=_grid, help="grid of sample sizes, comma separated")
    _estimation_flags(p, alpha_required=False)
    p.add_argument("--out", help="result CSV (default: stdout)")
    p.add_argument("--no-timing", action="store_true",
                   help="leave wall_time_ms empty for reproducible output")

    p = sub.add_parser("oracle", help="exact optimum and a direct expectile for a model")
    _model_flags(p)
    p.add_argument("--alpha", type=float, default=0.95, help="moderate level")
    p.add_argument("--n", type=int, default=20000, help="sample size for the direct expectile")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bounds", type=_bounds)

    p = sub.add_parser("rates", help="rate plan for given inputs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True, help="extreme level alpha_n")
    p.add_argument("--psi", type=float, required=True, help="small-ball estimate")
    p.add_argument("--kn", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True, help="tail index estimate")
    p.add_argument("--mu", type=float, default=1.0)
    return parser


def _model(args) -> ConditionalModel:
    if args.config:
        return model_from_dict(load_json(args.config))
    margins = tuple(MarginalFamily("lomax", args.gamma) for _ in range(args.d))
    return ConditionalModel(margins, copula=args.copula, gamma_intercept=args.gamma,
                            gamma_clip=None, theta_intercept=args.theta,
                            covariate=args.covariate, p=args.p)


def _override(cfg: EstimationConfig, args, d: int) -> EstimationConfig:
    kw = {}
    if args.alpha is not None:
        kw["alpha"] = args.alpha
    if args.h is not None:
        kw["h"] = args.h
    if args.kernel:
        kw["kernel"] = Kernel(args.kernel)
    if args.metric:
        kw["metric"] = Metric(args.metric)
    if args.J is not None:
        kw["J"] = args.J
    if args.kn is not None:
        kw["kn"] = args.kn
    if args.bounds is not None:
        kw["box"] = Box.uniform(d, *args.bounds)
    if args.mu is not None:
        kw["mu"] = args.mu
    return replace(cfg, **kw)


def _emit(text: str, path) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_simulate(args):
    write_dataset(generate_dataset(_model(args), args.n, args.seed), args.out)


def _cmd_estimate(args):
    sample = parse_dataset(args.data)
    y = sample.y.mean(axis=0) if args.y is None else args.y
    if y.size != sample.p:
        raise _UsageError(f"--y has {y.size} entries, dataset has p={sample.p}")
    cfg = _override(EstimationConfig(alpha=args.alpha), args, sample.d)
    res = estimate_mee(sample, y, cfg)
    _emit(json.dumps(res.as_dict(), indent=2) + "\n", args.out)


def _cmd_experiment(args):
    spec = load_json(args.config)
    try:
        model = model_from_dict(spec["model"])
        base = estimation_config_from_dict(spec.get("estimation", {"alpha": 0.99}),
                                           model.d)
        cfg = ExperimentConfig(
            model=model,
            grid=args.n or tuple(spec["grid"]),
            reps=args.reps if args.reps is not None else int(spec.get("reps", 1)),
            seed=args.seed if args.seed is not None else int(spec.get("seed", 0)),
            estimation=_override(base, args, model.d),
            y=spec.get("y"),
            out=args.out,
            record_timing=not args.no_timing,
        )
    except KeyError as exc:
        raise _UsageError(f"experiment config misses key {exc}") from None
    rows = run_experiment(cfg)
    if not args.out:
        write_rows(rows, sys.stdout, model.d)


def _cmd_oracle(args):
    model = _model(args)
    y = np.full(model.p, float(model.constant_level))
    box = Box.uniform(model.d, *args.bounds) if args.bounds else None
    analytic = theta_star_analytic(model, y)
    reference = theta_star_reference(model.xi_true(y), box)
    sample = generate_dataset(model, args.n, args.seed)
    _, _, w, *_ = _prepare(sample, y, EstimationConfig(alpha=args.alpha))
    direct = direct_empirical_expectile(sample, w, args.alpha)
    out = {
        "gamma": float(model.gamma_at(y)),
        "tail_ratios": model.tail_ratios(y).tolist(),
        "theta_star_analytic": None if analytic is None else analytic.as_array().tolist(),
        "theta_star_reference": reference.as_array().tolist(),
        "direct_expectile": {"alpha": args.alpha, "n": args.n,
                             "value": direct.tolist()},
    }
    sys.stdout.write(json.dumps(out, indent=2) + "\n")


def _cmd_rates(args):
    plan = rate_plan(args.n, args.alpha, args.psi, args.kn, args.gamma, args.mu)
    sys.stdout.write(json.dumps(plan.as_dict(), indent=2) + "\n")


_COMMANDS = {"simulate": _cmd_simulate, "estimate": _cmd_estimate,
             "experiment": _cmd_experiment, "oracle": _cmd_oracle,
             "rates": _cmd_rates}


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        (exc.parser or parser).print_help(sys.stderr)
        return 1
    except (MEEError, OSError) as exc:
        print(f"fmee: error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(cli_main())
