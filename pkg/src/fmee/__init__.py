"""Extreme multivariate expectiles of heavy-tailed responses given a
functional covariate.

Typical use::

    from fmee import ConditionalModel, MarginalFamily, generate_dataset
    from fmee import EstimationConfig, estimate_mee

    model = ConditionalModel((MarginalFamily("lomax", 0.5),) * 2,
                             copula="comonotone", p=20)
    sample = generate_dataset(model, 20000, seed=1)
    result = estimate_mee(sample, [0.0] * 20, EstimationConfig(alpha=0.99))
"""

from .conditional import CondEcdf, cond_marginal_ecdf, cond_quantile, pseudo_obs
from .covariate import (Kernel, Metric, WeightVector, auto_bandwidth, distance,
                        distances, kernel_admissibility, nw_weights,
                        small_ball_estimate, weights_from_distances)
from .dependence import (ClosedFormLambda, EmpiricalLambda, KnConfig,
                         cond_empirical_copula, default_kn, empirical_lambda_grid,
                         lambda_hat, lambda_oracle, stdf_hat)
from .errors import (DegenerateTailError, DimensionError, DomainError,
                     EmptyNeighborhoodError, InfiniteMeanError, LogDomainError,
                     MEEError, ModelError, NumericError, OptimizationError,
                     ParameterError, ParseError, QuadratureError, UnsupportedError)
from .experiment import ExperimentConfig, ResultRow, run_experiment, write_rows
from .io import parse_dataset, write_dataset
from .models import (ConditionalModel, CopulaModel, MarginalFamily,
                     generate_dataset, marginal_inverse_survival,
                     marginal_survival, sample_copula, theta_star_analytic,
                     theta_star_reference)
from .objective import (MEELoss, QuadratureConfig, ThetaVector, XiEstimate,
                        assemble_expectile, direct_empirical_expectile, loss,
                        loss_gradient, phi, tail_integral)
from .optimize import Box, OptimizerOptions, minimize_box, multi_start_minimize
from .pipeline import (EstimationConfig, MEEResult, RatePlan, estimate_mee,
                       moderate_level_check, rate_plan)
from .sample import Sample
from .tail import HillConfig, estimate_tail, functional_hill, hill_functional, tail_ratio

__version__ = "0.1.0"
