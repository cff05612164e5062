import numpy as np
import pytest
from hypothesis import settings

from fmee import ConditionalModel, MarginalFamily, Sample

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def make_sample(x, y=None) -> Sample:
    """Sample from a response matrix, with a constant 1-point covariate by default."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if y is None:
        y = np.zeros((x.shape[0], 1))
    return Sample(x, np.asarray(y, dtype=float))


def equal_weights(n):
    from fmee import WeightVector

    return WeightVector(np.full(n, 1.0 / n))


def lomax_model(copula="comonotone", d=2, gamma=0.5, scales=None, theta=None, p=20):
    scales = scales or (1.0,) * d
    margins = tuple(MarginalFamily("lomax", gamma, s) for s in scales)
    return ConditionalModel(margins, copula=copula, gamma_intercept=gamma,
                            theta_intercept=theta, covariate="constant", p=p)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
