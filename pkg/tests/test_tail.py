import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import equal_weights, make_sample
from fmee import (DegenerateTailError, HillConfig, InfiniteMeanError,
                  estimate_tail, functional_hill, hill_functional, tail_ratio)
from fmee.errors import LogDomainError, ParameterError


def pareto_quantile(gamma):
    return lambda a: (1.0 - np.asarray(a)) ** -gamma


def test_two_level_pareto_gives_exact_index():
    # numerator 0.5 ln 2, denominator ln 2
    assert functional_hill(pareto_quantile(0.5), 0.99, (1.0, 0.5)) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("gamma", [0.2, 0.35, 0.5, 0.8])
@pytest.mark.parametrize("alpha_n", [0.9, 0.99, 0.999])
def test_default_levels_exact_on_pareto(gamma, alpha_n):
    cfg = HillConfig(alpha_n)
    assert functional_hill(pareto_quantile(gamma), alpha_n, cfg.taus) == pytest.approx(gamma, abs=1e-12)


def test_unit_index_is_rejected():
    with pytest.raises(InfiniteMeanError) as err:
        functional_hill(pareto_quantile(1.0), 0.95, (0.5,))
    assert err.value.stage == "hill"


def test_constant_data_is_degenerate():
    s = make_sample(np.full((50, 2), 3.0))
    with pytest.raises(DegenerateTailError):
        hill_functional(s, equal_weights(50), HillConfig(0.9))


def test_nonpositive_quantile_is_rejected():
    s = make_sample(np.column_stack([np.linspace(-2, -1, 20)] * 2))
    with pytest.raises(LogDomainError):
        hill_functional(s, equal_weights(20), HillConfig(0.5))


@pytest.mark.parametrize("kwargs", [dict(alpha_n=1.0), dict(alpha_n=0.9, J=0),
                                    dict(alpha_n=0.9, J=2, taus=(0.5, 1.0)),
                                    dict(alpha_n=0.9, J=2, taus=(1.0, 1.0)),
                                    dict(alpha_n=0.9, J=2, taus=(1.0,))])
def test_hill_config_validation(kwargs):
    with pytest.raises(ParameterError):
        HillConfig(**kwargs)


def _two_column(q1, q2, n=100):
    u = (np.arange(n) + 0.5) / n
    return make_sample(np.column_stack([q1 * (1 - u) ** -0.5, q2 * (1 - u) ** -0.5]))


def test_tail_ratio_first_margin_is_one():
    s = _two_column(1.0, 2.0)
    assert tail_ratio(s, equal_weights(100), 0.9, 0.37, 0) == 1.0


def test_tail_ratio_quantile_ratio_two():
    s = _two_column(1.0, 2.0)
    assert tail_ratio(s, equal_weights(100), 0.9, 0.5, 1) == pytest.approx(4.0, rel=1e-12)


@pytest.mark.parametrize("gamma_hat", [0.1, 0.5, 0.9])
def test_tail_ratio_equal_margins(gamma_hat):
    s = _two_column(1.0, 1.0)
    assert tail_ratio(s, equal_weights(100), 0.9, gamma_hat, 1) == 1.0


@given(st.floats(1e-3, 1e3))
def test_hill_scale_invariance(lam):
    rng = np.random.default_rng(3)
    x = rng.pareto(2.0, size=(400, 2)) + 1.0
    w = equal_weights(400)
    cfg = HillConfig(0.9)
    g = hill_functional(make_sample(x), w, cfg)
    gs = hill_functional(make_sample(x * np.array([lam, 1.0])), w, cfg)
    assert gs == pytest.approx(g, abs=1e-12)


@given(st.floats(0.1, 10.0))
def test_tail_ratio_equivariance(lam):
    rng = np.random.default_rng(4)
    x = rng.pareto(2.0, size=(400, 2)) + 1.0
    w = equal_weights(400)
    est = estimate_tail(make_sample(x), w, HillConfig(0.9))
    scaled = estimate_tail(make_sample(x * np.array([1.0, lam])), w, HillConfig(0.9))
    assert scaled.c_hat[1] == pytest.approx(est.c_hat[1] * lam ** (1 / est.gamma_hat), rel=1e-10)


def test_estimate_tail_on_exact_quantile_grid():
    # a sample equal to the quantile grid of Pareto(0.5) reproduces the index
    n = 100000
    u = (np.arange(n) + 1.0) / n
    x = (1 - u + 1.0 / n) ** -0.5
    est = estimate_tail(make_sample(np.column_stack([x, 3 * x])), equal_weights(n), HillConfig(0.99))
    assert est.gamma_hat == pytest.approx(0.5, abs=2e-3)
    assert est.c_hat[1] == pytest.approx(3 ** (1 / est.gamma_hat), rel=1e-12)
    assert est.c_hat[0] == 1.0
    assert math.isfinite(est.quantiles[1])
