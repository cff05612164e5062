import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import equal_weights, make_sample
from fmee import (ClosedFormLambda, CopulaModel, EmpiricalLambda, KnConfig,
                  cond_empirical_copula, default_kn, empirical_lambda_grid,
                  lambda_hat, lambda_oracle, pseudo_obs, sample_copula, stdf_hat)
from fmee.errors import DomainError, ParameterError, UnsupportedError

FAMILIES = [("independence", None), ("comonotone", None), ("survival_clayton", 1.0),
            ("survival_clayton", 3.0)]


def _comonotone(n):
    v = np.arange(1.0, n + 1)
    return make_sample(np.column_stack([v, v]))


def _copula_sample(kind, n, seed, theta=None):
    x = sample_copula(CopulaModel(kind, 2, theta), n, seed)
    return make_sample(x), equal_weights(n)


def test_copula_total_mass():
    s = _comonotone(10)
    p = pseudo_obs(s, equal_weights(10))
    assert cond_empirical_copula(p, equal_weights(10), 0, 1, 1.0, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_copula_grounded():
    s, w = _copula_sample("independence", 200, 1)
    assert cond_empirical_copula(pseudo_obs(s, w), w, 0, 1, 0.0, 0.7) == 0.0


def test_copula_comonotone_diagonal():
    s = _comonotone(4)
    p = pseudo_obs(s, equal_weights(4))
    assert cond_empirical_copula(p, equal_weights(4), 0, 1, 0.5, 0.5) == 0.5


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 0.5), st.floats(0, 0.5))
def test_copula_monotone_and_bounded(u, v, du, dv):
    s, w = _copula_sample("survival_clayton", 300, 5, 2.0)
    p = pseudo_obs(s, w)
    c = cond_empirical_copula(p, w, 0, 1, u, v)
    c2 = cond_empirical_copula(p, w, 0, 1, min(u + du, 1), min(v + dv, 1))
    assert 0 <= c <= c2 <= 1


def test_stdf_at_origin():
    s, w = _copula_sample("independence", 100, 2)
    assert stdf_hat(s, w, 0, 1, KnConfig(10, 100), (0.0, 0.0)) == 0.0


def test_stdf_comonotone_diagonal():
    s = _comonotone(100)
    w = equal_weights(100)
    assert stdf_hat(s, w, 0, 1, KnConfig(10, 100), (1.0, 1.0)) == pytest.approx(1.0, abs=1e-12)
    assert lambda_hat(s, w, 0, 1, KnConfig(10, 100), (1.0, 1.0)) == pytest.approx(1.0, abs=1e-12)


def test_stdf_argument_out_of_domain():
    s = _comonotone(100)
    with pytest.raises(DomainError):
        stdf_hat(s, equal_weights(100), 0, 1, KnConfig(10, 100), (11.0, 1.0))


def test_lambda_hat_clamped_at_zero_argument():
    s = _comonotone(100)
    assert lambda_hat(s, equal_weights(100), 0, 1, KnConfig(10, 100), (1.0, 0.0)) == 0.0


@pytest.mark.slow
def test_independence_stdf_and_lambda_large_n():
    n = 10000
    s, w = _copula_sample("independence", n, 7)
    kn = KnConfig(int(np.ceil(n ** 0.7)), n)
    assert abs(stdf_hat(s, w, 0, 1, kn, (1.0, 1.0)) - 2.0) <= 0.15
    assert abs(lambda_hat(s, w, 0, 1, kn, (1.0, 1.0))) <= 0.15


def test_clayton_oracle_against_monte_carlo():
    n = 200000
    s, w = _copula_sample("survival_clayton", n, 11, 1.0)
    kn = KnConfig(2000, n)
    assert lambda_oracle("survival_clayton", 1.0, (1, 1)) == 0.5
    assert abs(lambda_hat(s, w, 0, 1, kn, (1.0, 1.0)) - 0.5) <= 0.03


@given(st.floats(0, 5), st.floats(0, 5))
def test_lambda_hat_within_frechet_bounds(x1, x2):
    s, w = _copula_sample("survival_clayton", 500, 3, 1.0)
    val = lambda_hat(s, w, 0, 1, KnConfig(50, 500), (x1, x2))
    assert 0.0 <= val <= min(x1, x2)


def test_oracle_values():
    assert lambda_oracle("comonotone", None, (0.3, 1)) == 0.3
    assert lambda_oracle("independence", None, (0.3, 7)) == 0.0
    with pytest.raises(UnsupportedError):
        lambda_oracle("gumbel", 2.0, (1, 1))
    with pytest.raises(ParameterError):
        lambda_oracle("survival_clayton", -1.0, (1, 1))


@pytest.mark.parametrize("family, theta", FAMILIES)
@given(x1=st.floats(0.01, 10), x2=st.floats(0.01, 10), t=st.floats(0.01, 100))
def test_oracle_homogeneity(family, theta, x1, x2, t):
    lhs = lambda_oracle(family, theta, (t * x1, t * x2))
    assert lhs == pytest.approx(t * lambda_oracle(family, theta, (x1, x2)), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("family, theta", FAMILIES)
def test_oracle_stdf_is_one_lipschitz(family, theta):
    grid = np.linspace(0.0, 3.0, 61)
    L = np.array([[a + b - lambda_oracle(family, theta, (a, b)) for b in grid] for a in grid])
    step = grid[1] - grid[0]
    assert np.max(np.abs(np.diff(L, axis=0))) <= step * (1 + 1e-12)
    assert np.max(np.abs(np.diff(L, axis=1))) <= step * (1 + 1e-12)


@pytest.mark.parametrize("theta", [0.5, 1.0, 4.0])
def test_closed_form_lambda_matches_oracle(theta):
    lam = ClosedFormLambda("survival_clayton", theta)
    u = np.geomspace(1e-8, 1e8, 33)
    expected = [lambda_oracle("survival_clayton", theta, (ui, 1.0)) for ui in u]
    np.testing.assert_allclose(lam(u), expected, rtol=1e-12)


def test_empirical_lambda_interpolation_and_tail():
    lam = EmpiricalLambda([1.0, 2.0], [0.5, 0.9])
    np.testing.assert_allclose(lam(np.array([0.0, 0.5, 1.5, 10.0])), [0.0, 0.25, 0.7, 0.9])


def test_empirical_lambda_weighted_integral_matches_quadrature():
    from scipy import integrate

    lam = EmpiricalLambda([0.2, 0.7, 1.5], [0.1, 0.45, 0.8])
    g = 0.4
    for upper in (0.5, 1.5, 7.0):
        edges = sorted({0.0, upper, *(b for b in (0.2, 0.7, 1.5) if b < upper)})
        ref = sum(integrate.quad(lambda u: lam(u) * u ** (-g - 1), a, b,
                                 epsabs=1e-13, epsrel=1e-12)[0]
                  for a, b in zip(edges[:-1], edges[1:]))
        assert lam.weighted_integral(upper, g) == pytest.approx(ref, rel=1e-9)


def test_empirical_grid_tracks_oracle():
    n = 20000
    s, w = _copula_sample("survival_clayton", n, 21, 1.0)
    kn = KnConfig(int(np.ceil(n ** 0.7)), n)
    lam = empirical_lambda_grid(s, w, 0, 1, kn, u_max=5.0, points=32)
    u = np.linspace(0.1, 5.0, 25)
    assert np.max(np.abs(lam(u) - u / (1 + u))) <= 0.1
    assert lam.u_max == pytest.approx(5.0)


def test_default_kn_rules():
    assert default_kn(10000, 0.01, "small_ball").k_n == 100
    assert default_kn(10000, 1.0, "auto").k_n == 100
    assert default_kn(100, 1.0, "small_ball").k_n == 99
    with pytest.raises(DomainError):
        default_kn(100, 0.0)
