import numpy as np
import pytest
from scipy import stats

from conftest import equal_weights, lomax_model
from fmee import (CopulaModel, HillConfig, MarginalFamily, ModelError,
                  XiEstimate, cond_quantile, generate_dataset, hill_functional,
                  loss, marginal_inverse_survival, marginal_survival,
                  sample_copula, theta_star_analytic, theta_star_reference)
from fmee.errors import DomainError, ParameterError

FAMILIES = [MarginalFamily("lomax", 0.4, 2.0), MarginalFamily("burr", tau=2.0, lam=1.5),
            MarginalFamily("frechet", 0.6), MarginalFamily("hall_weiss", alpha=2.5, rho=-1.0)]


def test_lomax_inverse():
    assert marginal_inverse_survival(MarginalFamily("lomax", 1.0, 1.0), 0.25) == pytest.approx(3.0)


def test_burr_inverse():
    assert marginal_inverse_survival(MarginalFamily("burr", tau=1.0, lam=2.0), 1 / 16) == pytest.approx(3.0)


@pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: f.kind)
def test_left_endpoint(fam):
    assert marginal_inverse_survival(fam, 1.0) == fam.left_endpoint


@pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: f.kind)
def test_inverse_survival_round_trip(fam):
    u = np.array([1e-4, 1e-3, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99])
    np.testing.assert_allclose(marginal_survival(fam, marginal_inverse_survival(fam, u)), u,
                               rtol=0, atol=1e-10)


@pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: f.kind)
def test_inverse_survival_domain(fam):
    with pytest.raises(DomainError):
        marginal_inverse_survival(fam, 0.0)


def test_copula_parameter_validation():
    with pytest.raises(ParameterError):
        CopulaModel("survival_clayton", 2, 0.0)


def test_comonotone_columns_identical():
    x = sample_copula(CopulaModel("comonotone", 3), 100, 0)
    assert np.all(x[:, 0] == x[:, 1]) and np.all(x[:, 1] == x[:, 2])


def _brute_force_tau(x):
    dx = np.sign(x[:, None, 0] - x[None, :, 0])
    dy = np.sign(x[:, None, 1] - x[None, :, 1])
    n = x.shape[0]
    return float((dx * dy).sum() / (n * (n - 1)))


def test_scipy_kendall_agrees_with_brute_force():
    x = sample_copula(CopulaModel("survival_clayton", 2, 2.0), 400, 1)
    assert stats.kendalltau(x[:, 0], x[:, 1]).statistic == pytest.approx(_brute_force_tau(x), abs=1e-12)


@pytest.mark.parametrize("kind, theta, tau", [("independence", None, 0.0),
                                              ("survival_clayton", 2.0, 0.5)])
def test_kendall_tau(kind, theta, tau):
    x = sample_copula(CopulaModel(kind, 2, theta), 50000, 3)
    assert abs(stats.kendalltau(x[:, 0], x[:, 1]).statistic - tau) <= 0.02


def test_survival_clayton_has_upper_tail_dependence():
    x = sample_copula(CopulaModel("survival_clayton", 2, 1.0), 100000, 5)
    upper = np.mean((x[:, 0] > 0.99) & (x[:, 1] > 0.99)) / 0.01
    lower = np.mean((x[:, 0] < 0.01) & (x[:, 1] < 0.01)) / 0.01
    assert upper == pytest.approx(0.5, abs=0.08)
    assert lower < 0.1


@pytest.mark.parametrize("kind, theta", [("independence", None), ("comonotone", None),
                                         ("survival_clayton", 1.5)])
def test_copula_margins_uniform(kind, theta):
    n = 10000
    x = sample_copula(CopulaModel(kind, 2, theta), n, 9)
    for col in x.T:
        assert stats.kstest(col, "uniform").statistic <= 1.5 * 1.36 / np.sqrt(n)


def test_dataset_shape_and_determinism():
    model = lomax_model("survival_clayton", d=3, theta=1.0, p=7)
    a = generate_dataset(model, 50, 42)
    assert (a.n, a.d, a.p) == (50, 3, 7)
    assert a == generate_dataset(model, 50, 42)
    assert not a == generate_dataset(model, 50, 43)


def test_fourier_covariates_drive_tail_index():
    margins = (MarginalFamily("lomax", 0.5),) * 2
    model = __import__("fmee").ConditionalModel(margins, gamma_intercept=0.5, gamma_slope=0.3,
                                                covariate="fourier", p=30)
    s = generate_dataset(model, 200, 1)
    g = model.gamma_at(s.y)
    assert g.shape == (200,)
    assert np.all((g >= 0.2) & (g <= 0.8))
    assert np.ptp(g) > 0


def test_gamma_outside_unit_interval_is_a_model_error():
    margins = (MarginalFamily("lomax", 0.5),) * 2
    model = __import__("fmee").ConditionalModel(margins, gamma_intercept=1.2, gamma_clip=None)
    with pytest.raises(ModelError):
        generate_dataset(model, 10, 0)


def test_equivalent_tails_ratio():
    model = lomax_model("independence", scales=(1.0, 2.0))
    assert model.tail_ratios(np.zeros(model.p))[1] == pytest.approx(4.0)
    s = generate_dataset(model, 50000, 8)
    w = equal_weights(s.n)
    level = 1 - 2000 / s.n
    ratio = (cond_quantile(s, w, 1, level) / cond_quantile(s, w, 0, level)) ** 2
    assert ratio == pytest.approx(4.0, rel=0.1)


@pytest.mark.slow
def test_pooled_hill_consistency():
    model = lomax_model("independence")
    errs = []
    for rep in range(50):
        s = generate_dataset(model, 20000, rep)
        errs.append(abs(hill_functional(s, equal_weights(s.n), HillConfig(1 - 141 / s.n)) - 0.5))
    assert np.median(errs) <= 0.1


@pytest.mark.parametrize("copula, d, gamma, expected", [
    ("independence", 2, 0.5, (0.5, 1.0)), ("comonotone", 2, 0.5, (1.0, 1.0)),
    ("independence", 3, 0.3, (0.3 / 0.7 / 3, 1.0, 1.0))])
def test_analytic_roots(copula, d, gamma, expected):
    star = theta_star_analytic(lomax_model(copula, d, gamma), np.zeros(20))
    np.testing.assert_allclose(star.as_array(), expected, rtol=1e-14)


def test_no_analytic_root_for_clayton_or_unequal_scales():
    assert theta_star_analytic(lomax_model("survival_clayton", theta=1.0), np.zeros(20)) is None
    assert theta_star_analytic(lomax_model("comonotone", scales=(1.0, 2.0)), np.zeros(20)) is None


@pytest.mark.parametrize("copula", ["independence", "comonotone"])
@pytest.mark.parametrize("d", [2, 3])
def test_reference_matches_analytic(copula, d):
    model = lomax_model(copula, d)
    y = np.zeros(model.p)
    ref = theta_star_reference(model.xi_true(y))
    assert np.abs(ref.as_array() - theta_star_analytic(model, y).as_array()).sum() <= 1e-6
    assert loss(ref, model.xi_true(y)) <= 1e-12


def test_reference_for_clayton_is_a_root():
    xi = XiEstimate.closed_form(0.5, [1.0, 1.0], "survival_clayton", 1.0)
    ref = theta_star_reference(xi)
    assert loss(ref, xi) <= 1e-12
    # symmetric model: equal betas
    assert ref.betas[0] == pytest.approx(1.0, abs=1e-6)
