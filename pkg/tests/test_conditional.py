import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import equal_weights, make_sample
from fmee import (CondEcdf, WeightVector, cond_marginal_ecdf, cond_quantile,
                  pseudo_obs)
from fmee.errors import DimensionError, DomainError


def _sample(values):
    values = np.asarray(values, dtype=float)
    return make_sample(np.column_stack([values, values]))


@pytest.mark.parametrize("x, expected", [(2.5, 0.5), (0.0, 0.0), (4.0, 1.0), (10.0, 1.0)])
def test_ecdf_equal_weights(x, expected):
    s = _sample([1, 2, 3, 4])
    assert cond_marginal_ecdf(s, equal_weights(4), 0, x) == expected


def test_ecdf_unequal_weights():
    s = _sample([1, 2, 3])
    assert cond_marginal_ecdf(s, WeightVector(np.array([0.5, 0.25, 0.25])), 0, 1.0) == 0.5


@pytest.mark.parametrize("alpha, expected", [(0.5, 2.0), (1.0, 4.0), (0.25, 1.0), (0.26, 2.0)])
def test_quantile_equal_weights(alpha, expected):
    s = _sample([4, 1, 3, 2])
    assert cond_quantile(s, equal_weights(4), 0, alpha) == expected


def test_quantile_unequal_weights():
    s = _sample([1, 2, 3])
    assert cond_quantile(s, WeightVector(np.array([0.5, 0.25, 0.25])), 0, 0.5) == 1.0


def test_quantile_level_outside_unit_interval():
    with pytest.raises(DomainError):
        cond_quantile(_sample([1, 2]), equal_weights(2), 0, 1.5)


def test_margin_out_of_range():
    with pytest.raises(DimensionError):
        cond_quantile(_sample([1, 2]), equal_weights(2), 2, 0.5)


def test_pseudo_obs_ranks():
    s = make_sample(np.array([[3.0, 1.0], [1.0, 2.0], [2.0, 3.0]]))
    np.testing.assert_allclose(pseudo_obs(s, equal_weights(3))[:, 0], [1, 1 / 3, 2 / 3])


def test_pseudo_obs_single_atom():
    s = make_sample(np.array([[5.0, -2.0]]))
    np.testing.assert_array_equal(pseudo_obs(s, equal_weights(1)), [[1.0, 1.0]])


def test_pseudo_obs_ties_share_cumulative_weight():
    s = make_sample(np.array([[1.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))
    p = pseudo_obs(s, equal_weights(3))
    assert p[0, 0] == p[1, 0] == pytest.approx(2 / 3)


def test_tied_atoms_are_merged():
    e = CondEcdf([2.0, 1.0, 2.0], [0.2, 0.3, 0.5])
    np.testing.assert_array_equal(e.values, [1.0, 2.0])
    np.testing.assert_allclose(e.cumulative, [0.3, 1.0])


weighted_samples = st.integers(2, 40).flatmap(lambda n: st.tuples(
    st.lists(st.integers(-20, 20).map(float), min_size=n, max_size=n),
    st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n).filter(lambda w: sum(w) > 1e-3)))


@given(weighted_samples, st.floats(0.0, 1.0))
def test_generalized_inverse_duality(data, alpha):
    values, raw = data
    w = np.asarray(raw) / np.sum(raw)
    s = _sample(values)
    wv = WeightVector(w)
    q = cond_quantile(s, wv, 0, alpha)
    assert cond_marginal_ecdf(s, wv, 0, q) >= alpha - 1e-12
    for x in np.asarray(values)[w > 0]:
        assert cond_quantile(s, wv, 0, cond_marginal_ecdf(s, wv, 0, x)) <= x


@given(weighted_samples, st.floats(0, 1), st.floats(0, 1))
def test_quantile_nondecreasing(data, a, b):
    values, raw = data
    wv = WeightVector(np.asarray(raw) / np.sum(raw))
    s = _sample(values)
    lo, hi = sorted((a, b))
    assert cond_quantile(s, wv, 0, lo) <= cond_quantile(s, wv, 0, hi)


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=30), st.floats(-150, 150))
def test_equal_weights_match_classical_ecdf(values, x):
    s = _sample(values)
    expected = np.mean(np.asarray(values) <= x)
    assert cond_marginal_ecdf(s, equal_weights(len(values)), 0, x) == pytest.approx(expected, abs=1e-12)
