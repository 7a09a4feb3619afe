from types import SimpleNamespace

import numpy as np
import pytest
from scipy import stats

from condshap.coalition import Coalition
from condshap.errors import ConditioningError, DataError, ParameterError
from condshap.mc_estimators import (
    EmpiricalFallbackWarning,
    EmpiricalSampler,
    GaussianSampler,
    IndependenceSampler,
    MonteCarloEstimator,
    estimate_v_mc,
    gaussian_condition,
)
from condshap.model import ConstantModel, LinearModel
from condshap.rng import substream
from condshap.simdata import Dataset, GaussianParams, make_ar_covariance, reference_setup
from oracles import gaussian_conditional_mean, linear_gaussian_v


def _bivariate(rho):
    return GaussianParams(np.zeros(2), make_ar_covariance(2, rho))


@pytest.mark.parametrize("a", [-1.3, 0.0, 2.0])
def test_bivariate_conditioning(a):
    rho = 0.5
    cg = gaussian_condition(_bivariate(rho), Coalition.from_features([1], 2), np.array([a, 99.0]))
    assert cg.cond_mean[0] == pytest.approx(rho * a, abs=1e-15)
    assert cg.cond_cov[0, 0] == pytest.approx(1 - rho**2, abs=1e-15)


def test_empty_coalition_is_unconditional(reference):
    params, _ = reference
    cg = gaussian_condition(params, Coalition(0, 8), np.ones(8))
    np.testing.assert_array_equal(cg.cond_mean, params.mean)
    np.testing.assert_allclose(cg.cond_cov, params.covariance, atol=0)


def test_conditional_mean_matches_explicit_inverse(reference, rng):
    params, _ = reference
    for _ in range(20):
        mask = int(rng.integers(1, 255))
        S = Coalition(mask, 8)
        x = rng.normal(size=8) * 1.5
        _, ref = gaussian_conditional_mean(params.mean, params.covariance, set(S.indices), x)
        np.testing.assert_allclose(gaussian_condition(params, S, x).cond_mean, ref, atol=1e-12)


def test_singular_observed_block_names_coalition():
    cov = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    fake = SimpleNamespace(mean=np.zeros(3), covariance=cov, M=3)
    with pytest.raises(ConditioningError) as info:
        gaussian_condition(fake, Coalition.from_features([1, 2], 3), np.zeros(3))
    assert info.value.mask == 0b011
    assert "{1,2}" in str(info.value)


def test_grand_coalition_rejected(reference):
    params, _ = reference
    with pytest.raises(ParameterError):
        gaussian_condition(params, Coalition.grand(8), np.zeros(8))


@pytest.mark.slow
def test_gaussian_sampler_matches_condition_within_3se(reference, rng):
    """Every mean and covariance entry within 3 SE, read family-wise.

    A two-sided 3-SE band has false-alarm rate 0.0027 per entry; across all
    entries of 20 coalitions that rate is split Bonferroni-style. The
    standardized deviations must also look standard normal (KS test).
    """
    params, _ = reference
    sampler = GaussianSampler(params)
    K = 100_000
    z_mean, z_cov = [], []
    for rep in range(20):
        S = Coalition(int(rng.integers(0, 255)), 8)
        x = rng.normal(size=8)
        cg = gaussian_condition(params, S, x)
        draws = sampler.sample(S, x, K, substream(99, rep))
        assert draws.shape == (K, 8 - S.size)
        z_mean += list((draws.mean(axis=0) - cg.cond_mean) / np.sqrt(np.diag(cg.cond_cov) / K))
        C = cg.cond_cov
        se_cov = np.sqrt((np.outer(np.diag(C), np.diag(C)) + C**2) / K)
        emp = np.cov(draws, rowvar=False).reshape(C.shape)
        z_cov += list(((emp - C) / se_cov)[np.triu_indices(C.shape[0])])
    z = np.abs(np.concatenate([z_mean, z_cov]))
    limit = stats.norm.isf(stats.norm.sf(3.0) / z.size)
    assert z.max() < limit
    assert stats.kstest(np.concatenate([z_mean, z_cov]), "norm").pvalue > 0.01


def test_gaussian_sampler_antithetic_pairs(reference):
    params, _ = reference
    s = GaussianSampler(params, antithetic=True)
    S = Coalition.from_features([2, 5], 8)
    x = np.linspace(-1, 1, 8)
    d = s.sample(S, x, 10, substream(1))
    mean = gaussian_condition(params, S, x).cond_mean
    np.testing.assert_allclose(d[:5] + d[5:], np.tile(2 * mean, (5, 1)), atol=1e-12)


def test_independence_single_row():
    row = np.array([[1.0, 2.0, 3.0]])
    s = IndependenceSampler(Dataset(row, np.zeros(1)))
    S = Coalition.from_features([2], 3)
    out = s.sample(S, np.zeros(3), 3, substream(0))
    np.testing.assert_array_equal(out, [[1.0, 3.0]] * 3)


def test_independence_ignores_x_star(reference_train):
    s = IndependenceSampler(reference_train)
    S = Coalition.from_features([1, 4], 8)
    a = s.sample(S, np.zeros(8), 50, substream(5))
    b = s.sample(S, np.full(8, 3.0), 50, substream(5))
    np.testing.assert_array_equal(a, b)


def test_independence_large_k_mean(reference_train):
    s = IndependenceSampler(reference_train)
    S = Coalition.from_features([2, 3, 7], 8)
    K = 200_000
    d = s.sample(S, np.zeros(8), K, substream(6))
    cols = reference_train.features[:, S.complement_indices]
    se = cols.std(axis=0) / np.sqrt(K)
    assert np.all(np.abs(d.mean(axis=0) - cols.mean(axis=0)) < 3 * se)


def test_empty_training_set_rejected():
    empty = Dataset(np.zeros((0, 3)), np.zeros(0))
    with pytest.raises(DataError):
        IndependenceSampler(empty)
    with pytest.raises(DataError):
        EmpiricalSampler(empty)


def test_empirical_concentrates_on_matching_row(reference_train):
    s = EmpiricalSampler(reference_train, bandwidth=1e-3)
    S = Coalition.from_features([1, 2, 3], 8)
    x = reference_train.features[17]
    d = s.sample(S, x, 100, substream(2))
    np.testing.assert_array_equal(d, np.tile(x[S.complement_indices], (100, 1)))


def test_empirical_empty_coalition_is_independence(reference_train):
    S = Coalition(0, 8)
    a = EmpiricalSampler(reference_train).sample(S, np.ones(8), 40, substream(3))
    b = IndependenceSampler(reference_train).sample(S, np.ones(8), 40, substream(3))
    np.testing.assert_array_equal(a, b)


@pytest.mark.slow
@pytest.mark.parametrize("x1", [-1.0, 0.0, 1.0])
def test_empirical_conditional_mean_bivariate(x1):
    params = _bivariate(0.5)
    z = substream(8).standard_normal((100_000, 2))
    X = z @ params.cholesky.T
    s = EmpiricalSampler(Dataset(X, np.zeros(len(X))))
    d = s.sample(Coalition.from_features([1], 2), np.array([x1, 0.0]), 20_000, substream(9))
    assert abs(d.mean() - 0.5 * x1) < 0.05


def test_empirical_fallback_flag(reference_train):
    s = EmpiricalSampler(reference_train, bandwidth=1e-4)
    S = Coalition.from_features([1, 2], 8)
    x = np.full(8, 40.0)
    _, fell_back = s.sample_with_diagnostics(S, x, 5, substream(1))
    assert fell_back
    with pytest.warns(EmpiricalFallbackWarning):
        d = s.sample(S, x, 5, substream(1))
    nearest = np.argmin(((reference_train.features[:, :2] - 40.0) ** 2).sum(axis=1))
    np.testing.assert_array_equal(d, np.tile(reference_train.features[nearest, 2:], (5, 1)))


def test_empirical_rejects_bad_bandwidth(reference_train):
    with pytest.raises(ParameterError):
        EmpiricalSampler(reference_train, bandwidth=0.0)


def _samplers(train, params):
    return [IndependenceSampler(train), EmpiricalSampler(train), GaussianSampler(params)]


def test_constant_model_every_sampler(reference_train, reference):
    params, _ = reference
    f = ConstantModel(1.75, 8)
    for s in _samplers(reference_train, params):
        for mask in (0, 5, 100, 254):
            v = estimate_v_mc(f, s, Coalition(mask, 8), np.ones(8), 7, substream(mask))
            assert v == pytest.approx(1.75, abs=1e-14)


def test_grand_coalition_is_exact_prediction(reference_train, reference):
    params, _ = reference
    f = LinearModel(np.arange(8.0))
    x = np.linspace(-2, 2, 8)
    for s in _samplers(reference_train, params):
        assert estimate_v_mc(f, s, Coalition.grand(8), x, 1, None) == f.predict(x)


def test_empty_coalition_independent_of_x_star(reference_train, reference):
    params, _ = reference
    f = LinearModel(np.ones(8))
    for s in _samplers(reference_train, params):
        a = estimate_v_mc(f, s, Coalition(0, 8), np.zeros(8), 50, substream(4))
        b = estimate_v_mc(f, s, Coalition(0, 8), np.full(8, 5.0), 50, substream(4))
        assert a == b


def test_linear_model_gaussian_sampler_against_oracle(reference, rng):
    params, _ = reference
    beta = np.array([1.0, -0.5, 0.3, 2.0, 0.0, -1.2, 0.7, 0.4])
    f = LinearModel(beta)
    s = GaussianSampler(params)
    K = 10_000
    for rep in range(10):
        S = Coalition(int(rng.integers(0, 255)), 8)
        x = rng.normal(size=8)
        truth = linear_gaussian_v(beta, params.mean, params.covariance, x, list(S.indices))
        est = estimate_v_mc(f, s, S, x, K, substream(50, rep))
        cg = gaussian_condition(params, S, x)
        b = beta[S.complement_indices]
        se = np.sqrt(b @ cg.cond_cov @ b / K)
        assert abs(est - truth) <= 4 * se + 1e-12


@pytest.mark.slow
def test_mc_standard_deviation_scales_as_inverse_sqrt_k(reference):
    params, coef = reference
    from condshap.model import analytic_model

    f = analytic_model(coef)
    s = GaussianSampler(params)
    S = Coalition.from_features([1, 3], 8)
    x = np.linspace(-1, 1, 8)

    def spread(K):
        return np.std([estimate_v_mc(f, s, S, x, K, substream(K, r)) for r in range(50)], ddof=1)

    ratio = spread(4000) / spread(1000)
    assert 0.4 <= ratio <= 0.65


def test_estimator_table_matches_scalar_path(reference_train, reference):
    params, coef = reference
    from condshap.model import analytic_model

    f = analytic_model(coef)
    est = MonteCarloEstimator(f, GaussianSampler.from_data(reference_train), K=64, seed=3,
                              train=reference_train)
    x = reference_train.features[0] * 0.5
    values, var, diag = est.contributions(x, obs_id=4)
    assert values[0] == est.v_empty
    assert values[-1] == f.predict(x)
    for mask in (1, 17, 128, 200, 254):
        assert values[mask] == pytest.approx(est.estimate_v(Coalition(mask, 8), x, 4), abs=1e-12)
    assert np.all(var[1:-1] > 0)
    assert diag == {"fallbacks": 0}


def test_estimator_empty_rule_validation(reference_train):
    with pytest.raises(ParameterError):
        MonteCarloEstimator(ConstantModel(1.0, 8), IndependenceSampler(reference_train), empty="x")
    with pytest.raises(ParameterError):
        MonteCarloEstimator(ConstantModel(1.0, 8), IndependenceSampler(reference_train))
    with pytest.raises(ParameterError):
        MonteCarloEstimator(ConstantModel(1.0, 8), IndependenceSampler(reference_train), K=0,
                            train=reference_train)
