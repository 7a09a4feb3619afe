import numpy as np
import pytest
from hypothesis import given, strategies as st

from condshap.errors import NotSPDError, ParameterError, ShapeError
from condshap.simdata import (
    REFERENCE_BETA,
    Dataset,
    GaussianParams,
    ResponseCoefficients,
    interaction_g,
    make_ar_covariance,
    reference_setup,
    read_dataset_csv,
    response_mean,
    sample_dataset,
    write_dataset_csv,
)

# 17/5 - 3 cos(1) / 5, evaluated symbolically with sympy
RESPONSE_AT_X1_X2_ONE = 3.0758186164791161696


def test_ar_covariance_examples():
    np.testing.assert_allclose(make_ar_covariance(2, 0.5), [[1, 0.5], [0.5, 1]])
    np.testing.assert_array_equal(make_ar_covariance(3, 0.0), np.eye(3))
    assert make_ar_covariance(3, 0.5)[0, 2] == 0.25


@pytest.mark.parametrize("rho", [1.0, -1.0, 1.5])
def test_ar_covariance_rejects_bad_rho(rho):
    with pytest.raises(ParameterError):
        make_ar_covariance(3, rho)


def test_ar_covariance_is_valid_gaussian():
    GaussianParams(np.zeros(8), make_ar_covariance(8, 0.5))


def test_gaussian_params_validation():
    with pytest.raises(NotSPDError):
        GaussianParams(np.zeros(2), [[1.0, 0.2], [0.3, 1.0]])
    with pytest.raises(NotSPDError):
        GaussianParams(np.zeros(2), [[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(ShapeError):
        GaussianParams(np.zeros(3), np.eye(2))


@pytest.mark.parametrize("a,b,expected", [(0, 5, 0), (1, 1, 3), (2, -1, -4)])
def test_interaction_g_examples(a, b, expected):
    assert interaction_g(a, b) == expected


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_interaction_g_symmetric(a, b):
    assert interaction_g(a, b) == pytest.approx(interaction_g(b, a), rel=1e-12, abs=1e-9)


def test_response_mean_at_origin():
    coef = ResponseCoefficients.reference()
    assert response_mean(np.zeros(8), coef) == pytest.approx(0.4, abs=1e-14)
    assert sum(REFERENCE_BETA) == pytest.approx(0.4, abs=1e-14)


def test_response_mean_constant_when_only_intercept():
    coef = ResponseCoefficients([2.5] + [0.0] * 8, [0.0, 0.0])
    X = np.random.default_rng(0).normal(size=(20, 8))
    np.testing.assert_array_equal(response_mean(X, coef), 2.5)


def test_response_mean_interaction_point():
    x = np.zeros(8)
    x[:2] = 1.0
    assert response_mean(x, ResponseCoefficients.reference()) == pytest.approx(
        RESPONSE_AT_X1_X2_ONE, abs=1e-13)


def test_response_mean_shape_error():
    with pytest.raises(ShapeError):
        response_mean(np.zeros(7), ResponseCoefficients.reference())


def test_coefficient_validation():
    with pytest.raises(ShapeError):
        ResponseCoefficients(REFERENCE_BETA, [0.8])
    with pytest.raises(ParameterError):
        ResponseCoefficients(REFERENCE_BETA, [0.8, -1.0], noise_sd=0.0)
    with pytest.raises(ParameterError):
        ResponseCoefficients(REFERENCE_BETA, [0.8, -1.0], pairs=[(1, 2), (3, 9)])


def test_sample_dataset_deterministic():
    params, coef = reference_setup()
    a = sample_dataset(params, coef, 50, 7)
    b = sample_dataset(params, coef, 50, 7)
    assert np.array_equal(a.features, b.features) and np.array_equal(a.response, b.response)
    c = sample_dataset(params, coef, 50, 8)
    assert not np.array_equal(a.features, c.features)
    t = sample_dataset(params, coef, 50, 7, role="test")
    assert not np.array_equal(a.features, t.features)


def test_sample_dataset_large_sample_moments():
    params, coef = reference_setup()
    d = sample_dataset(params, coef, 100_000, 3)
    np.testing.assert_allclose(d.features.mean(axis=0), 0.0, atol=0.02)
    corr = np.corrcoef(d.features[:, 0], d.features[:, 1])[0, 1]
    assert abs(corr - 0.5) < 0.02
    np.testing.assert_allclose(np.cov(d.features, rowvar=False), params.covariance, atol=0.03)


def test_noise_enters_only_through_sampling():
    params, coef = reference_setup(noise_sd=0.5)
    d = sample_dataset(params, coef, 20_000, 4)
    resid = d.response - response_mean(d.features, coef)
    assert abs(resid.std() - 0.5) < 0.01
    assert np.array_equal(response_mean(d.features, coef), response_mean(d.features, coef))


def test_sample_dataset_rejects_empty():
    params, coef = reference_setup()
    with pytest.raises(ParameterError):
        sample_dataset(params, coef, 0, 1)


def test_dataset_shape_check():
    with pytest.raises(ShapeError):
        Dataset(np.zeros((3, 2)), np.zeros(4))


def test_csv_round_trip(tmp_path):
    params, coef = reference_setup()
    d = sample_dataset(params, coef, 25, 9)
    path = tmp_path / "d.csv"
    write_dataset_csv(d, path)
    assert path.read_text().splitlines()[0] == "x1,x2,x3,x4,x5,x6,x7,x8,y"
    back = read_dataset_csv(path)
    assert np.array_equal(back.features, d.features)
    assert np.array_equal(back.response, d.response)
