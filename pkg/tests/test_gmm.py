import numpy as np
import pytest

from hybridgen.coeffs import CoefficientMatrix
from hybridgen.errors import DomainError, NumericError, UsageError
from hybridgen.gmm import (
    DIAGONAL,
    FULL,
    GmmModel,
    default_reg,
    fit_em,
    gmm_logpdf,
    gmm_mean_nll,
    gmm_sample,
)

_HALF_LOG_2PI = 0.9189385332046727


def _three_blobs(seed, n=1500):
    rng = np.random.default_rng(seed)
    parts = [
        rng.standard_normal((n // 2, 2)) * 0.4 + np.array([0.0, 0.0]),
        rng.standard_normal((3 * n // 10, 2)) * 0.4 + np.array([5.0, 5.0]),
        rng.standard_normal((n - n // 2 - 3 * n // 10, 2)) * 0.4
        + np.array([-5.0, 5.0]),
    ]
    return np.vstack(parts)


def test_k1_equals_closed_form_mle():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((400, 3)) * np.array([2.0, 1.0, 0.5]) + 1.0
    reg = 0.0
    model = fit_em(x, k=1, covariance_type=FULL, reg=reg, seed=0)
    mean = x.mean(axis=0)
    cov = (x - mean).T @ (x - mean) / x.shape[0]
    assert np.allclose(model.weights, [1.0], atol=1e-12)
    assert np.allclose(model.means[0], mean, atol=1e-10)
    assert np.allclose(model.covariances[0], cov, atol=1e-10)


def test_em_mean_ll_monotone():
    x = _three_blobs(1)
    model = fit_em(x, k=3, covariance_type=FULL, seed=1)
    trace = np.asarray(model.fit_log)
    assert trace.size >= 2
    assert np.all(np.diff(trace) >= -1e-9)


def test_three_component_recovery():
    x = _three_blobs(2, n=3000)
    model = fit_em(x, k=3, covariance_type=FULL, seed=2)
    order = np.argsort(model.means[:, 0])
    means = model.means[order]
    weights = model.weights[order]
    expect_means = np.array([[-5.0, 5.0], [0.0, 0.0], [5.0, 5.0]])
    expect_weights = np.array([0.2, 0.5, 0.3])
    assert np.allclose(means, expect_means, atol=0.05)
    assert np.allclose(weights, expect_weights, atol=0.02)


def test_logpdf_standard_normal_peak():
    model = GmmModel(
        k=1,
        dim=2,
        weights=np.array([1.0]),
        means=np.zeros((1, 2)),
        covariances=np.eye(2)[None],
        covariance_type=FULL,
        reg=0.0,
    )
    val = gmm_logpdf(model, np.zeros(2))
    assert abs(val - (-2 * _HALF_LOG_2PI)) < 1e-14


def test_logpdf_far_mixture_frozen_value():
    # two unit-variance components at +-10, query at +10
    model = GmmModel(
        k=2,
        dim=1,
        weights=np.array([0.5, 0.5]),
        means=np.array([[-10.0], [10.0]]),
        covariances=np.ones((2, 1, 1)),
        covariance_type=FULL,
        reg=0.0,
    )
    val = gmm_logpdf(model, np.array([10.0]))
    assert abs(val - (-1.612085713764618)) < 1e-12


def test_logpdf_diagonal_matches_full():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((500, 3)) * np.array([1.0, 2.0, 0.5])
    diag = fit_em(x, k=1, covariance_type=DIAGONAL, reg=0.0, seed=0)
    full = fit_em(x, k=1, covariance_type=FULL, reg=0.0, seed=0)
    q = rng.standard_normal((20, 3))
    lp_d = gmm_logpdf(diag, q)
    # full covariance includes off-diagonal sample noise; compare against a
    # full model with those entries zeroed
    zeroed = full.covariances * np.eye(3)[None]
    ref = GmmModel(
        k=1,
        dim=3,
        weights=full.weights,
        means=full.means,
        covariances=zeroed,
        covariance_type=FULL,
        reg=0.0,
    )
    assert np.allclose(lp_d, gmm_logpdf(ref, q), atol=1e-10)


def test_mean_nll_is_negative_mean_logpdf():
    x = _three_blobs(4)
    model = fit_em(x, k=3, seed=3)
    nll = gmm_mean_nll(model, x)
    assert abs(nll - (-np.mean(gmm_logpdf(model, x)))) < 1e-12


def test_sampling_deterministic_and_calibrated():
    x = _three_blobs(5, n=3000)
    model = fit_em(x, k=3, covariance_type=FULL, seed=4)
    a = gmm_sample(model, 2000, seed=7)
    b = gmm_sample(model, 2000, seed=7)
    assert np.array_equal(a.values, b.values)
    assert a.values.shape == (2000, 2)
    assert a.basis_id == f"gmm:k=3:d=2"
    # samples reproduce the mixture mean
    mix_mean = model.weights @ model.means
    assert np.allclose(a.values.mean(axis=0), mix_mean, atol=0.15)


def test_sample_seed_changes_draws():
    x = _three_blobs(6)
    model = fit_em(x, k=2, seed=0)
    a = gmm_sample(model, 50, seed=0)
    b = gmm_sample(model, 50, seed=1)
    assert not np.array_equal(a.values, b.values)


def test_fit_accepts_coefficient_matrix():
    x = _three_blobs(7)
    m = CoefficientMatrix(x, basis_id="pca:4->2", dataset_id="blob")
    model = fit_em(m, k=2, seed=5)
    assert model.dim == 2
    s = gmm_sample(model, 10, seed=0)
    assert s.values.shape == (10, 2)


def test_fit_rejects_too_few_samples():
    x = np.zeros((3, 2))
    with pytest.raises(UsageError):
        fit_em(x, k=3, seed=0)


def test_fit_rejects_bad_k():
    x = _three_blobs(8)
    with pytest.raises(UsageError):
        fit_em(x, k=0)


def test_collapsed_covariance_names_component():
    # duplicated points with reg=0 force a singular covariance
    x = np.repeat(np.array([[0.0, 0.0], [10.0, 10.0]]), 20, axis=0)
    with pytest.raises(NumericError, match="component"):
        fit_em(x, k=2, covariance_type=FULL, reg=0.0, seed=0)


def test_default_reg_scales_with_variance():
    rng = np.random.default_rng(9)
    x = rng.standard_normal((100, 4))
    r1 = default_reg(x)
    r2 = default_reg(x * 10.0)
    assert r2 == pytest.approx(100.0 * r1, rel=1e-9)
    assert r1 > 0


def test_model_validates_simplex():
    with pytest.raises(DomainError):
        GmmModel(
            k=2,
            dim=1,
            weights=np.array([0.7, 0.7]),
            means=np.zeros((2, 1)),
            covariances=np.ones((2, 1, 1)),
            covariance_type=FULL,
            reg=0.0,
        )


def test_diagonal_fit_log_monotone_too():
    x = _three_blobs(10)
    model = fit_em(x, k=3, covariance_type=DIAGONAL, seed=6)
    trace = np.asarray(model.fit_log)
    assert np.all(np.diff(trace) >= -1e-9)
