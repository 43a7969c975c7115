import numpy as np
import pytest
from scipy import signal

from hybridgen.coeffs import CoefficientMatrix
from hybridgen.errors import DimensionError, RankError, UsageError
from hybridgen.linear import (
    CUBE,
    LOGCOSH,
    IcaOptions,
    IdentityBasis,
    PcaBasis,
    fit_fastica,
    fit_identity_basis,
    fit_pca,
    ica_inverse,
    ica_transform,
    pca_project,
    pca_reconstruct,
)


def _blobs(seed=0, n=300, d=6):
    rng = np.random.default_rng(seed)
    scale = np.linspace(3.0, 0.3, d)
    return rng.standard_normal((n, d)) * scale


# ---------------------------------------------------------------- PCA


def test_pca_matches_closed_form_2x2():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((100, 2)) @ np.array([[2.0, 0.3], [0.3, 0.5]])
    basis = fit_pca(x, d=2)
    evals, evecs = np.linalg.eigh(x.T @ x)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    assert np.allclose(basis.eigenvalues, evals, rtol=1e-12)
    # eigenvectors match up to sign; compare spanned directions
    for k in range(2):
        dot = abs(float(evecs[:, k] @ basis.inverse[:, k]) * np.sqrt(evals[k]))
        assert abs(dot - 1.0) < 1e-10


def test_pca_forward_shape_and_ids():
    x = _blobs()
    basis = fit_pca(x, d=3)
    assert basis.forward.shape == (3, 6)
    assert basis.inverse.shape == (6, 3)
    assert basis.basis_id == "pca:6->3"
    coeffs = basis.project(x, dataset_id="toy")
    assert isinstance(coeffs, CoefficientMatrix)
    assert coeffs.values.shape == (300, 3)
    assert coeffs.basis_id == "pca:6->3"
    assert coeffs.dataset_id == "toy"


def test_pca_full_rank_reconstruction():
    x = _blobs(2)
    basis = fit_pca(x, d=6)
    back = basis.reconstruct(basis.project(x))
    rel = np.linalg.norm(back - x) / np.linalg.norm(x)
    assert rel < 1e-10


def test_pca_forward_inverse_identity():
    basis = fit_pca(_blobs(3), d=4)
    assert np.allclose(basis.forward @ basis.inverse, np.eye(4), atol=1e-10)


def test_pca_error_monotone_in_d():
    x = _blobs(4)
    errs = []
    for d in range(1, 7):
        basis = fit_pca(x, d=d)
        back = basis.reconstruct(basis.project(x))
        errs.append(np.linalg.norm(back - x))
    diffs = np.diff(errs)
    assert np.all(diffs <= 1e-9)


def test_pca_centered_mode_restores_mean():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((200, 4)) + np.array([10.0, -3.0, 0.5, 7.0])
    basis = fit_pca(x, d=4, centered=True)
    assert basis.centered
    assert np.allclose(basis.mean, x.mean(axis=0), atol=1e-12)
    back = basis.reconstruct(basis.project(x))
    assert np.allclose(back, x, atol=1e-8)


def test_pca_uncentered_is_default():
    basis = fit_pca(_blobs(6), d=2)
    assert not basis.centered
    assert np.allclose(basis.mean, 0.0)


def test_pca_deterministic_sign():
    x = _blobs(7)
    a = fit_pca(x, d=3)
    b = fit_pca(x, d=3)
    assert np.array_equal(a.forward, b.forward)
    # largest-magnitude entry of each principal direction is positive
    cols = a.inverse * np.sqrt(a.eigenvalues[:3])
    for k in range(3):
        col = cols[:, k]
        assert col[np.argmax(np.abs(col))] > 0


def test_pca_rank_deficient_raises():
    rng = np.random.default_rng(8)
    x = np.tile(rng.standard_normal((100, 1)), (1, 5))  # rank 1
    with pytest.raises(RankError):
        fit_pca(x, d=3)


def test_pca_d_out_of_range():
    x = _blobs(9)
    with pytest.raises(DimensionError):
        fit_pca(x, d=0)
    with pytest.raises(DimensionError):
        fit_pca(x, d=7)


def test_pca_accepts_coefficient_matrix_input():
    x = _blobs(10)
    m = CoefficientMatrix(x, basis_id="identity:6", dataset_id="z")
    basis = fit_pca(m, d=2)
    out = pca_project(basis, m)
    assert out.values.shape == (300, 2)
    back = pca_reconstruct(basis, out)
    assert back.shape == (300, 6)


# ---------------------------------------------------------------- ICA


def _classic_sources(seed):
    t = np.linspace(0, 8, 2000)
    rng = np.random.default_rng(100 + seed)
    s = np.column_stack(
        [
            np.sin(2 * t),
            np.sign(np.sin(3 * t)),
            signal.sawtooth(2 * np.pi * t),
            rng.uniform(-1.0, 1.0, t.size),
        ]
    )
    mixing = np.random.default_rng(seed).standard_normal((4, 4))
    return s, s @ mixing.T


def _best_abs_corr(recovered, sources):
    # per true source, best |corr| over recovered components
    out = []
    for j in range(sources.shape[1]):
        cs = [
            abs(np.corrcoef(sources[:, j], recovered[:, i])[0, 1])
            for i in range(recovered.shape[1])
        ]
        out.append(max(cs))
    return min(out)


def test_ica_recovers_classic_sources():
    s, x = _classic_sources(0)
    basis = fit_fastica(x, d=4, opts=IcaOptions(seed=0))
    assert basis.converged
    rec = basis.project(x).values
    assert _best_abs_corr(rec, s) > 0.95


def test_ica_cube_contrast_also_works():
    s, x = _classic_sources(1)
    basis = fit_fastica(x, d=4, opts=IcaOptions(nonlinearity=CUBE, seed=1))
    rec = basis.project(x).values
    assert _best_abs_corr(rec, s) > 0.95


def test_ica_output_is_whitened():
    _, x = _classic_sources(2)
    basis = fit_fastica(x, d=4, opts=IcaOptions(seed=2))
    rec = basis.project(x).values
    cov = rec.T @ rec / rec.shape[0]
    assert np.allclose(cov, np.eye(4), atol=1e-8)


def test_ica_roundtrip_through_mixing():
    rng = np.random.default_rng(11)
    x = rng.standard_normal((500, 5)) @ rng.standard_normal((5, 5))
    basis = fit_fastica(x, d=5, opts=IcaOptions(seed=3))
    rec = ica_transform(basis, x)
    back = ica_inverse(basis, rec)
    assert np.allclose(back, x - x.mean(axis=0) + basis.mean, atol=1e-8)


def test_ica_reports_iterations_and_convergence():
    _, x = _classic_sources(3)
    basis = fit_fastica(x, d=4, opts=IcaOptions(seed=4))
    assert basis.converged
    assert 1 <= basis.iterations_used <= 200
    starved = fit_fastica(x, d=4, opts=IcaOptions(seed=4, max_iterations=1))
    assert not starved.converged
    assert starved.iterations_used == 1


def test_ica_deterministic_given_seed():
    _, x = _classic_sources(4)
    a = fit_fastica(x, d=4, opts=IcaOptions(seed=5))
    b = fit_fastica(x, d=4, opts=IcaOptions(seed=5))
    assert np.array_equal(a.unmixing, b.unmixing)
    assert np.array_equal(a.mixing, b.mixing)


def test_ica_basis_id_and_shapes():
    _, x = _classic_sources(5)
    basis = fit_fastica(x, d=3, opts=IcaOptions(seed=6))
    assert basis.basis_id == "ica:4->3"
    assert basis.whitening.shape == (3, 4)
    assert basis.unmixing.shape == (3, 3)
    assert basis.mixing.shape == (4, 3)


def test_ica_rejects_bad_options():
    _, x = _classic_sources(6)
    with pytest.raises(DimensionError):
        fit_fastica(x, d=0)
    with pytest.raises(DimensionError):
        fit_fastica(x, d=5)
    with pytest.raises(UsageError):
        IcaOptions(nonlinearity="quartic")


# ---------------------------------------------------------------- identity


def test_identity_basis_is_noop():
    basis = fit_identity_basis(12)
    assert isinstance(basis, IdentityBasis)
    assert basis.basis_id == "identity:12"
    rng = np.random.default_rng(13)
    x = rng.standard_normal((4, 12))
    coeffs = basis.project(x, dataset_id="px")
    assert np.array_equal(coeffs.values, x)
    assert np.array_equal(basis.reconstruct(coeffs), x)


def test_identity_basis_rejects_wrong_width():
    basis = fit_identity_basis(4)
    with pytest.raises(DimensionError):
        basis.project(np.zeros((2, 5)))
