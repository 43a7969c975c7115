import numpy as np
import pytest

from hybridgen.benchmark import build_reference
from hybridgen.errors import FormatError
from hybridgen.gmm import DIAGONAL, FULL, fit_em
from hybridgen.ingest import RAW, DatasetTensor, zscore_per_image
from hybridgen.linear import IcaOptions, fit_fastica, fit_identity_basis, fit_pca
from hybridgen.store import (
    load_basis,
    load_dataset,
    load_gmm,
    load_reference,
    read_manifest,
    read_manifest_at,
    save_basis,
    save_dataset,
    save_gmm,
    save_reference,
    write_manifest_at,
)
from hybridgen.tucker import hosvd


def _dataset(seed=0, n=30, h=12, w=10):
    rng = np.random.default_rng(seed)
    return DatasetTensor(rng.uniform(0.5, 2.0, size=(n, h, w)), RAW)


def test_manifest_roundtrip(tmp_path):
    path = tmp_path / "manifest.txt"
    entries = {
        "artifact": "thing",
        "cfg.alpha": 1.5,
        "cfg.flag": True,
        "cfg.name": "basis a",
        "run.argv": "x --y z",
    }
    write_manifest_at(path, entries)
    back = read_manifest_at(path)
    assert back["artifact"] == "thing"
    assert back["cfg.alpha"] == "1.5"
    assert back["cfg.flag"] == "true"
    assert back["cfg.name"] == "basis a"


def test_dataset_roundtrip_exact(tmp_path):
    data = zscore_per_image(_dataset(1))
    out = tmp_path / "ds"
    save_dataset(out, data, extra={"cfg.dataset_id": "roundtrip"})
    back = load_dataset(out)
    assert np.array_equal(back.values, data.values)
    assert back.value_domain == data.value_domain
    assert np.array_equal(back.per_image_stats, data.per_image_stats)
    manifest = read_manifest(out)
    assert manifest["cfg.dataset_id"] == "roundtrip"
    assert manifest["cfg.n"] == "30"


def test_dataset_without_stats(tmp_path):
    data = _dataset(2)
    out = tmp_path / "ds"
    save_dataset(out, data)
    back = load_dataset(out)
    assert back.per_image_stats is None


def test_pca_basis_roundtrip(tmp_path):
    data = _dataset(3)
    basis = fit_pca(data.flat(), d=5, centered=True)
    out = tmp_path / "pca"
    save_basis(out, basis)
    back = load_basis(out)
    assert type(back).__name__ == "PcaBasis"
    assert np.array_equal(back.forward, basis.forward)
    assert np.array_equal(back.inverse, basis.inverse)
    assert np.array_equal(back.eigenvalues, basis.eigenvalues)
    assert np.array_equal(back.mean, basis.mean)
    assert back.centered == basis.centered
    assert back.basis_id == basis.basis_id


def test_ica_basis_roundtrip(tmp_path):
    data = _dataset(4, n=200)
    basis = fit_fastica(data.flat(), d=4, opts=IcaOptions(seed=0, max_iterations=50))
    out = tmp_path / "ica"
    save_basis(out, basis)
    back = load_basis(out)
    assert np.array_equal(back.whitening, basis.whitening)
    assert np.array_equal(back.unmixing, basis.unmixing)
    assert np.array_equal(back.mixing, basis.mixing)
    assert np.array_equal(back.mean, basis.mean)
    assert back.converged == basis.converged
    assert back.iterations_used == basis.iterations_used


def test_tucker_basis_roundtrip_drops_sample_factor(tmp_path):
    data = _dataset(5)
    basis, _ = hosvd(data.values, ranks=(data.n, 4, 3))
    out = tmp_path / "tucker"
    save_basis(out, basis)
    back = load_basis(out)
    assert np.array_equal(back.factor_row, basis.factor_row)
    assert np.array_equal(back.factor_col, basis.factor_col)
    assert back.dims == basis.dims
    assert back.ranks == basis.ranks
    assert back.factor_samples is None
    assert not back.mode1_used


def test_identity_basis_roundtrip(tmp_path):
    basis = fit_identity_basis(100)
    out = tmp_path / "ident"
    save_basis(out, basis)
    back = load_basis(out)
    assert back.basis_id == "identity:100"


def test_gmm_roundtrip_full(tmp_path):
    rng = np.random.default_rng(6)
    x = rng.standard_normal((200, 3))
    model = fit_em(x, k=2, covariance_type=FULL, seed=0)
    out = tmp_path / "gmm"
    save_gmm(out, model)
    back = load_gmm(out)
    assert back.k == 2 and back.dim == 3
    assert np.array_equal(back.weights, model.weights)
    assert np.array_equal(back.means, model.means)
    assert np.array_equal(back.covariances, model.covariances)
    assert back.covariance_type == FULL
    assert back.reg == model.reg
    assert np.allclose(back.fit_log, model.fit_log)


def test_gmm_roundtrip_diagonal(tmp_path):
    rng = np.random.default_rng(7)
    x = rng.standard_normal((150, 4))
    model = fit_em(x, k=3, covariance_type=DIAGONAL, seed=1)
    out = tmp_path / "gmm"
    save_gmm(out, model)
    back = load_gmm(out)
    assert back.covariance_type == DIAGONAL
    assert np.array_equal(back.covariances, model.covariances)
    q = rng.standard_normal((5, 4))
    from hybridgen.gmm import gmm_logpdf

    assert np.array_equal(gmm_logpdf(back, q), gmm_logpdf(model, q))


def test_reference_roundtrip(tmp_path):
    data = _dataset(8, n=40, h=16, w=16)
    ref = build_reference(data, k=2, seed=0, dataset_id="refds")
    out = tmp_path / "ref"
    save_reference(out, ref)
    back = load_reference(out)
    assert back.feature_spec.height == 16
    assert back.feature_spec.width == 16
    assert back.dataset_id == "refds"
    assert np.array_equal(back.gmm.means, ref.gmm.means)
    manifest = read_manifest(out)
    assert manifest["artifact"] == "reference"


def test_load_wrong_artifact_kind(tmp_path):
    data = _dataset(9)
    out = tmp_path / "ds"
    save_dataset(out, data)
    with pytest.raises(FormatError):
        load_basis(out)


def test_load_missing_manifest(tmp_path):
    with pytest.raises(FormatError):
        load_dataset(tmp_path / "nothing")
