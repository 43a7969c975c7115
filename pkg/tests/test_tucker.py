import numpy as np
import pytest

from hybridgen.coeffs import CoefficientMatrix
from hybridgen.errors import DimensionError, UsageError
from hybridgen.tucker import (
    TuckerBasis,
    hosvd,
    tucker_compose,
    tucker_project,
    tucker_reconstruct,
)


def _tensor(seed=0, shape=(12, 8, 7)):
    return np.random.default_rng(seed).standard_normal(shape)


def test_full_rank_exact():
    x = _tensor(0)
    basis, core = hosvd(x, ranks=x.shape)
    back = tucker_compose(basis, core)
    assert np.max(np.abs(back - x)) < 1e-10


def test_rank_one_tensor_exact():
    a = np.array([1.0, -2.0, 0.5])
    b = np.array([3.0, 1.0])
    c = np.array([0.25, 4.0, -1.0, 2.0])
    x = np.einsum("a,b,c->abc", a, b, c)
    basis, core = hosvd(x, ranks=(1, 1, 1))
    back = tucker_compose(basis, core)
    assert np.max(np.abs(back - x)) < 1e-12
    assert core.shape == (1, 1, 1)


def test_truncation_matches_unfolding_svd_energy():
    x = _tensor(1, shape=(20, 10, 10))
    ranks = (20, 4, 4)
    basis, core = hosvd(x, ranks=ranks)
    # factor columns equal leading singular vectors of each spatial unfolding
    for mode, factor in ((1, basis.factor_row), (2, basis.factor_col)):
        unfold = np.moveaxis(x, mode, 0).reshape(x.shape[mode], -1)
        u, s, _ = np.linalg.svd(unfold, full_matrices=False)
        r = factor.shape[1]
        # compare spanned subspaces (columns are sign-ambiguous)
        proj_a = factor @ factor.T
        proj_b = u[:, :r] @ u[:, :r].T
        assert np.max(np.abs(proj_a - proj_b)) < 1e-8


def test_core_shrinks_with_ranks():
    x = _tensor(2)
    _, core = hosvd(x, ranks=(12, 3, 2))
    assert core.shape == (12, 3, 2)


def test_project_reconstruct_roundtrip_full_rank():
    x = _tensor(3, shape=(15, 6, 6))
    basis, _ = hosvd(x, ranks=(15, 6, 6))
    coeffs = tucker_project(basis, x, dataset_id="t")
    assert isinstance(coeffs, CoefficientMatrix)
    assert coeffs.values.shape == (15, 36)
    back = tucker_reconstruct(basis, coeffs)
    assert back.shape == x.shape
    assert np.max(np.abs(back - x)) < 1e-10


def test_project_single_image():
    x = _tensor(4, shape=(10, 5, 4))
    basis, _ = hosvd(x, ranks=(10, 3, 2))
    one = tucker_project(basis, x[0])
    assert one.values.shape == (1, 6)
    # row-major layout of the small coefficient matrix
    g = basis.factor_row.T @ x[0] @ basis.factor_col
    assert np.allclose(one.values[0], g.ravel(), atol=1e-12)


def test_reconstruct_single_row_gives_image():
    x = _tensor(5, shape=(10, 5, 4))
    basis, _ = hosvd(x, ranks=(10, 3, 2))
    coeffs = tucker_project(basis, x[2])
    img = tucker_reconstruct(basis, coeffs.values[0])
    assert img.shape == (5, 4)


def test_basis_id_and_dims():
    x = _tensor(6, shape=(9, 8, 6))
    basis, _ = hosvd(x, ranks=(9, 4, 3))
    assert basis.basis_id == "tucker:8x6->4x3"
    assert basis.dims == (9, 8, 6)
    assert basis.ranks == (9, 4, 3)


def test_hosvd_deterministic():
    x = _tensor(7)
    a, ca = hosvd(x, ranks=(12, 4, 4))
    b, cb = hosvd(x, ranks=(12, 4, 4))
    assert np.array_equal(a.factor_row, b.factor_row)
    assert np.array_equal(a.factor_col, b.factor_col)
    assert np.array_equal(ca, cb)


def test_hosvd_rejects_bad_ranks():
    x = _tensor(8)
    with pytest.raises((UsageError, DimensionError)):
        hosvd(x, ranks=(12, 9, 4))  # 9 > 8
    with pytest.raises((UsageError, DimensionError)):
        hosvd(x, ranks=(12, 0, 4))


def test_project_rejects_wrong_dims():
    x = _tensor(9, shape=(8, 6, 6))
    basis, _ = hosvd(x, ranks=(8, 3, 3))
    with pytest.raises(DimensionError):
        tucker_project(basis, np.zeros((4, 5, 6)))


def test_compose_requires_sample_factor():
    x = _tensor(10, shape=(8, 6, 6))
    basis, core = hosvd(x, ranks=(8, 3, 3))
    stripped = TuckerBasis(
        dims=basis.dims,
        ranks=basis.ranks,
        factor_row=basis.factor_row,
        factor_col=basis.factor_col,
    )
    with pytest.raises(UsageError):
        tucker_compose(stripped, core)
