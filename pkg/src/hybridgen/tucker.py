"""Tucker decomposition of the dataset tensor via single-pass HOSVD.

The order-3 data tensor (samples x height x width) is decomposed as
T = core x_1 U1 x_2 U2 x_3 U3 with each U_k holding the leading left
singular vectors of the mode-k unfolding. Only the spatial factors U2, U3
enter per-image coefficients: G_i = U2^T X_i U3. The sample-mode factor
mixes training images and has no meaning for generated samples, so it is
kept on the basis purely for completeness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coeffs import CoefficientMatrix
from .errors import DimensionError, DomainError, UsageError
from .ingest import DatasetTensor

_GRAM_CLAMP = 1e-12


def _mode_unfold(tensor: np.ndarray, mode: int) -> np.ndarray:
    return np.moveaxis(tensor, mode, 0).reshape(tensor.shape[mode], -1)


def _sign_fix_columns(vectors: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _leading_singular_vectors(unfolding: np.ndarray, r: int) -> np.ndarray:
    """Left singular vectors of an unfolding, wide case via the Gram matrix."""
    rows, cols = unfolding.shape
    if rows <= cols:
        gram = unfolding @ unfolding.T
        evals, evecs = np.linalg.eigh(gram)
        order = np.argsort(evals)[::-1]
        evals = evals[order]
        evecs = evecs[:, order]
        if evals[0] > 0:
            evals[evals < _GRAM_CLAMP * evals[0]] = 0.0
        u = evecs[:, :r]
    else:
        u, _, _ = np.linalg.svd(unfolding, full_matrices=False)
        u = u[:, :r]
    return _sign_fix_columns(u)


@dataclass(eq=False)
class TuckerBasis:
    """Spatial Tucker factors; projection needs only U2 and U3."""

    dims: tuple[int, int, int]
    ranks: tuple[int, int, int]
    factor_row: np.ndarray
    factor_col: np.ndarray
    mode1_used: bool = False
    factor_samples: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        d1, d2, d3 = self.dims
        r1, r2, r3 = self.ranks
        if self.factor_row.shape != (d2, r2) or self.factor_col.shape != (d3, r3):
            raise DimensionError("factor matrix shapes inconsistent with dims/ranks")

    @property
    def basis_id(self) -> str:
        d1, d2, d3 = self.dims
        r1, r2, r3 = self.ranks
        return f"tucker:{d2}x{d3}->{r2}x{r3}"

    def project(self, x, dataset_id: str = "") -> CoefficientMatrix:
        return tucker_project(self, x, dataset_id=dataset_id)

    def reconstruct(self, y) -> np.ndarray:
        return tucker_reconstruct(self, y)


def hosvd(tensor, ranks: tuple[int, int, int]):
    """HOSVD of an N x H x W tensor; returns (TuckerBasis, core).

    core = T x_1 U1^T x_2 U2^T x_3 U3^T with shape ranks. At full ranks the
    decomposition is exact and the core is all-orthogonal mode-wise.
    """
    if isinstance(tensor, DatasetTensor):
        tensor = tensor.values
    t = np.asarray(tensor, dtype=np.float64)
    if t.ndim != 3:
        raise DimensionError(f"expected an order-3 tensor, got shape {t.shape}")
    if not np.all(np.isfinite(t)):
        raise DomainError("tensor contains non-finite values")
    dims = t.shape
    ranks = tuple(int(r) for r in ranks)
    for k, (r, d) in enumerate(zip(ranks, dims), start=1):
        if not 1 <= r <= d:
            raise DimensionError(f"mode-{k} rank {r} outside [1, {d}]")
    factors = [
        _leading_singular_vectors(_mode_unfold(t, mode), ranks[mode])
        for mode in range(3)
    ]
    core = np.einsum("abc,ai,bj,ck->ijk", t, *factors, optimize=True)
    basis = TuckerBasis(
        dims=dims,
        ranks=ranks,
        factor_row=factors[1],
        factor_col=factors[2],
        mode1_used=True,
        factor_samples=factors[0],
    )
    return basis, core


def tucker_compose(basis: TuckerBasis, core: np.ndarray) -> np.ndarray:
    """T_hat = core x_1 U1 x_2 U2 x_3 U3 (requires the sample factor)."""
    if basis.factor_samples is None:
        raise UsageError("basis carries no sample-mode factor")
    return np.einsum(
        "ijk,ai,bj,ck->abc",
        core,
        basis.factor_samples,
        basis.factor_row,
        basis.factor_col,
        optimize=True,
    )


def tucker_project(basis: TuckerBasis, x, dataset_id: str = "") -> CoefficientMatrix:
    """G = U2^T X U3 per image, vectorized row-major to length r2*r3."""
    if isinstance(x, DatasetTensor):
        x = x.values
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 2
    if single:
        x = x[None]
    if x.ndim != 3 or x.shape[1:] != (basis.dims[1], basis.dims[2]):
        raise DimensionError(
            f"image shape {x.shape[1:] if x.ndim == 3 else x.shape} does not match "
            f"basis dims {basis.dims[1:]}"
        )
    g = np.matmul(np.matmul(basis.factor_row.T, x), basis.factor_col)
    values = g.reshape(x.shape[0], -1)
    return CoefficientMatrix(values, basis_id=basis.basis_id, dataset_id=dataset_id)


def tucker_reconstruct(basis: TuckerBasis, y) -> np.ndarray:
    """X_hat = U2 G U3^T; returns H x W for one row, N x H x W for many."""
    yv = y.values if isinstance(y, CoefficientMatrix) else np.asarray(y, dtype=np.float64)
    single = yv.ndim == 1
    if single:
        yv = yv[None]
    r2, r3 = basis.ranks[1], basis.ranks[2]
    if yv.ndim != 2 or yv.shape[1] != r2 * r3:
        raise DimensionError(
            f"coefficient length {yv.shape[-1]} != r2*r3 = {r2 * r3}"
        )
    g = yv.reshape(-1, r2, r3)
    x = np.matmul(np.matmul(basis.factor_row, g), basis.factor_col.T)
    return x[0] if single else x
