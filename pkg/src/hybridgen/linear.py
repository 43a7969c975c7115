"""Linear representation bases: scaled PCA, FastICA, and a pixel identity.

The PCA here is the uncentered correlation variant: C = sum_i x_i x_i^T
over the training rows, and the forward operator is F = Lambda^{1/2} E_d^T,
so coefficients carry the eigenvalue scale (project of a unit top
eigenvector has magnitude sqrt(lambda_1), not 1). Reconstruction goes
through the Moore-Penrose pseudo-inverse F+ = E_d Lambda_d^{-1/2}; F is
rectangular, so a literal matrix inverse does not exist. An optional
centered mode subtracts the column mean first; the default is uncentered.

FastICA is the symmetric (parallel) fixed-point variant over PCA-whitened,
centered data, with LogCosh or Cube contrasts. Non-convergence is reported
through the ``converged`` flag rather than an exception so the caller can
decide what to do with a partially converged basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coeffs import CoefficientMatrix
from .errors import DataError, DimensionError, DomainError, RankError, UsageError

EIGENVALUE_CLAMP = 1e-12

LOGCOSH = "logcosh"
CUBE = "cube"


def _as_data_matrix(data) -> np.ndarray:
    if isinstance(data, CoefficientMatrix):
        return data.values
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionError(f"expected an N x D matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("input matrix contains non-finite values")
    return x


def _sign_fix_columns(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _correlation_eig(x: np.ndarray, centered: bool):
    """Eigendecomposition of C = X^T X (optionally after centering).

    Returns (eigenvalues descending, eigenvectors as columns, mean),
    eigenvalues clamped to zero below EIGENVALUE_CLAMP * lambda_max.
    """
    mean = x.mean(axis=0) if centered else np.zeros(x.shape[1])
    xc = x - mean
    c = xc.T @ xc
    evals, evecs = np.linalg.eigh(c)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = _sign_fix_columns(evecs[:, order])
    if evals.size and evals[0] > 0:
        evals[evals < EIGENVALUE_CLAMP * evals[0]] = 0.0
    evals[evals < 0] = 0.0
    return evals, evecs, mean


@dataclass(eq=False)
class PcaBasis:
    """Eigenvalue-scaled PCA projection y = F x with F = Lambda^{1/2} E_d^T."""

    dim_full: int
    dim_reduced: int
    eigenvalues: np.ndarray
    forward: np.ndarray
    inverse: np.ndarray
    centered: bool = False
    mean: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.mean is None:
            self.mean = np.zeros(self.dim_full)
        if self.forward.shape != (self.dim_reduced, self.dim_full):
            raise DimensionError("forward operator shape mismatch")
        if self.inverse.shape != (self.dim_full, self.dim_reduced):
            raise DimensionError("inverse operator shape mismatch")

    @property
    def basis_id(self) -> str:
        return f"pca:{self.dim_full}->{self.dim_reduced}"

    def project(self, x, dataset_id: str = "") -> CoefficientMatrix:
        return pca_project(self, x, dataset_id=dataset_id)

    def reconstruct(self, y) -> np.ndarray:
        return pca_reconstruct(self, y)


def fit_pca(data, d: int, centered: bool = False) -> PcaBasis:
    """Fit the scaled-PCA basis from an N x D matrix.

    The d leading eigenpairs must all survive the rank clamp; asking for
    more directions than the data's effective rank cannot satisfy the
    F F+ = I_d contract and raises instead of degrading silently.
    """
    x = _as_data_matrix(data)
    n, dim_full = x.shape
    if n < 2:
        raise DataError(f"need at least 2 samples to fit a basis, got {n}")
    if not 1 <= d <= dim_full:
        raise DimensionError(f"target dimension {d} outside [1, {dim_full}]")
    evals, evecs, mean = _correlation_eig(x, centered)
    if evals[d - 1] <= 0.0:
        rank = int(np.count_nonzero(evals))
        raise RankError(f"effective rank {rank} < requested dimension {d}")
    scale = np.sqrt(evals[:d])
    e_d = evecs[:, :d]
    forward = scale[:, None] * e_d.T
    inverse = e_d / scale[None, :]
    return PcaBasis(
        dim_full=dim_full,
        dim_reduced=d,
        eigenvalues=evals,
        forward=forward,
        inverse=inverse,
        centered=centered,
        mean=mean,
    )


def pca_project(basis: PcaBasis, x, dataset_id: str = "") -> CoefficientMatrix:
    x = _as_data_matrix(x)
    if x.shape[1] != basis.dim_full:
        raise DimensionError(
            f"data has {x.shape[1]} columns, basis expects {basis.dim_full}"
        )
    y = (x - basis.mean) @ basis.forward.T
    return CoefficientMatrix(y, basis_id=basis.basis_id, dataset_id=dataset_id)


def pca_reconstruct(basis: PcaBasis, y) -> np.ndarray:
    yv = y.values if isinstance(y, CoefficientMatrix) else _as_data_matrix(y)
    if yv.shape[1] != basis.dim_reduced:
        raise DimensionError(
            f"coefficients have {yv.shape[1]} columns, basis expects {basis.dim_reduced}"
        )
    return yv @ basis.inverse.T + basis.mean


@dataclass(eq=False)
class IcaOptions:
    nonlinearity: str = LOGCOSH
    tolerance: float = 1e-4
    max_iterations: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.nonlinearity not in (LOGCOSH, CUBE):
            raise UsageError(f"unknown ICA nonlinearity {self.nonlinearity!r}")
        if not self.tolerance > 0:
            raise UsageError("ICA tolerance must be positive")
        if self.max_iterations < 1:
            raise UsageError("ICA max_iterations must be at least 1")


@dataclass(eq=False)
class IcaBasis:
    """FastICA basis: y = unmixing @ whitening @ (x - mean)."""

    dim_full: int
    dim_reduced: int
    whitening: np.ndarray
    unmixing: np.ndarray
    mixing: np.ndarray
    mean: np.ndarray
    iterations_used: int
    converged: bool

    @property
    def basis_id(self) -> str:
        return f"ica:{self.dim_full}->{self.dim_reduced}"

    def project(self, x, dataset_id: str = "") -> CoefficientMatrix:
        return ica_transform(self, x, dataset_id=dataset_id)

    def reconstruct(self, y) -> np.ndarray:
        return ica_inverse(self, y)


def _contrast(u: np.ndarray, nonlinearity: str):
    if nonlinearity == LOGCOSH:
        gu = np.tanh(u)
        return gu, 1.0 - gu * gu
    gu = u**3
    return gu, 3.0 * u * u


def _sym_decorrelate(w: np.ndarray) -> np.ndarray:
    # W <- (W W^T)^{-1/2} W, rows exactly orthonormal afterwards
    s, u = np.linalg.eigh(w @ w.T)
    if s[0] <= 0:
        raise RankError("degenerate unmixing iterate; data rank too low")
    return (u / np.sqrt(s)) @ u.T @ w


def fit_fastica(data, d: int, opts: IcaOptions | None = None) -> IcaBasis:
    """Symmetric fixed-point FastICA on PCA-whitened data.

    Whitening uses the population covariance (divide by N) of the centered
    data. Iterations run until the largest row-wise direction change
    max |1 - |<w_new, w_old>|| drops below tolerance; hitting the iteration
    cap is reported via converged=False, never raised.
    """
    if opts is None:
        opts = IcaOptions()
    x = _as_data_matrix(data)
    n, dim_full = x.shape
    if n <= d:
        raise DataError(f"need more samples than components ({n} <= {d})")
    if not 1 <= d <= dim_full:
        raise DimensionError(f"target dimension {d} outside [1, {dim_full}]")
    mean = x.mean(axis=0)
    xc = x - mean
    evals, evecs, _ = _correlation_eig(xc, centered=False)
    evals = evals / n  # population covariance scale
    if evals[d - 1] <= 0.0:
        rank = int(np.count_nonzero(evals))
        raise RankError(f"effective rank {rank} < requested dimension {d}")
    scale = np.sqrt(evals[:d])
    e_d = evecs[:, :d]
    whitening = e_d.T / scale[:, None]
    z = whitening @ xc.T  # d x N, identity covariance

    rng = np.random.default_rng(opts.seed)
    w = _sym_decorrelate(rng.standard_normal((d, d)))
    iterations = 0
    converged = False
    for iterations in range(1, opts.max_iterations + 1):
        wu = w @ z
        gu, gprime = _contrast(wu, opts.nonlinearity)
        w_new = (gu @ z.T) / n - gprime.mean(axis=1)[:, None] * w
        w_new = _sym_decorrelate(w_new)
        delta = np.max(np.abs(1.0 - np.abs(np.sum(w_new * w, axis=1))))
        w = w_new
        if delta < opts.tolerance:
            converged = True
            break
    w = _sign_fix_columns(w.T).T
    mixing = (e_d * scale[None, :]) @ w.T
    return IcaBasis(
        dim_full=dim_full,
        dim_reduced=d,
        whitening=whitening,
        unmixing=w,
        mixing=mixing,
        mean=mean,
        iterations_used=iterations,
        converged=converged,
    )


def ica_transform(basis: IcaBasis, x, dataset_id: str = "") -> CoefficientMatrix:
    x = _as_data_matrix(x)
    if x.shape[1] != basis.dim_full:
        raise DimensionError(
            f"data has {x.shape[1]} columns, basis expects {basis.dim_full}"
        )
    y = (x - basis.mean) @ (basis.unmixing @ basis.whitening).T
    return CoefficientMatrix(y, basis_id=basis.basis_id, dataset_id=dataset_id)


def ica_inverse(basis: IcaBasis, y) -> np.ndarray:
    yv = y.values if isinstance(y, CoefficientMatrix) else _as_data_matrix(y)
    if yv.shape[1] != basis.dim_reduced:
        raise DimensionError(
            f"coefficients have {yv.shape[1]} columns, basis expects {basis.dim_reduced}"
        )
    return yv @ basis.mixing.T + basis.mean


@dataclass(eq=False)
class IdentityBasis:
    """Pixel-space pass-through used for the baseline rows."""

    dim_full: int

    @property
    def dim_reduced(self) -> int:
        return self.dim_full

    @property
    def basis_id(self) -> str:
        return f"identity:{self.dim_full}"

    def project(self, x, dataset_id: str = "") -> CoefficientMatrix:
        x = _as_data_matrix(x)
        if x.shape[1] != self.dim_full:
            raise DimensionError(
                f"data has {x.shape[1]} columns, basis expects {self.dim_full}"
            )
        return CoefficientMatrix(x.copy(), basis_id=self.basis_id, dataset_id=dataset_id)

    def reconstruct(self, y) -> np.ndarray:
        yv = y.values if isinstance(y, CoefficientMatrix) else _as_data_matrix(y)
        if yv.shape[1] != self.dim_full:
            raise DimensionError(
                f"coefficients have {yv.shape[1]} columns, basis expects {self.dim_full}"
            )
        return yv.copy()


def fit_identity_basis(dim_full: int) -> IdentityBasis:
    if dim_full < 1:
        raise DimensionError("dimension must be at least 1")
    return IdentityBasis(dim_full=dim_full)
