"""Gaussian kernel density estimation with an isotropic scalar bandwidth.

Evaluation is done in log space (log-sum-exp over support points), chunked
over query rows so memory stays bounded at desk scale. The KDE entropy
metric is the mean negative log-density of query rows; when the queries
are the support itself, leave-one-out exclusion removes the h-dependent
self-peak each sample has at its own location.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .coeffs import CoefficientMatrix
from .errors import DataError, DegenerateDataError, DimensionError, UsageError

SCOTT = "scott"
SILVERMAN = "silverman"
FIXED = "fixed"

_CHUNK = 256


@dataclass(eq=False)
class KdeModel:
    support: np.ndarray
    bandwidth: float
    bandwidth_rule: str

    @property
    def n(self) -> int:
        return self.support.shape[0]

    @property
    def dim(self) -> int:
        return self.support.shape[1]


def _as_matrix(x, dim: int | None = None) -> np.ndarray:
    if isinstance(x, CoefficientMatrix):
        x = x.values
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None] if dim == 1 else x[None]
    if x.ndim != 2:
        raise DimensionError(f"expected vector or matrix, got shape {x.shape}")
    if dim is not None and x.shape[1] != dim:
        raise DimensionError(f"dimension {x.shape[1]} does not match support dim {dim}")
    return x


def fit_kde(x, rule: str = SCOTT, bandwidth: float | None = None) -> KdeModel:
    """Retain the samples and pick h by Scott, Silverman, or a fixed value.

    Both rules-of-thumb scale sigma-hat, the mean per-dimension sample
    standard deviation: Scott h = sigma*N^(-1/(d+4)), Silverman
    h = sigma*(4/((d+2)N))^(1/(d+4)).
    """
    xm = _as_matrix(x)
    n, d = xm.shape
    if n < 2:
        raise DataError(f"need at least 2 support samples, got {n}")
    if rule == FIXED:
        if bandwidth is None or not bandwidth > 0:
            raise UsageError("fixed rule requires a positive bandwidth")
        h = float(bandwidth)
    elif rule in (SCOTT, SILVERMAN):
        if bandwidth is not None:
            raise UsageError(f"bandwidth only applies to the {FIXED!r} rule")
        sigma = float(np.mean(np.std(xm, axis=0, ddof=1)))
        if sigma <= 0:
            raise DegenerateDataError("zero-variance data; use a fixed bandwidth")
        if rule == SCOTT:
            h = sigma * n ** (-1.0 / (d + 4))
        else:
            h = sigma * (4.0 / ((d + 2) * n)) ** (1.0 / (d + 4))
    else:
        raise UsageError(f"unknown bandwidth rule {rule!r}")
    return KdeModel(support=xm.copy(), bandwidth=h, bandwidth_rule=rule)


def _log_kernel_sums(model: KdeModel, q: np.ndarray, exclude_self: bool) -> np.ndarray:
    """logsumexp_i of -|q - s_i|^2 / (2 h^2) per query row, chunked."""
    s = model.support
    inv2h2 = 1.0 / (2.0 * model.bandwidth**2)
    s_sq = np.sum(s * s, axis=1)
    out = np.empty(q.shape[0])
    for lo in range(0, q.shape[0], _CHUNK):
        hi = min(lo + _CHUNK, q.shape[0])
        block = q[lo:hi]
        d2 = np.sum(block * block, axis=1)[:, None] - 2.0 * block @ s.T + s_sq
        np.maximum(d2, 0.0, out=d2)
        expo = -d2 * inv2h2
        if exclude_self:
            idx = np.arange(lo, hi)
            expo[np.arange(hi - lo), idx] = -np.inf
        out[lo:hi] = logsumexp(expo, axis=1)
    return out


def kde_logpdf(model: KdeModel, x):
    """Log density; scalar for a single point, array for a matrix of rows.

    For d = 1 a plain 1-d array is read as many scalar query points.
    """
    arr = np.asarray(x.values if isinstance(x, CoefficientMatrix) else x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    single = arr.ndim == 1 and (model.dim > 1 or arr.size == 1)
    q = _as_matrix(arr, model.dim)
    const = np.log(model.n) + 0.5 * model.dim * np.log(
        2.0 * np.pi * model.bandwidth**2
    )
    lp = _log_kernel_sums(model, q, exclude_self=False) - const
    return float(lp[0]) if single else lp


def kde_mean_nll(model: KdeModel, x, exclude_self: bool = False) -> float:
    """Mean negative log-density over query rows (the KDE-E metric).

    With exclude_self=True the queries must be the support set itself, in
    the same row order; each row is then scored against the other N-1.
    """
    q = _as_matrix(x, model.dim)
    if exclude_self:
        if q.shape != model.support.shape or not np.array_equal(q, model.support):
            raise UsageError("exclude_self requires evaluating the support itself")
        if model.n < 2:
            raise DataError("leave-one-out needs at least 2 support samples")
        const = np.log(model.n - 1.0) + 0.5 * model.dim * np.log(
            2.0 * np.pi * model.bandwidth**2
        )
    else:
        const = np.log(model.n) + 0.5 * model.dim * np.log(
            2.0 * np.pi * model.bandwidth**2
        )
    lp = _log_kernel_sums(model, q, exclude_self=exclude_self) - const
    return -float(lp.mean())
