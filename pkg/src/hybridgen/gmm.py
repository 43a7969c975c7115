"""Gaussian mixture models fit by EM, in log-space throughout.

Serves two roles: the coefficient-space generator (sampled to produce new
images through a basis inverse) and the reference density of the wavelet
entropy benchmark. Initialization is k-means++ on the centers only; the
initial covariances all equal the global data covariance plus the ridge.
The per-iteration mean log-likelihood trace is kept on the model so the
EM monotonicity contract can be checked after the fact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.special import logsumexp

from .coeffs import CoefficientMatrix
from .errors import DimensionError, DomainError, NumericError, UsageError

FULL = "full"
DIAGONAL = "diagonal"

DEFAULT_TOL = 1e-5
DEFAULT_MAX_ITER = 500
_WEIGHT_FLOOR = 10 * np.finfo(np.float64).tiny


@dataclass(eq=False)
class GmmModel:
    k: int
    dim: int
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray  # (k, d, d) full or (k, d) diagonal
    covariance_type: str
    reg: float
    fit_log: list = field(default_factory=list)

    def __post_init__(self):
        if self.covariance_type not in (FULL, DIAGONAL):
            raise UsageError(f"unknown covariance type {self.covariance_type!r}")
        if abs(self.weights.sum() - 1.0) > 1e-12 or np.any(self.weights < 0):
            raise DomainError("mixture weights must form a probability vector")
        self._chols = _component_factors(self)


def _component_factors(model: GmmModel):
    """Cholesky factors (full) or std vectors (diagonal), post-ridge."""
    if model.covariance_type == DIAGONAL:
        var = model.covariances
        if np.any(var <= 0) or not np.all(np.isfinite(var)):
            j = int(np.argwhere(~((var > 0) & np.isfinite(var)))[0][0])
            raise NumericError(f"component {j} covariance collapsed")
        return np.sqrt(var)
    factors = []
    for j in range(model.k):
        try:
            factors.append(cholesky(model.covariances[j], lower=True))
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"component {j} covariance collapsed") from exc
    return np.array(factors)


def _log_gaussians(model: GmmModel, x: np.ndarray) -> np.ndarray:
    """Per-row, per-component log N(x; mu_j, Sigma_j), shape (N, K)."""
    n, d = x.shape
    out = np.empty((n, model.k))
    if model.covariance_type == DIAGONAL:
        std = model._chols
        for j in range(model.k):
            z = (x - model.means[j]) / std[j]
            out[:, j] = -0.5 * np.sum(z * z, axis=1) - np.sum(np.log(std[j]))
    else:
        for j in range(model.k):
            z = solve_triangular(
                model._chols[j], (x - model.means[j]).T, lower=True
            )
            out[:, j] = -0.5 * np.sum(z * z, axis=0) - np.sum(
                np.log(np.diag(model._chols[j]))
            )
    return out - 0.5 * d * np.log(2.0 * np.pi)


def _weighted_log_prob(model: GmmModel, x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        logw = np.log(model.weights)
    return _log_gaussians(model, x) + logw


def _as_matrix(x, dim: int | None = None) -> np.ndarray:
    if isinstance(x, CoefficientMatrix):
        x = x.values
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None]
    if x.ndim != 2:
        raise DimensionError(f"expected vector or matrix, got shape {x.shape}")
    if dim is not None and x.shape[1] != dim:
        raise DimensionError(f"dimension {x.shape[1]} does not match model dim {dim}")
    return x


def _kmeans_pp_centers(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            # all remaining points coincide with a chosen center
            centers[j:] = centers[0]
            break
        centers[j] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((x - centers[j]) ** 2, axis=1))
    return centers


def default_reg(x: np.ndarray) -> float:
    """Adaptive ridge: 1e-6 * trace(global covariance) / d."""
    var = np.var(x, axis=0)
    return 1e-6 * float(var.sum()) / x.shape[1]


def fit_em(
    x,
    k: int,
    covariance_type: str = FULL,
    reg: float | None = None,
    seed: int = 0,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> GmmModel:
    """Maximum-likelihood mixture fit by EM with k-means++ initialization.

    Stops when the mean log-likelihood improves by less than tol or after
    max_iter iterations. The ridge reg is added to every covariance at
    every M-step; a component whose covariance still fails to factor
    raises a numerical error naming it.
    """
    xm = _as_matrix(x)
    n, d = xm.shape
    if covariance_type not in (FULL, DIAGONAL):
        raise UsageError(f"unknown covariance type {covariance_type!r}")
    if k < 1:
        raise UsageError("component count must be at least 1")
    if n <= k:
        raise UsageError(f"need more samples than components ({n} <= {k})")
    if reg is None:
        reg = default_reg(xm)
    if reg < 0:
        raise UsageError("covariance ridge must be non-negative")

    rng = np.random.default_rng(seed)
    means = _kmeans_pp_centers(xm, k, rng)
    weights = np.full(k, 1.0 / k)
    global_var = np.var(xm, axis=0)
    if covariance_type == DIAGONAL:
        covariances = np.tile(global_var + reg, (k, 1))
    else:
        base = np.cov(xm, rowvar=False, bias=True).reshape(d, d)
        covariances = np.tile(base + reg * np.eye(d), (k, 1, 1))

    model = GmmModel(k, d, weights, means, covariances, covariance_type, reg)
    fit_log = []
    prev_ll = -np.inf
    for _ in range(max_iter):
        wlp = _weighted_log_prob(model, xm)
        norm = logsumexp(wlp, axis=1)
        mean_ll = float(norm.mean())
        fit_log.append(mean_ll)
        resp = np.exp(wlp - norm[:, None])

        nk = resp.sum(axis=0) + _WEIGHT_FLOOR
        weights = nk / nk.sum()
        means = (resp.T @ xm) / nk[:, None]
        if covariance_type == DIAGONAL:
            ex2 = (resp.T @ (xm * xm)) / nk[:, None]
            covariances = ex2 - means**2 + reg
        else:
            covariances = np.empty((k, d, d))
            for j in range(k):
                diff = xm - means[j]
                covariances[j] = (resp[:, j] * diff.T) @ diff / nk[j] + reg * np.eye(d)
        model = GmmModel(k, d, weights, means, covariances, covariance_type, reg)
        if mean_ll - prev_ll < tol and np.isfinite(prev_ll):
            break
        prev_ll = mean_ll
    model.fit_log = fit_log
    return model


def gmm_logpdf(model: GmmModel, x):
    """Log mixture density; scalar for one vector, array for a matrix."""
    single = not isinstance(x, CoefficientMatrix) and np.asarray(x).ndim == 1
    xm = _as_matrix(x, model.dim)
    lp = logsumexp(_weighted_log_prob(model, xm), axis=1)
    return float(lp[0]) if single else lp


def gmm_mean_nll(model: GmmModel, x) -> float:
    """Average negative log-likelihood over rows (the entropy estimate)."""
    xm = _as_matrix(x, model.dim)
    return -float(np.mean(logsumexp(_weighted_log_prob(model, xm), axis=1)))


def gmm_sample(model: GmmModel, n: int, seed: int = 0) -> CoefficientMatrix:
    """Draw n rows: component ~ weights, then its Gaussian via Cholesky."""
    if n < 0:
        raise UsageError("sample count must be non-negative")
    rng = np.random.default_rng(seed)
    out = np.empty((n, model.dim))
    if n:
        comps = rng.choice(model.k, size=n, p=model.weights)
        z = rng.standard_normal((n, model.dim))
        for j in range(model.k):
            rows = comps == j
            if not np.any(rows):
                continue
            if model.covariance_type == DIAGONAL:
                out[rows] = model.means[j] + z[rows] * model._chols[j]
            else:
                out[rows] = model.means[j] + z[rows] @ model._chols[j].T
    basis_id = f"gmm:k={model.k}:d={model.dim}"
    return CoefficientMatrix(out, basis_id=basis_id)
