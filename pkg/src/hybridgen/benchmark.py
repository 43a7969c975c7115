"""Wavelet-space entropy benchmark and the l1 distance between NLL curves.

The reference density is a GMM over per-image DWT features (LL, LH, HL
subbands; the high/high block is excluded). It scores any image set by the
mean negative log-likelihood of its features (DWT-E), and is never sampled
from: it is a yardstick, not a generator. The l1 metric compares real and
generated NLL populations as 1-d KDE curves integrated over an interval
anchored on the real sample, so the metric concentrates where the real
density actually lives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kde as _kde
from .errors import DataError, DegenerateDataError, DimensionError, UsageError
from .gmm import DIAGONAL, GmmModel, fit_em, gmm_logpdf
from .ingest import DatasetTensor
from .kde import KdeModel, fit_kde, kde_logpdf, kde_mean_nll
from .wavelet import SUBBAND_ORDER, dwt_features, subband_len

PERCENTILE = "percentile"
FIXED_INTERVAL = "fixed"

DEFAULT_REFERENCE_K = 10


@dataclass(eq=False)
class FeatureSpec:
    height: int
    width: int
    subband_order: tuple = SUBBAND_ORDER

    @property
    def d(self) -> int:
        return len(self.subband_order) * subband_len(self.height) * subband_len(
            self.width
        )


@dataclass(eq=False)
class ReferenceModel:
    gmm: GmmModel
    feature_spec: FeatureSpec
    dataset_id: str = ""

    def __post_init__(self):
        if self.gmm.dim != self.feature_spec.d:
            raise DimensionError(
                f"reference GMM dim {self.gmm.dim} != feature dim {self.feature_spec.d}"
            )


@dataclass(eq=False)
class NllCurveConfig:
    interval_rule: str = PERCENTILE
    lo: float = 1.0
    hi: float = 99.0
    grid_points: int = 512
    curve_bandwidth_rule: str = _kde.SCOTT
    curve_bandwidth: float = None

    def __post_init__(self):
        if self.interval_rule not in (PERCENTILE, FIXED_INTERVAL):
            raise UsageError(f"unknown interval rule {self.interval_rule!r}")
        if not self.lo < self.hi:
            raise UsageError("interval bounds must satisfy lo < hi")
        if self.interval_rule == PERCENTILE and not (
            0.0 <= self.lo and self.hi <= 100.0
        ):
            raise UsageError("percentile bounds must lie in [0, 100]")
        if self.grid_points < 16:
            raise UsageError("grid_points must be at least 16")


@dataclass(eq=False)
class BenchmarkReport:
    model_id: str
    basis_id: str
    dataset_id: str
    dwt_entropy: float
    kde_entropy: float
    l1_distance_raw: float
    l1_distance_scaled: float
    nll_real: np.ndarray
    nll_generated: np.ndarray
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if abs(self.l1_distance_scaled - 100.0 * self.l1_distance_raw) > 1e-9 * max(
            1.0, abs(self.l1_distance_scaled)
        ):
            raise UsageError("scaled l1 must equal 100 x raw")
        if not (
            np.all(np.isfinite(self.nll_real)) and np.all(np.isfinite(self.nll_generated))
        ):
            raise DataError("NLL arrays must be finite")


def build_reference(
    data: DatasetTensor,
    k: int = DEFAULT_REFERENCE_K,
    covariance_type: str = DIAGONAL,
    reg: float | None = None,
    seed: int = 0,
    dataset_id: str = "",
) -> ReferenceModel:
    """Fit the DWT-GMM reference on a real dataset."""
    feats = dwt_features(data, dataset_id=dataset_id)
    model = fit_em(feats, k=k, covariance_type=covariance_type, reg=reg, seed=seed)
    spec = FeatureSpec(height=data.height, width=data.width)
    return ReferenceModel(gmm=model, feature_spec=spec, dataset_id=dataset_id)


def dwt_entropy(ref: ReferenceModel, images: DatasetTensor):
    """Mean and per-image NLL of the images' DWT features under the reference."""
    if images.n < 1:
        raise DataError("cannot score an empty image set")
    spec = ref.feature_spec
    if (images.height, images.width) != (spec.height, spec.width):
        raise DimensionError(
            f"images are {images.height}x{images.width}, reference expects "
            f"{spec.height}x{spec.width}"
        )
    feats = dwt_features(images)
    nll = -gmm_logpdf(ref.gmm, feats)
    return float(nll.mean()), nll


def _nll_curve_kde(values: np.ndarray, cfg: NllCurveConfig) -> KdeModel:
    return fit_kde(
        values[:, None],
        rule=cfg.curve_bandwidth_rule,
        bandwidth=cfg.curve_bandwidth,
    )


def l1_density_distance(nll_real, nll_gen, cfg: NllCurveConfig | None = None) -> float:
    """Trapezoidal integral of |f_real - f_gen| between the 1-d KDE curves.

    The integration interval comes from the REAL array (percentile rule by
    default), so swapping arguments is not symmetric under that rule; with
    a fixed interval it is.
    """
    if cfg is None:
        cfg = NllCurveConfig()
    a = np.asarray(nll_real, dtype=np.float64).ravel()
    b = np.asarray(nll_gen, dtype=np.float64).ravel()
    for name, arr in (("real", a), ("generated", b)):
        if arr.size < 10:
            raise DataError(f"{name} NLL array needs at least 10 values, got {arr.size}")
        if arr.max() == arr.min():
            raise DegenerateDataError(f"{name} NLL array is constant")
    grid, f_real, f_gen = nll_curves(a, b, cfg)
    return float(np.trapezoid(np.abs(f_real - f_gen), grid))


def nll_curves(nll_real, nll_gen, cfg: NllCurveConfig | None = None):
    """(grid, f_real, f_gen) as plotted/exported by the CLI."""
    if cfg is None:
        cfg = NllCurveConfig()
    a = np.asarray(nll_real, dtype=np.float64).ravel()
    b = np.asarray(nll_gen, dtype=np.float64).ravel()
    if cfg.interval_rule == PERCENTILE:
        lo, hi = np.percentile(a, [cfg.lo, cfg.hi])
    else:
        lo, hi = cfg.lo, cfg.hi
    grid = np.linspace(lo, hi, cfg.grid_points)
    f_real = np.exp(kde_logpdf(_nll_curve_kde(a, cfg), grid[:, None]))
    f_gen = np.exp(kde_logpdf(_nll_curve_kde(b, cfg), grid[:, None]))
    return grid, f_real, f_gen


def evaluate(
    ref: ReferenceModel,
    kde_ref: KdeModel,
    real: DatasetTensor,
    generated: DatasetTensor,
    cfg: NllCurveConfig | None = None,
    model_id: str = "",
    basis_id: str = "",
    kde_map=None,
    extra_config: dict | None = None,
) -> BenchmarkReport:
    """Assemble the full report for one generated set against one real set.

    kde_ref scores flattened generated images (KDE-E); kde_map, when given,
    first maps flattened pixels into the space kde_ref was fit in (the CLI
    uses this for its optional PCA reduction).
    """
    if cfg is None:
        cfg = NllCurveConfig()
    if (real.height, real.width) != (generated.height, generated.width):
        raise DimensionError(
            f"real images are {real.height}x{real.width}, generated are "
            f"{generated.height}x{generated.width}"
        )
    _, nll_real = dwt_entropy(ref, real)
    gen_mean, nll_gen = dwt_entropy(ref, generated)
    gen_pixels = generated.flat()
    if kde_map is not None:
        gen_pixels = np.asarray(kde_map(gen_pixels), dtype=np.float64)
    kde_entropy = kde_mean_nll(kde_ref, gen_pixels)
    l1_raw = l1_density_distance(nll_real, nll_gen, cfg)
    config = {
        "interval_rule": cfg.interval_rule,
        "interval_lo": cfg.lo,
        "interval_hi": cfg.hi,
        "grid_points": cfg.grid_points,
        "curve_bandwidth_rule": cfg.curve_bandwidth_rule,
        "curve_bandwidth": cfg.curve_bandwidth,
        "reference_k": ref.gmm.k,
        "reference_covariance": ref.gmm.covariance_type,
        "feature_d": ref.feature_spec.d,
        "kde_dim": kde_ref.dim,
        "kde_bandwidth_rule": kde_ref.bandwidth_rule,
        "kde_bandwidth": kde_ref.bandwidth,
        "n_real": real.n,
        "n_generated": generated.n,
    }
    if extra_config:
        config.update(extra_config)
    return BenchmarkReport(
        model_id=model_id,
        basis_id=basis_id,
        dataset_id=ref.dataset_id,
        dwt_entropy=gen_mean,
        kde_entropy=kde_entropy,
        l1_distance_raw=l1_raw,
        l1_distance_scaled=100.0 * l1_raw,
        nll_real=nll_real,
        nll_generated=nll_gen,
        config=config,
    )


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def report_lines(report: BenchmarkReport) -> list:
    """Flat key=value lines, fixed order, deterministic float formatting."""
    items = [
        ("model_id", report.model_id),
        ("basis_id", report.basis_id),
        ("dataset_id", report.dataset_id),
        ("dwt_entropy", repr(float(report.dwt_entropy))),
        ("kde_entropy", repr(float(report.kde_entropy))),
        ("l1_distance_raw", repr(float(report.l1_distance_raw))),
        ("l1_distance_scaled", repr(float(report.l1_distance_scaled))),
    ]
    for key in sorted(report.config):
        items.append((f"config.{key}", _fmt(report.config[key])))
    return [f"{k}={v}" for k, v in items]


def write_report(report: BenchmarkReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(report_lines(report)) + "\n")


def write_nll_csv(report: BenchmarkReport, path) -> None:
    """Per-sample NLL table; the two columns may have different lengths."""
    n = max(report.nll_real.size, report.nll_generated.size)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("index,nll_real,nll_generated\n")
        for i in range(n):
            r = repr(float(report.nll_real[i])) if i < report.nll_real.size else ""
            g = (
                repr(float(report.nll_generated[i]))
                if i < report.nll_generated.size
                else ""
            )
            fh.write(f"{i},{r},{g}\n")
