"""Dataset loading, intensity preprocessing, and a synthetic surrogate
for particle-velocity histogram data.

Datasets are stacks of same-sized 2D grids. Every tensor carries a
``value_domain`` tag so the preprocessing maps can refuse inputs from the
wrong space instead of silently producing garbage.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import (
    DegenerateDataError,
    DimensionError,
    DomainError,
    FormatError,
    TruncatedFileError,
    UsageError,
)

UNIT_INTERVAL = "unit_interval"
LOGIT_SPACE = "logit_space"
ZSCORED = "zscored"
RAW = "raw"
VALUE_DOMAINS = (UNIT_INTERVAL, LOGIT_SPACE, ZSCORED, RAW)

# rank-3 unsigned-byte IDX tensor
IDX_MAGIC = 0x00000803


@dataclass(eq=False)
class DatasetTensor:
    """N stacked H x W float64 grids plus optional per-image stats.

    ``per_image_stats`` is an (n, 2) array of (mean, std) recorded by
    :func:`zscore_per_image` so the transform can be undone.
    """

    values: np.ndarray
    value_domain: str = RAW
    per_image_stats: np.ndarray | None = None

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 3:
            raise DimensionError(f"dataset must be N x H x W, got shape {values.shape}")
        if not np.isfinite(values).all():
            raise DomainError("dataset contains non-finite values")
        if self.value_domain not in VALUE_DOMAINS:
            raise UsageError(f"unknown value domain {self.value_domain!r}")
        if self.value_domain == UNIT_INTERVAL:
            lo, hi = values.min(initial=0.0), values.max(initial=0.0)
            if lo < 0.0 or hi > 1.0:
                raise DomainError(
                    f"unit-interval dataset has values in [{lo}, {hi}]"
                )
        if self.per_image_stats is not None:
            stats = np.ascontiguousarray(self.per_image_stats, dtype=np.float64)
            if stats.shape != (values.shape[0], 2):
                raise DimensionError(
                    f"per-image stats shape {stats.shape} does not match n={values.shape[0]}"
                )
            if not (stats[:, 1] > 0).all():
                raise DomainError("per-image std must be positive")
            self.per_image_stats = stats
        self.values = values

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def height(self) -> int:
        return self.values.shape[1]

    @property
    def width(self) -> int:
        return self.values.shape[2]

    def flat(self) -> np.ndarray:
        """The dataset as an (n, height*width) matrix (a view when possible)."""
        return self.values.reshape(self.n, -1)


@dataclass(frozen=True)
class PreprocessConfig:
    """Settings for the intensity maps.

    ``epsilon`` clamps unit-interval values away from {0, 1} before the
    logit map; ``beta`` is the gradient slope factor of that map.
    """

    epsilon: float = 0.001
    beta: float = 1.0
    mode: str = "none"

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.5:
            raise UsageError(f"epsilon must lie in (0, 0.5), got {self.epsilon}")
        if self.beta <= 0.0:
            raise UsageError(f"beta must be positive, got {self.beta}")
        if self.mode not in ("logit", "zscore", "none"):
            raise UsageError(f"unknown preprocess mode {self.mode!r}")


@dataclass(frozen=True)
class XgcSurrogateConfig:
    """Controls for the synthetic velocity-histogram surrogate.

    Each generated image is a discretized 2D Gaussian mixture scaled by a
    per-image factor drawn uniformly from ``range_scale``, so individual
    images have deliberately different dynamic ranges.
    """

    n_nodes: int
    height: int = 32
    width: int = 32
    components_per_node: tuple[int, int] = (2, 5)
    seed: int = 0
    range_scale: tuple[float, float] = (1.0, 100.0)

    def __post_init__(self):
        if self.n_nodes < 1:
            raise UsageError("n_nodes must be at least 1")
        if self.height < 8 or self.width < 8:
            raise UsageError("surrogate images must be at least 8 x 8")
        lo, hi = self.components_per_node
        if not (1 <= lo <= hi):
            raise UsageError(f"bad components_per_node range {self.components_per_node}")
        # equal endpoints are allowed: a degenerate range pins the scale factor
        if not (self.range_scale[0] <= self.range_scale[1]):
            raise UsageError(f"bad range_scale {self.range_scale}")
        if self.range_scale[0] <= 0:
            raise UsageError("range_scale must be positive")


def load_idx(path) -> DatasetTensor:
    """Load a rank-3 unsigned-byte IDX file, scaling bytes to [0, 1].

    The expected layout is a 4-byte big-endian magic 0x00000803, three
    big-endian u32 dims (N, H, W), then N*H*W unsigned bytes row-major.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4:
        raise TruncatedFileError(f"{path}: too short for an IDX magic number")
    magic = int.from_bytes(raw[:4], "big")
    if magic != IDX_MAGIC:
        raise FormatError(
            f"{path}: magic 0x{magic:08x} is not an unsigned-byte rank-3 IDX tensor"
        )
    if len(raw) < 16:
        raise TruncatedFileError(f"{path}: IDX header truncated")
    n, h, w = struct.unpack(">III", raw[4:16])
    need = 16 + n * h * w
    if len(raw) < need:
        raise TruncatedFileError(
            f"{path}: IDX payload truncated ({len(raw)} bytes, need {need})"
        )
    values = np.frombuffer(raw, dtype=np.uint8, count=n * h * w, offset=16)
    values = values.reshape(n, h, w).astype(np.float64) / 255.0
    return DatasetTensor(values, UNIT_INTERVAL)


def write_idx(data: DatasetTensor, path):
    """Write a unit-interval dataset as a rank-3 unsigned-byte IDX file."""
    if data.value_domain != UNIT_INTERVAL:
        raise DomainError("IDX files hold unit-interval data only")
    header = struct.pack(">IIII", IDX_MAGIC, data.n, data.height, data.width)
    payload = np.rint(data.values * 255.0).astype(np.uint8).tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def logit_map(data: DatasetTensor, cfg: PreprocessConfig) -> DatasetTensor:
    """Map unit-interval intensities to an unconstrained range.

    Values are first clamped to [epsilon, 1 - epsilon] (a no-op for
    interior values), then mapped by y = ln(x / (beta * (1 - x))).
    """
    if data.value_domain != UNIT_INTERVAL:
        raise DomainError(
            f"logit map needs unit-interval input, got {data.value_domain!r}"
        )
    x = np.clip(data.values, cfg.epsilon, 1.0 - cfg.epsilon)
    y = np.log(x) - np.log1p(-x) - np.log(cfg.beta)
    return DatasetTensor(y, LOGIT_SPACE, per_image_stats=data.per_image_stats)


def sigmoid_unmap(data: DatasetTensor, cfg: PreprocessConfig) -> DatasetTensor:
    """Invert :func:`logit_map`: x = beta*e^y / (1 + beta*e^y).

    Computed as a numerically stable sigmoid, so arbitrarily large |y| is
    safe. Outputs are nudged into the open interval (0, 1) by one ulp so
    extreme inputs cannot round onto the endpoints.
    """
    if data.value_domain != LOGIT_SPACE:
        raise DomainError(
            f"sigmoid unmap needs logit-space input, got {data.value_domain!r}"
        )
    x = expit(data.values + np.log(cfg.beta))
    x = np.clip(x, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
    return DatasetTensor(x, UNIT_INTERVAL, per_image_stats=data.per_image_stats)


def zscore_per_image(data: DatasetTensor) -> DatasetTensor:
    """Normalize each image separately to mean 0 and population std 1.

    The original (mean, std) pairs are recorded in ``per_image_stats`` so
    :func:`zscore_restore` can undo the transform. Population (1/N)
    standard deviation is used throughout.
    """
    flat = data.flat()
    means = flat.mean(axis=1)
    stds = flat.std(axis=1)
    bad = np.flatnonzero(stds == 0.0)
    if bad.size:
        raise DegenerateDataError(
            f"image {bad[0]} is constant and cannot be z-scored"
        )
    values = (data.values - means[:, None, None]) / stds[:, None, None]
    stats = np.column_stack([means, stds])
    return DatasetTensor(values, ZSCORED, per_image_stats=stats)


def zscore_restore(data: DatasetTensor) -> DatasetTensor:
    """Undo :func:`zscore_per_image` using the recorded per-image stats."""
    if data.per_image_stats is None:
        raise UsageError("dataset carries no per-image stats to restore from")
    means = data.per_image_stats[:, 0]
    stds = data.per_image_stats[:, 1]
    values = data.values * stds[:, None, None] + means[:, None, None]
    return DatasetTensor(values, RAW)


def synth_xgc(cfg: XgcSurrogateConfig) -> DatasetTensor:
    """Generate a surrogate dataset of 2D velocity-histogram-like images.

    Each image is a mixture of 2D Gaussian bumps on the unit square,
    discretized to the pixel grid, peak-normalized, and scaled by a
    per-image factor drawn from ``range_scale``. Deterministic for a
    fixed seed.
    """
    rng = np.random.default_rng(cfg.seed)
    ys = (np.arange(cfg.height) + 0.5) / cfg.height
    xs = (np.arange(cfg.width) + 0.5) / cfg.width
    gy, gx = np.meshgrid(ys, xs, indexing="ij")
    lo, hi = cfg.components_per_node
    values = np.empty((cfg.n_nodes, cfg.height, cfg.width))
    for i in range(cfg.n_nodes):
        k = int(rng.integers(lo, hi + 1))
        image = np.zeros((cfg.height, cfg.width))
        for _ in range(k):
            cy, cx = rng.uniform(0.15, 0.85, size=2)
            sy, sx = rng.uniform(0.05, 0.25, size=2)
            amp = rng.uniform(0.3, 1.0)
            image += amp * np.exp(
                -0.5 * (((gy - cy) / sy) ** 2 + ((gx - cx) / sx) ** 2)
            )
        scale = rng.uniform(cfg.range_scale[0], cfg.range_scale[1])
        values[i] = image * (scale / image.max())
    return DatasetTensor(values, RAW)
