"""Single-level 2D biorthogonal-1.3 wavelet transform.

Separable analysis/synthesis with half-point symmetric boundary extension.
Each 1D pass convolves the extended signal with the length-6 filters and
keeps every second full-support sample, so a length-n signal yields
subbands of floor((n + 5) / 2) coefficients: 16 for n = 28, 18 for n = 32.
The synthesis side undoes this exactly (perfect reconstruction), which is
what pins down the boundary convention; golden vectors in the test suite
freeze it against accidental change.

Subband naming: first letter is the filter applied along the height axis,
second along the width axis, so ``lh`` is low-pass over rows of pixels
vertically and high-pass horizontally.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .coeffs import CoefficientMatrix
from .errors import DimensionError
from .ingest import DatasetTensor

_SQRT2 = np.sqrt(2.0)
# standard biorthogonal 1.3 bank, exact rationals times 1/sqrt(2)
DEC_LO = np.array([-0.125, 0.125, 1.0, 1.0, 0.125, -0.125]) / _SQRT2
DEC_HI = np.array([0.0, 0.0, -1.0, 1.0, 0.0, 0.0]) / _SQRT2
REC_LO = np.array([0.0, 0.0, 1.0, 1.0, 0.0, 0.0]) / _SQRT2
REC_HI = np.array([-0.125, -0.125, 1.0, -1.0, 0.125, 0.125]) / _SQRT2

FILTER_LEN = 6
_PAD = FILTER_LEN - 1
# first retained sample of the full convolution, and the synthesis crop
# offset; this pair is what makes the roundtrip exact for every n >= 6
_ANALYSIS_START = 6
_SYNTHESIS_SHIFT = 4

SUBBAND_ORDER = ("ll", "lh", "hl")


def subband_len(n: int) -> int:
    """Coefficients per subband for a length-n axis."""
    return (n + FILTER_LEN - 1) // 2


@dataclass(eq=False)
class DwtCoeffs:
    """The four subbands of one image plus its original dimensions."""

    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray
    source_dims: tuple[int, int]

    def __post_init__(self):
        shape = self.ll.shape
        for name in ("lh", "hl", "hh"):
            if getattr(self, name).shape != shape:
                raise DimensionError("subbands must share one shape")
        h, w = self.source_dims
        if shape != (subband_len(h), subband_len(w)):
            raise DimensionError(
                f"subband shape {shape} inconsistent with source dims {self.source_dims}"
            )


def _sym_ext_matrix(n: int) -> np.ndarray:
    # half-point symmetric extension: ... x1 x0 | x0 .. x(n-1) | x(n-1) ...
    idx = np.concatenate(
        [np.arange(_PAD - 1, -1, -1), np.arange(n), np.arange(n - 1, n - 1 - _PAD, -1)]
    )
    ext = np.zeros((n + 2 * _PAD, n))
    ext[np.arange(idx.size), idx] = 1.0
    return ext


@lru_cache(maxsize=None)
def _analysis_matrices(n: int):
    """(A_lo, A_hi), each (subband_len(n), n): one 1D analysis pass."""
    if n < FILTER_LEN:
        raise DimensionError(
            f"axis of length {n} is shorter than the filter support ({FILTER_LEN})"
        )
    o = subband_len(n)
    ext = _sym_ext_matrix(n)
    mats = []
    for filt in (DEC_LO, DEC_HI):
        full = np.apply_along_axis(lambda col: np.convolve(col, filt), 0, ext)
        mats.append(full[_ANALYSIS_START : _ANALYSIS_START + 2 * o : 2].copy())
    return tuple(mats)


@lru_cache(maxsize=None)
def _synthesis_matrices(n: int):
    """(S_lo, S_hi), each (n, subband_len(n)): one 1D synthesis pass."""
    o = subband_len(n)
    mats = []
    for filt in (REC_LO, REC_HI):
        up = np.zeros((2 * o, o))
        up[2 * np.arange(o), np.arange(o)] = 1.0
        full = np.apply_along_axis(lambda col: np.convolve(col, filt), 0, up)
        mats.append(full[_SYNTHESIS_SHIFT : _SYNTHESIS_SHIFT + n].copy())
    return tuple(mats)


def dwt2(image: np.ndarray) -> DwtCoeffs:
    """Single-level separable 2D analysis of one H x W image."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise DimensionError(f"expected a 2-d image, got shape {image.shape}")
    h, w = image.shape
    alo_h, ahi_h = _analysis_matrices(h)
    alo_w, ahi_w = _analysis_matrices(w)
    lo = alo_h @ image
    hi = ahi_h @ image
    return DwtCoeffs(
        ll=lo @ alo_w.T,
        lh=lo @ ahi_w.T,
        hl=hi @ alo_w.T,
        hh=hi @ ahi_w.T,
        source_dims=(h, w),
    )


def idwt2(coeffs: DwtCoeffs) -> np.ndarray:
    """Exact inverse of :func:`dwt2` back to the original H x W image."""
    h, w = coeffs.source_dims
    slo_h, shi_h = _synthesis_matrices(h)
    slo_w, shi_w = _synthesis_matrices(w)
    return (
        slo_h @ coeffs.ll @ slo_w.T
        + slo_h @ coeffs.lh @ shi_w.T
        + shi_h @ coeffs.hl @ slo_w.T
        + shi_h @ coeffs.hh @ shi_w.T
    )


def dwt_features(data: DatasetTensor, dataset_id: str = "") -> CoefficientMatrix:
    """Per-image feature rows: vectorized LL, LH, HL subbands, in that order.

    The high/high subband is deliberately excluded; feature length is
    3 * subband_len(H) * subband_len(W) (768 for 28 x 28, 972 for 32 x 32).
    """
    h, w = data.height, data.width
    alo_h, ahi_h = _analysis_matrices(h)
    alo_w, ahi_w = _analysis_matrices(w)
    lo = np.matmul(alo_h, data.values)
    hi = np.matmul(ahi_h, data.values)
    n = data.n
    ll = np.matmul(lo, alo_w.T).reshape(n, -1)
    lh = np.matmul(lo, ahi_w.T).reshape(n, -1)
    hl = np.matmul(hi, alo_w.T).reshape(n, -1)
    features = np.concatenate([ll, lh, hl], axis=1)
    basis_id = f"dwt-bior1.3:{h}x{w}:" + "+".join(SUBBAND_ORDER)
    return CoefficientMatrix(features, basis_id=basis_id, dataset_id=dataset_id)
