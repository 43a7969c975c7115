"""Generative modeling of 2D array datasets in representation-basis space.

The pipeline: preprocess images (logit map or per-image Z-score), project
them into a linear or tensor basis (PCA, FastICA, Tucker, or raw pixels),
fit a density model to the coefficients, sample it, invert back to images,
and score the result against a wavelet-space GMM reference (DWT-E) plus
the l1 distance between real and generated NLL density curves.
"""

__version__ = "0.1.0"

from .benchmark import (
    BenchmarkReport,
    FeatureSpec,
    NllCurveConfig,
    ReferenceModel,
    build_reference,
    dwt_entropy,
    evaluate,
    l1_density_distance,
    nll_curves,
)
from .coeffs import CoefficientMatrix
from .coeffio import read_coeffs, write_coeffs
from .errors import (
    DataError,
    DegenerateDataError,
    DimensionError,
    DomainError,
    FormatError,
    HybridgenError,
    NumericError,
    RankError,
    TruncatedFileError,
    UsageError,
)
from .gmm import GmmModel, fit_em, gmm_logpdf, gmm_mean_nll, gmm_sample
from .ingest import (
    DatasetTensor,
    PreprocessConfig,
    XgcSurrogateConfig,
    load_idx,
    logit_map,
    sigmoid_unmap,
    synth_xgc,
    write_idx,
    zscore_per_image,
    zscore_restore,
)
from .kde import KdeModel, fit_kde, kde_logpdf, kde_mean_nll
from .linear import (
    IcaBasis,
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
from .tucker import TuckerBasis, hosvd, tucker_project, tucker_reconstruct
from .wavelet import DwtCoeffs, dwt2, dwt_features, idwt2, subband_len

__all__ = [
    "__version__",
    "BenchmarkReport",
    "CoefficientMatrix",
    "DatasetTensor",
    "DwtCoeffs",
    "FeatureSpec",
    "GmmModel",
    "HybridgenError",
    "IcaBasis",
    "IcaOptions",
    "IdentityBasis",
    "KdeModel",
    "NllCurveConfig",
    "PcaBasis",
    "PreprocessConfig",
    "ReferenceModel",
    "TuckerBasis",
    "XgcSurrogateConfig",
    "DataError",
    "DegenerateDataError",
    "DimensionError",
    "DomainError",
    "FormatError",
    "NumericError",
    "RankError",
    "TruncatedFileError",
    "UsageError",
    "build_reference",
    "dwt2",
    "dwt_entropy",
    "dwt_features",
    "evaluate",
    "fit_em",
    "fit_fastica",
    "fit_identity_basis",
    "fit_kde",
    "fit_pca",
    "gmm_logpdf",
    "gmm_mean_nll",
    "gmm_sample",
    "hosvd",
    "ica_inverse",
    "ica_transform",
    "idwt2",
    "kde_logpdf",
    "kde_mean_nll",
    "l1_density_distance",
    "load_idx",
    "logit_map",
    "nll_curves",
    "pca_project",
    "pca_reconstruct",
    "read_coeffs",
    "sigmoid_unmap",
    "subband_len",
    "synth_xgc",
    "tucker_project",
    "tucker_reconstruct",
    "write_coeffs",
    "write_idx",
    "zscore_per_image",
    "zscore_restore",
]
