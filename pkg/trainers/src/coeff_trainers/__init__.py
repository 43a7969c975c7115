"""Deep generative trainers over coefficient files."""

from .errors import (
    ConfigError,
    FileFormatError,
    TrainerError,
    TrainingError,
    TruncatedFileError,
)
from .flow import NfConfig, build_flow, nf_logpdf, train_nf
from .gan import GanConfig, train_gan
from .generate import generate

__all__ = [
    "ConfigError",
    "FileFormatError",
    "GanConfig",
    "NfConfig",
    "TrainerError",
    "TrainingError",
    "TruncatedFileError",
    "build_flow",
    "generate",
    "nf_logpdf",
    "train_gan",
    "train_nf",
]
