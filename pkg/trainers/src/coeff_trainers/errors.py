"""Error taxonomy; exit codes match the coefficient pipeline's convention."""


class TrainerError(Exception):
    exit_code = 1


class ConfigError(TrainerError):
    """Invalid configuration or command usage."""

    exit_code = 2


class FileFormatError(TrainerError):
    """Unreadable or malformed input file."""

    exit_code = 3


class TruncatedFileError(FileFormatError):
    pass


class TrainingError(TrainerError):
    """Numerical failure during training (NaN losses and the like)."""

    exit_code = 4
