"""Exception hierarchy shared across the toolkit.

The command line tool maps these onto process exit codes: usage errors
exit 2, data errors exit 3, numeric errors exit 4.
"""


class HybridgenError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class UsageError(HybridgenError):
    """Bad invocation: invalid options, incompatible configuration."""

    exit_code = 2


class DataError(HybridgenError):
    """Malformed, inconsistent, or unusable input data."""

    exit_code = 3


class FormatError(DataError):
    """A file does not follow its declared on-disk layout."""


class TruncatedFileError(DataError):
    """A file ended before its declared payload was complete."""


class DimensionError(DataError):
    """Array shapes incompatible with the requested operation."""


class DomainError(DataError):
    """Values outside the domain an operation requires."""


class DegenerateDataError(DataError):
    """Input with no usable variation (constant image, constant sample)."""


class RankError(DataError):
    """Input rank too low for the requested decomposition."""


class NumericError(HybridgenError):
    """A computation failed numerically despite well-formed inputs."""

    exit_code = 4
