"""Coefficient matrices, the interchange currency between pipeline stages."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError


@dataclass(eq=False)
class CoefficientMatrix:
    """N rows of d transform coefficients plus provenance tags.

    ``values`` is always a finite float64 array of shape (n, d); the
    constructor rejects anything else, naming the first offending entry.
    """

    values: np.ndarray
    basis_id: str = ""
    dataset_id: str = ""

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DimensionError(
                f"coefficient matrix must be 2-d, got shape {values.shape}"
            )
        bad = np.argwhere(~np.isfinite(values))
        if bad.size:
            i, j = bad[0]
            raise DomainError(f"non-finite coefficient at row {i}, column {j}")
        self.values = values

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]
