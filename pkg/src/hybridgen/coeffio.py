"""Binary container for coefficient matrices and model arrays.

This file layout is the contract between pipeline stages and between this
package and external trainer processes, so it is fixed bit-for-bit
(version 1, all integers little-endian):

    bytes 0..3    magic ``HGMC``
    bytes 4..5    version, u16
    byte  6       kind: 1 = coefficient matrix, 2 = matrix, 3 = vector
    bytes 7..14   rows, u64
    bytes 15..22  cols, u64
    payload       rows * cols float64 values, row-major, little-endian
    trailer       UTF-8 ``key=value`` lines, one per key

The trailer is plain text so provenance can be inspected with ordinary
shell tools. Keys are unique, contain no ``=`` or newline; values contain
no newline. Typical keys: basis_id, dataset_id, preprocess, seed, created.
"""

from __future__ import annotations

import struct

import numpy as np

from .coeffs import CoefficientMatrix
from .errors import FormatError, TruncatedFileError

MAGIC = b"HGMC"
VERSION = 1

KIND_COEFFS = 1
KIND_MATRIX = 2
KIND_VECTOR = 3
_KINDS = (KIND_COEFFS, KIND_MATRIX, KIND_VECTOR)

_HEADER = struct.Struct("<4sHBQQ")
# rows * cols * 8 payload bytes must stay below 2**63
_MAX_ELEMENTS = (2**63 - 1) // 8


def _encode_metadata(metadata):
    lines = []
    for key, value in metadata.items():
        key = str(key)
        value = str(value)
        if not key or "=" in key or "\n" in key:
            raise FormatError(f"invalid metadata key {key!r}")
        if "\n" in value:
            raise FormatError(f"metadata value for {key!r} contains a newline")
        lines.append(f"{key}={value}\n")
    return "".join(lines).encode("utf-8")


def _decode_metadata(blob):
    try:
        text = blob.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"metadata trailer is not UTF-8: {exc}") from None
    metadata = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"metadata line {lineno} has no '=': {line!r}")
        key, value = line.split("=", 1)
        if key in metadata:
            raise FormatError(f"duplicate metadata key {key!r}")
        metadata[key] = value
    return metadata


def write_container(path, values, kind, metadata=None):
    """Write a 2-d float64 array with trailing key=value metadata."""
    if kind not in _KINDS:
        raise FormatError(f"unknown container kind {kind}")
    values = np.ascontiguousarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise FormatError(f"container payload must be 2-d, got shape {values.shape}")
    rows, cols = values.shape
    header = _HEADER.pack(MAGIC, VERSION, kind, rows, cols)
    trailer = _encode_metadata(metadata or {})
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(values.astype("<f8", copy=False).tobytes())
        fh.write(trailer)


def read_container(path):
    """Read back (values, kind, metadata); rejects bad magic or version."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise TruncatedFileError(f"{path}: file shorter than container header")
    magic, version, kind, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(
            f"{path}: unsupported container version {version} (expected {VERSION})"
        )
    if kind not in _KINDS:
        raise FormatError(f"{path}: unknown container kind {kind}")
    if rows * cols > _MAX_ELEMENTS:
        raise FormatError(f"{path}: payload of {rows}x{cols} values would overflow")
    need = _HEADER.size + rows * cols * 8
    if len(raw) < need:
        raise TruncatedFileError(
            f"{path}: payload truncated ({len(raw)} bytes, need {need})"
        )
    values = np.frombuffer(raw, dtype="<f8", count=rows * cols, offset=_HEADER.size)
    values = values.reshape(rows, cols).astype(np.float64)
    metadata = _decode_metadata(raw[need:])
    return values, kind, metadata


def write_coeffs(matrix: CoefficientMatrix, path, metadata=None):
    """Serialize a coefficient matrix; provenance tags land in the trailer."""
    meta = {"basis_id": matrix.basis_id, "dataset_id": matrix.dataset_id}
    for key, value in (metadata or {}).items():
        if key in meta and str(value) != meta[key]:
            raise FormatError(f"metadata key {key!r} conflicts with matrix tags")
        meta[key] = value
    write_container(path, matrix.values, KIND_COEFFS, meta)


def read_coeffs(path) -> CoefficientMatrix:
    """Read a coefficient matrix; non-finite payload values are rejected."""
    values, kind, metadata = read_container(path)
    if kind != KIND_COEFFS:
        raise FormatError(f"{path}: container kind {kind} is not a coefficient matrix")
    return CoefficientMatrix(
        values,
        basis_id=metadata.get("basis_id", ""),
        dataset_id=metadata.get("dataset_id", ""),
    )


def write_matrix(path, values, metadata=None):
    write_container(path, values, KIND_MATRIX, metadata)


def read_matrix(path):
    values, kind, metadata = read_container(path)
    if kind != KIND_MATRIX:
        raise FormatError(f"{path}: container kind {kind} is not a plain matrix")
    return values, metadata


def write_vector(path, values, metadata=None):
    values = np.ascontiguousarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise FormatError(f"vector payload must be 1-d, got shape {values.shape}")
    write_container(path, values.reshape(-1, 1), KIND_VECTOR, metadata)


def read_vector(path):
    values, kind, metadata = read_container(path)
    if kind != KIND_VECTOR:
        raise FormatError(f"{path}: container kind {kind} is not a vector")
    return values.ravel(), metadata
