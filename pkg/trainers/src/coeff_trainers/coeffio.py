"""Reader/writer for the coefficient container format (version 1).

This implements the interchange format independently so the trainers have
no code dependency on the pipeline package. Layout, all integers
little-endian:

    bytes 0..3    magic ``HGMC``
    bytes 4..5    version, u16
    byte  6       kind: 1 = coefficient matrix, 2 = matrix, 3 = vector
    bytes 7..14   rows, u64
    bytes 15..22  cols, u64
    payload       rows * cols float64 values, row-major, little-endian
    trailer       UTF-8 ``key=value`` lines, one per key

The trailer is plain text, one key per line, keys unique, no ``=`` or
newline in keys, no newline in values.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FileFormatError, TruncatedFileError

MAGIC = b"HGMC"
VERSION = 1

KIND_COEFFS = 1
KIND_MATRIX = 2
KIND_VECTOR = 3
_KINDS = (KIND_COEFFS, KIND_MATRIX, KIND_VECTOR)

_HEADER = struct.Struct("<4sHBQQ")
_MAX_ELEMENTS = (2**63 - 1) // 8


def _pack_trailer(metadata) -> bytes:
    parts = []
    for key, value in (metadata or {}).items():
        key, value = str(key), str(value)
        if not key or "=" in key or "\n" in key:
            raise FileFormatError(f"invalid metadata key {key!r}")
        if "\n" in value:
            raise FileFormatError(f"metadata value for {key!r} contains a newline")
        parts.append(f"{key}={value}\n")
    return "".join(parts).encode("utf-8")


def _unpack_trailer(blob: bytes) -> dict:
    try:
        text = blob.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FileFormatError(f"metadata trailer is not UTF-8: {exc}") from None
    metadata = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line:
            continue
        if "=" not in line:
            raise FileFormatError(f"metadata line {lineno} has no '=': {line!r}")
        key, value = line.split("=", 1)
        if key in metadata:
            raise FileFormatError(f"duplicate metadata key {key!r}")
        metadata[key] = value
    return metadata


def write_container(path, values, kind=KIND_COEFFS, metadata=None):
    if kind not in _KINDS:
        raise FileFormatError(f"unknown container kind {kind}")
    values = np.ascontiguousarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise FileFormatError(f"payload must be 2-d, got shape {values.shape}")
    rows, cols = values.shape
    if rows * cols > _MAX_ELEMENTS:
        raise FileFormatError(f"{rows}x{cols} payload would overflow the format")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, kind, rows, cols))
        fh.write(values.astype("<f8", copy=False).tobytes())
        fh.write(_pack_trailer(metadata))


def read_container(path):
    """Return (values, kind, metadata); values are float64 rows x cols."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise TruncatedFileError(f"{path}: shorter than the container header")
    magic, version, kind, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FileFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FileFormatError(f"{path}: unsupported version {version}")
    if kind not in _KINDS:
        raise FileFormatError(f"{path}: unknown kind {kind}")
    if rows * cols > _MAX_ELEMENTS:
        raise FileFormatError(f"{path}: {rows}x{cols} payload would overflow")
    need = _HEADER.size + rows * cols * 8
    if len(raw) < need:
        raise TruncatedFileError(f"{path}: payload truncated")
    values = np.frombuffer(raw, dtype="<f8", count=rows * cols, offset=_HEADER.size)
    return values.reshape(rows, cols).copy(), kind, _unpack_trailer(raw[need:])


def read_coefficients(path):
    """Read a kind-1 container; returns (values, metadata)."""
    values, kind, metadata = read_container(path)
    if kind != KIND_COEFFS:
        raise FileFormatError(f"{path}: kind {kind} is not a coefficient matrix")
    return values, metadata


def write_coefficients(path, values, metadata=None):
    write_container(path, values, KIND_COEFFS, metadata)
