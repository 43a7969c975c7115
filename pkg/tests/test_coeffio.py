import pathlib
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridgen.coeffio import (
    KIND_COEFFS,
    KIND_MATRIX,
    KIND_VECTOR,
    MAGIC,
    VERSION,
    read_coeffs,
    read_container,
    read_matrix,
    read_vector,
    write_coeffs,
    write_matrix,
    write_vector,
)
from hybridgen.coeffs import CoefficientMatrix
from hybridgen.errors import (
    DimensionError,
    DomainError,
    FormatError,
    TruncatedFileError,
)


def test_coefficient_matrix_properties():
    m = CoefficientMatrix(np.zeros((3, 5)), basis_id="pca:10->5", dataset_id="ds")
    assert m.n == 3 and m.d == 5
    assert m.values.flags["C_CONTIGUOUS"]
    assert m.values.dtype == np.float64


def test_coefficient_matrix_rejects_nonfinite():
    vals = np.zeros((2, 2))
    vals[1, 0] = np.inf
    with pytest.raises(DomainError, match=r"row 1.*column 0|\(1, 0\)"):
        CoefficientMatrix(vals, basis_id="b", dataset_id="d")


def test_header_layout(tmp_path):
    m = CoefficientMatrix(
        np.arange(6.0).reshape(2, 3), basis_id="ica:9->3", dataset_id="xy"
    )
    path = tmp_path / "c.hgmc"
    write_coeffs(m, path)
    raw = path.read_bytes()
    magic, version, kind, rows, cols = struct.unpack("<4sHBQQ", raw[:23])
    assert magic == MAGIC == b"HGMC"
    assert version == VERSION == 1
    assert kind == KIND_COEFFS
    assert (rows, cols) == (2, 3)
    payload = np.frombuffer(raw, dtype="<f8", count=6, offset=23)
    assert np.array_equal(payload.reshape(2, 3), m.values)


def test_coeffs_roundtrip_with_metadata(tmp_path):
    rng = np.random.default_rng(0)
    m = CoefficientMatrix(
        rng.standard_normal((4, 7)), basis_id="tucker:8x8->2x2", dataset_id="demo"
    )
    path = tmp_path / "c.hgmc"
    write_coeffs(m, path, metadata={"preprocess": "logit_space"})
    back = read_coeffs(path)
    assert np.array_equal(back.values, m.values)
    assert back.basis_id == m.basis_id
    assert back.dataset_id == m.dataset_id
    values, kind, meta = read_container(path)
    assert kind == KIND_COEFFS
    assert meta["preprocess"] == "logit_space"
    assert meta["basis_id"] == m.basis_id


def test_write_coeffs_rejects_conflicting_metadata(tmp_path):
    m = CoefficientMatrix(np.zeros((1, 1)), basis_id="b", dataset_id="d")
    with pytest.raises(FormatError):
        write_coeffs(m, tmp_path / "x.hgmc", metadata={"basis_id": "other"})


def test_matrix_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    vals = rng.standard_normal((5, 2))
    path = tmp_path / "m.hgmc"
    write_matrix(path, vals, metadata={"role": "forward"})
    back, meta = read_matrix(path)
    assert np.array_equal(back, vals)
    assert meta["role"] == "forward"


def test_vector_roundtrip(tmp_path):
    vals = np.array([1.5, -2.25, 1e-300])
    path = tmp_path / "v.hgmc"
    write_vector(path, vals)
    back, meta = read_vector(path)
    assert back.shape == (3,)
    assert np.array_equal(back, vals)
    # vectors are stored as single-column matrices
    _, kind, _ = read_container(path)
    assert kind == KIND_VECTOR


def test_read_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.hgmc"
    path.write_bytes(b"NOPE" + b"\x00" * 40)
    with pytest.raises(FormatError):
        read_container(path)


def test_read_rejects_bad_version(tmp_path):
    m = CoefficientMatrix(np.zeros((1, 1)), basis_id="b", dataset_id="d")
    path = tmp_path / "v.hgmc"
    write_coeffs(m, path)
    raw = bytearray(path.read_bytes())
    raw[4:6] = struct.pack("<H", 9)
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError, match="version"):
        read_container(path)


def test_read_rejects_truncated_payload(tmp_path):
    m = CoefficientMatrix(np.ones((4, 4)), basis_id="b", dataset_id="d")
    path = tmp_path / "t.hgmc"
    write_coeffs(m, path)
    path.write_bytes(path.read_bytes()[:40])
    with pytest.raises(TruncatedFileError):
        read_container(path)


def test_read_coeffs_rejects_other_kinds(tmp_path):
    path = tmp_path / "m.hgmc"
    write_matrix(path, np.zeros((2, 2)))
    with pytest.raises(FormatError):
        read_coeffs(path)


def test_kind_codes_are_stable():
    assert (KIND_COEFFS, KIND_MATRIX, KIND_VECTOR) == (1, 2, 3)


def test_bitwise_stability(tmp_path):
    # writing the same content twice gives identical bytes
    rng = np.random.default_rng(2)
    m = CoefficientMatrix(rng.standard_normal((3, 3)), basis_id="b", dataset_id="d")
    p1, p2 = tmp_path / "a.hgmc", tmp_path / "b.hgmc"
    write_coeffs(m, p1, metadata={"k": "v"})
    write_coeffs(m, p2, metadata={"k": "v"})
    assert p1.read_bytes() == p2.read_bytes()


@settings(max_examples=30, deadline=None)
@given(
    st.integers(min_value=1, max_value=5),
    st.integers(min_value=1, max_value=5),
    st.integers(min_value=0, max_value=2**32),
)
def test_roundtrip_preserves_bits(tmp_path_factory, rows, cols, seed):
    rng = np.random.default_rng(seed)
    # mix ordinary magnitudes with tiny and huge ones
    vals = rng.standard_normal((rows, cols)) * 10.0 ** rng.integers(
        -200, 200, size=(rows, cols)
    )
    path = tmp_path_factory.mktemp("hgmc") / "r.hgmc"
    write_matrix(path, vals)
    back, _ = read_matrix(path)
    assert back.tobytes() == np.ascontiguousarray(vals).tobytes()


GOLDEN = pathlib.Path(__file__).resolve().parent / "golden"

_GOLD_VALUES = np.array(
    [
        [1.5, -0.25, 1e-300, 1e300],
        [3.141592653589793, 0.0, -0.0, 2.0 ** -52],
        [1.0, -1.0, 255.0, 6.02214076e23],
    ]
)


@pytest.mark.parametrize("name", ["primary_written.hgmc", "secondary_written.hgmc"])
def test_reads_golden_fixture_bit_exact(name):
    # one fixture written by this package, one by the trainer package;
    # both must parse to the same bits
    coeffs = read_coeffs(GOLDEN / name)
    assert coeffs.values.tobytes() == _GOLD_VALUES.tobytes()
    assert coeffs.basis_id == "ica:784->400"
    assert coeffs.dataset_id == "golden"


def test_rewrite_reproduces_golden_bytes(tmp_path):
    coeffs = read_coeffs(GOLDEN / "primary_written.hgmc")
    out = tmp_path / "again.hgmc"
    write_coeffs(coeffs, out, metadata={"note": "conformance fixture"})
    assert out.read_bytes() == (GOLDEN / "primary_written.hgmc").read_bytes()
