"""Artifact persistence: datasets, bases, and models as container directories.

Each artifact is a directory of coeffio containers (one per array) plus a
flat ``manifest.txt`` of key=value lines. Manifest keys split into two
namespaces: ``cfg.*`` holds semantic, run-reproducing configuration and is
safe to embed in reports (deterministic under fixed seeds), ``run.*``
holds volatile provenance (command line, wall-clock) that may differ
between otherwise identical runs.
"""

from __future__ import annotations

import os

import numpy as np

from .benchmark import FeatureSpec, ReferenceModel
from .coeffio import read_matrix, read_vector, write_matrix, write_vector
from .errors import FormatError, UsageError
from .gmm import DIAGONAL, FULL, GmmModel
from .ingest import DatasetTensor, RAW
from .linear import IcaBasis, IdentityBasis, PcaBasis
from .tucker import TuckerBasis

MANIFEST_NAME = "manifest.txt"


def write_manifest_at(path: str, entries: dict) -> None:
    lines = []
    for key, value in entries.items():
        text = _format_value(value)
        if "=" in key or "\n" in key or "\n" in text:
            raise UsageError(f"manifest entry {key!r} not representable")
        lines.append(f"{key}={text}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_manifest(dirpath: str, entries: dict) -> None:
    write_manifest_at(os.path.join(dirpath, MANIFEST_NAME), entries)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def read_manifest_at(path: str) -> dict:
    if not os.path.exists(path):
        raise FormatError(f"no manifest at {path}")
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh.read().splitlines():
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise FormatError(f"malformed manifest line {line!r}")
            entries[key] = value
    return entries


def read_manifest(dirpath: str) -> dict:
    return read_manifest_at(os.path.join(dirpath, MANIFEST_NAME))


def _require_kind(entries: dict, expected: str, dirpath: str) -> None:
    kind = entries.get("artifact")
    if kind != expected:
        raise FormatError(
            f"{dirpath} holds artifact {kind!r}, expected {expected!r}"
        )


def _parse_bool(text: str) -> bool:
    if text not in ("true", "false"):
        raise FormatError(f"expected boolean manifest value, got {text!r}")
    return text == "true"


def _arr(dirpath: str, name: str) -> str:
    return os.path.join(dirpath, name + ".hgmc")


def save_dataset(dirpath: str, data: DatasetTensor, extra: dict | None = None) -> None:
    os.makedirs(dirpath, exist_ok=True)
    write_matrix(
        _arr(dirpath, "data"),
        data.flat(),
        metadata={"height": str(data.height), "width": str(data.width)},
    )
    entries = {
        "artifact": "dataset",
        "cfg.n": data.n,
        "cfg.height": data.height,
        "cfg.width": data.width,
        "cfg.value_domain": data.value_domain,
        "cfg.has_stats": data.per_image_stats is not None,
    }
    if data.per_image_stats is not None:
        write_matrix(_arr(dirpath, "stats"), data.per_image_stats)
    entries.update(extra or {})
    write_manifest(dirpath, entries)


def load_dataset(dirpath: str) -> DatasetTensor:
    entries = read_manifest(dirpath)
    _require_kind(entries, "dataset", dirpath)
    flat, meta = read_matrix(_arr(dirpath, "data"))
    h, w = int(meta["height"]), int(meta["width"])
    stats = None
    if _parse_bool(entries.get("cfg.has_stats", "false")):
        stats, _ = read_matrix(_arr(dirpath, "stats"))
    return DatasetTensor(
        values=flat.reshape(-1, h, w),
        value_domain=entries.get("cfg.value_domain", RAW),
        per_image_stats=stats,
    )


def save_basis(dirpath: str, basis, extra: dict | None = None) -> None:
    os.makedirs(dirpath, exist_ok=True)
    entries = {"artifact": "basis"}
    if isinstance(basis, PcaBasis):
        entries["cfg.basis_kind"] = "pca"
        entries["cfg.dim_full"] = basis.dim_full
        entries["cfg.dim_reduced"] = basis.dim_reduced
        entries["cfg.centered"] = basis.centered
        write_vector(_arr(dirpath, "eigenvalues"), basis.eigenvalues)
        write_matrix(_arr(dirpath, "forward"), basis.forward)
        write_matrix(_arr(dirpath, "inverse"), basis.inverse)
        write_vector(_arr(dirpath, "mean"), basis.mean)
    elif isinstance(basis, IcaBasis):
        entries["cfg.basis_kind"] = "ica"
        entries["cfg.dim_full"] = basis.dim_full
        entries["cfg.dim_reduced"] = basis.dim_reduced
        entries["cfg.iterations_used"] = basis.iterations_used
        entries["cfg.converged"] = basis.converged
        write_matrix(_arr(dirpath, "whitening"), basis.whitening)
        write_matrix(_arr(dirpath, "unmixing"), basis.unmixing)
        write_matrix(_arr(dirpath, "mixing"), basis.mixing)
        write_vector(_arr(dirpath, "mean"), basis.mean)
    elif isinstance(basis, TuckerBasis):
        entries["cfg.basis_kind"] = "tucker"
        entries["cfg.dims"] = ",".join(str(v) for v in basis.dims)
        entries["cfg.ranks"] = ",".join(str(v) for v in basis.ranks)
        write_matrix(_arr(dirpath, "factor_row"), basis.factor_row)
        write_matrix(_arr(dirpath, "factor_col"), basis.factor_col)
    elif isinstance(basis, IdentityBasis):
        entries["cfg.basis_kind"] = "identity"
        entries["cfg.dim_full"] = basis.dim_full
    else:
        raise UsageError(f"cannot serialize basis of type {type(basis).__name__}")
    entries.update(extra or {})
    write_manifest(dirpath, entries)


def load_basis(dirpath: str):
    entries = read_manifest(dirpath)
    _require_kind(entries, "basis", dirpath)
    kind = entries.get("cfg.basis_kind")
    if kind == "pca":
        eigenvalues, _ = read_vector(_arr(dirpath, "eigenvalues"))
        forward, _ = read_matrix(_arr(dirpath, "forward"))
        inverse, _ = read_matrix(_arr(dirpath, "inverse"))
        mean, _ = read_vector(_arr(dirpath, "mean"))
        return PcaBasis(
            dim_full=int(entries["cfg.dim_full"]),
            dim_reduced=int(entries["cfg.dim_reduced"]),
            eigenvalues=eigenvalues,
            forward=forward,
            inverse=inverse,
            centered=_parse_bool(entries["cfg.centered"]),
            mean=mean,
        )
    if kind == "ica":
        whitening, _ = read_matrix(_arr(dirpath, "whitening"))
        unmixing, _ = read_matrix(_arr(dirpath, "unmixing"))
        mixing, _ = read_matrix(_arr(dirpath, "mixing"))
        mean, _ = read_vector(_arr(dirpath, "mean"))
        return IcaBasis(
            dim_full=int(entries["cfg.dim_full"]),
            dim_reduced=int(entries["cfg.dim_reduced"]),
            whitening=whitening,
            unmixing=unmixing,
            mixing=mixing,
            mean=mean,
            iterations_used=int(entries["cfg.iterations_used"]),
            converged=_parse_bool(entries["cfg.converged"]),
        )
    if kind == "tucker":
        dims = tuple(int(v) for v in entries["cfg.dims"].split(","))
        ranks = tuple(int(v) for v in entries["cfg.ranks"].split(","))
        factor_row, _ = read_matrix(_arr(dirpath, "factor_row"))
        factor_col, _ = read_matrix(_arr(dirpath, "factor_col"))
        # the sample-mode factor is not persisted; it has no role in
        # projecting or reconstructing unseen images
        return TuckerBasis(
            dims=dims,
            ranks=ranks,
            factor_row=factor_row,
            factor_col=factor_col,
            mode1_used=False,
        )
    if kind == "identity":
        return IdentityBasis(dim_full=int(entries["cfg.dim_full"]))
    raise FormatError(f"unknown basis kind {kind!r} in {dirpath}")


def save_gmm(dirpath: str, model: GmmModel, extra: dict | None = None) -> None:
    os.makedirs(dirpath, exist_ok=True)
    write_vector(_arr(dirpath, "weights"), model.weights)
    write_matrix(_arr(dirpath, "means"), model.means)
    if model.covariance_type == DIAGONAL:
        write_matrix(_arr(dirpath, "covariances"), model.covariances)
    else:
        write_matrix(
            _arr(dirpath, "covariances"),
            model.covariances.reshape(model.k * model.dim, model.dim),
        )
    if model.fit_log:
        write_vector(_arr(dirpath, "fit_log"), np.asarray(model.fit_log))
    entries = {
        "artifact": "gmm",
        "cfg.k": model.k,
        "cfg.dim": model.dim,
        "cfg.covariance_type": model.covariance_type,
        "cfg.reg": float(model.reg),
        "cfg.has_fit_log": bool(model.fit_log),
    }
    entries.update(extra or {})
    write_manifest(dirpath, entries)


def load_gmm(dirpath: str) -> GmmModel:
    entries = read_manifest(dirpath)
    _require_kind(entries, "gmm", dirpath)
    return _load_gmm_from_entries(dirpath, entries)


def save_reference(dirpath: str, ref: ReferenceModel, extra: dict | None = None) -> None:
    entries = {
        "artifact": "reference",
        "cfg.height": ref.feature_spec.height,
        "cfg.width": ref.feature_spec.width,
        "cfg.subband_order": ",".join(ref.feature_spec.subband_order),
        "cfg.dataset_id": ref.dataset_id,
    }
    entries.update(extra or {})
    save_gmm(dirpath, ref.gmm, extra=entries)
    # save_gmm stamps artifact=gmm first; rewrite with the reference kind
    merged = read_manifest(dirpath)
    merged["artifact"] = "reference"
    write_manifest(dirpath, merged)


def load_reference(dirpath: str) -> ReferenceModel:
    entries = read_manifest(dirpath)
    _require_kind(entries, "reference", dirpath)
    spec = FeatureSpec(
        height=int(entries["cfg.height"]),
        width=int(entries["cfg.width"]),
        subband_order=tuple(entries["cfg.subband_order"].split(",")),
    )
    gmm = _load_gmm_from_entries(dirpath, entries)
    return ReferenceModel(
        gmm=gmm, feature_spec=spec, dataset_id=entries.get("cfg.dataset_id", "")
    )


def _load_gmm_from_entries(dirpath: str, entries: dict) -> GmmModel:
    k = int(entries["cfg.k"])
    dim = int(entries["cfg.dim"])
    covariance_type = entries["cfg.covariance_type"]
    weights, _ = read_vector(_arr(dirpath, "weights"))
    means, _ = read_matrix(_arr(dirpath, "means"))
    covariances, _ = read_matrix(_arr(dirpath, "covariances"))
    if covariance_type == FULL:
        covariances = covariances.reshape(k, dim, dim)
    fit_log = []
    if _parse_bool(entries.get("cfg.has_fit_log", "false")):
        trace, _ = read_vector(_arr(dirpath, "fit_log"))
        fit_log = trace.tolist()
    return GmmModel(
        k=k,
        dim=dim,
        weights=weights,
        means=means,
        covariances=covariances,
        covariance_type=covariance_type,
        reg=float(entries["cfg.reg"]),
        fit_log=fit_log,
    )
