"""Pipeline command line: ingest through evaluate with run manifests.

Each subcommand reads/writes artifact directories (datasets, bases, models)
or single coefficient containers, and drops a manifest next to every output
so a run can be reproduced from its artifacts alone. Manifest keys under
``cfg.`` are deterministic given the seeds; keys under ``run.`` (argv,
wall clock, timestamps) are allowed to differ between runs. Reports embed
only the ``cfg.`` side, which is what makes repeated fixed-seed pipelines
byte-identical.

Config files are flat key=value text where keys are the long flag names
(hyphens or underscores); command-line flags override file values.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .benchmark import (
    NllCurveConfig,
    build_reference,
    evaluate,
    nll_curves,
    write_nll_csv,
    write_report,
)
from .coeffio import read_coeffs, read_container, write_coeffs
from .errors import HybridgenError, UsageError
from .gmm import DIAGONAL, FULL, fit_em, gmm_sample
from .ingest import (
    DatasetTensor,
    LOGIT_SPACE,
    PreprocessConfig,
    RAW,
    XgcSurrogateConfig,
    ZSCORED,
    load_idx,
    logit_map,
    sigmoid_unmap,
    synth_xgc,
    zscore_per_image,
    zscore_restore,
)
from .kde import SCOTT, fit_kde
from .linear import (
    IcaOptions,
    fit_fastica,
    fit_identity_basis,
    fit_pca,
    pca_project,
)
from .store import (
    load_basis,
    load_dataset,
    load_reference,
    read_manifest,
    save_basis,
    save_dataset,
    save_gmm,
    save_reference,
    load_gmm,
    write_manifest_at,
)
from .tucker import hosvd


def _config_hash(cfg: dict) -> str:
    blob = "\n".join(f"{k}={cfg[k]}" for k in sorted(cfg))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _manifest(command: str, cfg: dict, t0: float) -> dict:
    entries = {f"cfg.{k}": v for k, v in cfg.items()}
    entries["cfg.tool_version"] = __version__
    entries["cfg.config_hash"] = _config_hash(
        {k: v for k, v in entries.items() if k.startswith("cfg.")}
    )
    entries["run.command"] = command
    entries["run.argv"] = " ".join(sys.argv[1:])
    entries["run.wall_clock_s"] = f"{time.monotonic() - t0:.3f}"
    entries["run.created"] = datetime.now(timezone.utc).isoformat()
    return entries


def _cfg_of(dirpath: str) -> dict:
    """The deterministic manifest entries of an input artifact."""
    return {k: v for k, v in read_manifest(dirpath).items() if k.startswith("cfg.")}


def _preprocess(data: DatasetTensor, mode: str, epsilon: float, beta: float):
    if mode == "logit":
        return logit_map(data, PreprocessConfig(epsilon=epsilon, beta=beta, mode=mode))
    if mode == "zscore":
        return zscore_per_image(data)
    if mode == "none":
        return data
    raise UsageError(f"unknown preprocess mode {mode!r}")


def cmd_ingest(args) -> int:
    t0 = time.monotonic()
    data = load_idx(args.input)
    dataset_id = args.dataset_id or os.path.basename(args.input)
    out = _preprocess(data, args.mode, args.epsilon, args.beta)
    cfg = {
        "command": "ingest",
        "dataset_id": dataset_id,
        "mode": args.mode,
        "epsilon": args.epsilon,
        "beta": args.beta,
    }
    save_dataset(args.output, out, extra=_manifest("ingest", cfg, t0))
    print(f"ingest: {out.n} images {out.height}x{out.width} -> {args.output}")
    return 0


def cmd_synth_xgc(args) -> int:
    t0 = time.monotonic()
    sc = XgcSurrogateConfig(
        n_nodes=args.nodes,
        height=args.height,
        width=args.width,
        components_per_node=(args.components_min, args.components_max),
        seed=args.seed,
        range_scale=(args.scale_min, args.scale_max),
    )
    data = synth_xgc(sc)
    dataset_id = args.dataset_id or f"xgc-surrogate-{args.nodes}"
    out = _preprocess(data, args.mode, 0.001, 1.0)
    cfg = {
        "command": "synth-xgc",
        "dataset_id": dataset_id,
        "nodes": args.nodes,
        "height": args.height,
        "width": args.width,
        "seed": args.seed,
        "mode": args.mode,
    }
    save_dataset(args.output, out, extra=_manifest("synth-xgc", cfg, t0))
    print(f"synth-xgc: {out.n} surrogate images -> {args.output}")
    return 0


def _dataset_id_of(dirpath: str) -> str:
    return read_manifest(dirpath).get("cfg.dataset_id", "")


def cmd_fit_basis(args) -> int:
    t0 = time.monotonic()
    data = load_dataset(args.data)
    cfg = {
        "command": "fit-basis",
        "basis_kind": args.kind,
        "dataset_id": _dataset_id_of(args.data),
        "height": data.height,
        "width": data.width,
    }
    if args.kind == "pca":
        if args.d is None:
            raise UsageError("pca requires --d")
        basis = fit_pca(data.flat(), d=args.d, centered=args.centered)
        cfg.update(d=args.d, centered=args.centered)
    elif args.kind == "ica":
        if args.d is None:
            raise UsageError("ica requires --d")
        opts = IcaOptions(
            nonlinearity=args.contrast,
            tolerance=args.tol,
            max_iterations=args.max_iter,
            seed=args.seed,
        )
        basis = fit_fastica(data.flat(), d=args.d, opts=opts)
        cfg.update(
            d=args.d,
            contrast=args.contrast,
            tol=args.tol,
            max_iter=args.max_iter,
            seed=args.seed,
        )
        if not basis.converged:
            print(
                f"fit-basis: warning: ICA hit the iteration cap "
                f"({basis.iterations_used}) without converging",
                file=sys.stderr,
            )
    elif args.kind == "tucker":
        if not args.ranks:
            raise UsageError("tucker requires --ranks r2,r3")
        parts = [int(v) for v in args.ranks.split(",")]
        if len(parts) != 2:
            raise UsageError("--ranks expects two comma-separated integers")
        basis, _ = hosvd(data.values, ranks=(data.n, parts[0], parts[1]))
        cfg.update(spatial_ranks=args.ranks)
    elif args.kind == "identity":
        basis = fit_identity_basis(data.height * data.width)
    else:
        raise UsageError(f"unknown basis kind {args.kind!r}")
    save_basis(args.output, basis, extra=_manifest("fit-basis", cfg, t0))
    print(f"fit-basis: {basis.basis_id} -> {args.output}")
    return 0


def cmd_project(args) -> int:
    t0 = time.monotonic()
    data = load_dataset(args.data)
    dataset_id = _dataset_id_of(args.data)
    basis = load_basis(args.basis)
    if type(basis).__name__ == "TuckerBasis":
        coeffs = basis.project(data.values, dataset_id=dataset_id)
    else:
        coeffs = basis.project(data.flat(), dataset_id=dataset_id)
    meta = {"preprocess": data.value_domain}
    write_coeffs(coeffs, args.output, metadata=meta)
    cfg = {
        "command": "project",
        "basis_id": coeffs.basis_id,
        "dataset_id": dataset_id,
        "n": coeffs.n,
        "d": coeffs.d,
        "preprocess": data.value_domain,
    }
    write_manifest_at(args.output + ".manifest.txt", _manifest("project", cfg, t0))
    print(f"project: {coeffs.n}x{coeffs.d} coefficients -> {args.output}")
    return 0


def cmd_fit_gmm(args) -> int:
    t0 = time.monotonic()
    coeffs = read_coeffs(args.coeffs)
    covariance = args.covariance
    if covariance == "auto":
        covariance = FULL if coeffs.n > 10 * coeffs.d * args.k else DIAGONAL
    model = fit_em(
        coeffs,
        k=args.k,
        covariance_type=covariance,
        reg=args.reg,
        seed=args.seed,
        max_iter=args.max_iter,
        tol=args.tol,
    )
    cfg = {
        "command": "fit-gmm",
        "k": args.k,
        "covariance": covariance,
        "covariance_flag": args.covariance,
        "seed": args.seed,
        "max_iter": args.max_iter,
        "tol": args.tol,
        "source_basis_id": coeffs.basis_id,
        "source_dataset_id": coeffs.dataset_id,
        "source_preprocess": read_coeffs_meta(args.coeffs).get("preprocess", ""),
    }
    if args.reg is not None:
        cfg["reg"] = args.reg
    save_gmm(args.output, model, extra=_manifest("fit-gmm", cfg, t0))
    print(
        f"fit-gmm: K={args.k} {covariance} over d={coeffs.d}, "
        f"{len(model.fit_log)} EM iterations -> {args.output}"
    )
    return 0


def read_coeffs_meta(path: str) -> dict:
    _, _, meta = read_container(path)
    return meta


def cmd_sample(args) -> int:
    t0 = time.monotonic()
    model = load_gmm(args.model)
    manifest = read_manifest(args.model)
    coeffs = gmm_sample(model, n=args.n, seed=args.seed)
    coeffs.basis_id = manifest.get("cfg.source_basis_id", "")
    coeffs.dataset_id = manifest.get("cfg.source_dataset_id", "")
    meta = {
        "model_id": f"gmm:k={model.k}:d={model.dim}:{model.covariance_type}",
        "preprocess": manifest.get("cfg.source_preprocess", ""),
        "seed": str(args.seed),
    }
    write_coeffs(coeffs, args.output, metadata=meta)
    cfg = {
        "command": "sample",
        "n": args.n,
        "seed": args.seed,
        "model_id": meta["model_id"],
        "basis_id": coeffs.basis_id,
        "dataset_id": coeffs.dataset_id,
    }
    write_manifest_at(args.output + ".manifest.txt", _manifest("sample", cfg, t0))
    print(f"sample: {args.n} draws from {meta['model_id']} -> {args.output}")
    return 0


def cmd_reconstruct(args) -> int:
    t0 = time.monotonic()
    coeffs = read_coeffs(args.coeffs)
    meta = read_coeffs_meta(args.coeffs)
    basis = load_basis(args.basis)
    x = basis.reconstruct(coeffs)
    bman = read_manifest(args.basis)
    if x.ndim == 2:
        h = int(bman.get("cfg.height", 0)) or args.height
        w = int(bman.get("cfg.width", 0)) or args.width
        if not h or not w:
            side = int(round(x.shape[1] ** 0.5))
            if side * side != x.shape[1]:
                raise UsageError(
                    "image dims unknown; pass --height/--width for non-square data"
                )
            h = w = side
        x = x.reshape(-1, h, w)
    if args.postprocess == "sigmoid":
        interim = DatasetTensor(x, LOGIT_SPACE)
        out = sigmoid_unmap(
            interim, PreprocessConfig(epsilon=args.epsilon, beta=args.beta, mode="logit")
        )
    elif args.postprocess == "zscore":
        if not args.stats_from:
            raise UsageError("zscore postprocess requires --stats-from")
        ref = load_dataset(args.stats_from)
        if ref.per_image_stats is None:
            raise UsageError(f"{args.stats_from} carries no per-image stats")
        if ref.n != x.shape[0]:
            raise UsageError(
                f"stats rows ({ref.n}) != reconstructed images ({x.shape[0]})"
            )
        interim = DatasetTensor(x, ZSCORED, per_image_stats=ref.per_image_stats)
        out = zscore_restore(interim)
    elif args.postprocess == "none":
        out = DatasetTensor(x, RAW)
    else:
        raise UsageError(f"unknown postprocess {args.postprocess!r}")
    cfg = {
        "command": "reconstruct",
        "basis_id": coeffs.basis_id,
        "dataset_id": coeffs.dataset_id,
        "model_id": meta.get("model_id", ""),
        "postprocess": args.postprocess,
        "n": out.n,
    }
    save_dataset(args.output, out, extra=_manifest("reconstruct", cfg, t0))
    print(f"reconstruct: {out.n} images {out.height}x{out.width} -> {args.output}")
    return 0


def cmd_evaluate(args) -> int:
    t0 = time.monotonic()
    real = load_dataset(args.real)
    real_id = _dataset_id_of(args.real)
    generated = load_dataset(args.generated)
    gen_manifest = read_manifest(args.generated)
    if args.reference:
        ref = load_reference(args.reference)
        ref_cfg = {"reference": "loaded", **_cfg_of(args.reference)}
    else:
        covariance = args.ref_covariance
        if covariance == "auto":
            d = 3 * ((real.height + 5) // 2) * ((real.width + 5) // 2)
            covariance = FULL if real.n > 10 * d * args.ref_k else DIAGONAL
        ref = build_reference(
            real,
            k=args.ref_k,
            covariance_type=covariance,
            seed=args.ref_seed,
            dataset_id=real_id,
        )
        ref_cfg = {
            "reference": "built",
            "reference_seed": args.ref_seed,
            "reference_covariance_flag": args.ref_covariance,
        }
        if args.save_reference:
            save_reference(
                args.save_reference,
                ref,
                extra=_manifest(
                    "evaluate",
                    {
                        "command": "evaluate/build-reference",
                        "k": args.ref_k,
                        "covariance": covariance,
                        "seed": args.ref_seed,
                        "dataset_id": real_id,
                    },
                    t0,
                ),
            )
    kde_map = None
    extra = dict(ref_cfg)
    extra["kde_space"] = args.kde_space
    if args.kde_space == "pca":
        pca = fit_pca(real.flat(), d=args.kde_dim, centered=False)
        kde_ref = fit_kde(pca_project(pca, real.flat()).values, rule=args.kde_rule)
        kde_map = lambda m: pca_project(pca, m).values
        extra["kde_reduce_dim"] = args.kde_dim
    elif args.kde_space == "pixel":
        kde_ref = fit_kde(real.flat(), rule=args.kde_rule)
    else:
        raise UsageError(f"unknown kde space {args.kde_space!r}")
    curve_cfg = NllCurveConfig(
        interval_rule=args.interval,
        lo=args.lo,
        hi=args.hi,
        grid_points=args.grid_points,
    )
    model_id = args.model_id or gen_manifest.get("cfg.model_id", "")
    basis_id = args.basis_id or gen_manifest.get("cfg.basis_id", "")
    for prefix, dirpath in (("input_real", args.real), ("input_generated", args.generated)):
        for k, v in _cfg_of(dirpath).items():
            extra[f"{prefix}.{k}"] = v
    report = evaluate(
        ref,
        kde_ref,
        real,
        generated,
        cfg=curve_cfg,
        model_id=model_id,
        basis_id=basis_id,
        kde_map=kde_map,
        extra_config=extra,
    )
    write_report(report, args.output)
    write_nll_csv(report, _sibling(args.output, "_nll.csv"))
    cfg = {
        "command": "evaluate",
        "model_id": model_id,
        "basis_id": basis_id,
        "dataset_id": ref.dataset_id,
    }
    write_manifest_at(args.output + ".manifest.txt", _manifest("evaluate", cfg, t0))
    print(
        f"evaluate: DWT-E {report.dwt_entropy:.4f}  KDE-E {report.kde_entropy:.4f}  "
        f"l1(scaled) {report.l1_distance_scaled:.4f} -> {args.output}"
    )
    return 0


def _sibling(path: str, suffix: str) -> str:
    root, _ = os.path.splitext(path)
    return root + suffix


def cmd_plot(args) -> int:
    t0 = time.monotonic()
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    nll_real, nll_gen = [], []
    with open(args.nll, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("index,"):
            raise UsageError(f"{args.nll} is not an evaluate NLL csv")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if len(parts) >= 2 and parts[1]:
                nll_real.append(float(parts[1]))
            if len(parts) >= 3 and parts[2]:
                nll_gen.append(float(parts[2]))
    cfg = NllCurveConfig(
        interval_rule=args.interval, lo=args.lo, hi=args.hi, grid_points=args.grid_points
    )
    grid, f_real, f_gen = nll_curves(np.asarray(nll_real), np.asarray(nll_gen), cfg)
    csv_path = args.output + ".csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("nll,f_real,f_generated\n")
        for g, fr, fg in zip(grid, f_real, f_gen):
            fh.write(f"{float(g)!r},{float(fr)!r},{float(fg)!r}\n")
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(grid, f_real, label="real")
    ax.plot(grid, f_gen, label="generated")
    ax.set_xlabel("NLL")
    ax.set_ylabel("density")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.output + ".svg")
    plt.close(fig)
    write_manifest_at(
        args.output + ".manifest.txt",
        _manifest("plot", {"command": "plot", "nll": os.path.basename(args.nll)}, t0),
    )
    print(f"plot: {args.output}.svg and {csv_path}")
    return 0


def cmd_sweep_d(args) -> int:
    t0 = time.monotonic()
    data = load_dataset(args.data)
    flat = data.flat()
    if args.d_list:
        d_values = [int(v) for v in args.d_list.split(",")]
    else:
        d_values = list(range(args.d_min, args.d_max + 1, args.d_step))
    if not d_values:
        raise UsageError("empty d sweep")
    rows = []
    for d in sorted(set(d_values)):
        if args.kind == "pca":
            basis = fit_pca(flat, d=d, centered=args.centered)
            recon = basis.reconstruct(basis.project(flat))
            err = float(np.mean(np.linalg.norm(flat - recon, axis=1)))
            rows.append((d, err))
        elif args.kind == "tucker":
            if d > min(data.height, data.width):
                raise UsageError(
                    f"tucker sweep rank {d} exceeds image side "
                    f"{min(data.height, data.width)}"
                )
            basis, _ = hosvd(data.values, ranks=(data.n, d, d))
            recon = basis.reconstruct(basis.project(data.values))
            err = float(
                np.mean(np.linalg.norm((data.values - recon).reshape(data.n, -1), axis=1))
            )
            rows.append((d * d, err))
        else:
            raise UsageError(f"unknown sweep kind {args.kind!r}")
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        fh.write("d,mean_l2_error\n")
        for d, err in rows:
            fh.write(f"{d},{err!r}\n")
    selected = ""
    if args.threshold is not None:
        eligible = [d for d, err in rows if err <= args.threshold]
        if eligible:
            selected = str(min(eligible))
            print(f"sweep-d: smallest d meeting threshold {args.threshold}: {selected}")
        else:
            print(f"sweep-d: no d in sweep meets threshold {args.threshold}")
    cfg = {
        "command": "sweep-d",
        "kind": args.kind,
        "d_values": ",".join(str(d) for d, _ in rows),
        "threshold": "" if args.threshold is None else args.threshold,
        "selected_d": selected,
        "dataset_id": _dataset_id_of(args.data),
    }
    write_manifest_at(args.output + ".manifest.txt", _manifest("sweep-d", cfg, t0))
    print(f"sweep-d: {len(rows)} points -> {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridgen",
        description="Generative modeling of 2D datasets in representation-basis "
        "coefficient space, with a wavelet-entropy benchmark.",
    )
    parser.add_argument("--config", help="flat key=value config file", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load an IDX image file and preprocess it")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--mode", choices=["logit", "zscore", "none"], default="logit")
    p.add_argument("--epsilon", type=float, default=0.001)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--dataset-id", default="")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth-xgc", help="generate the XGC-style surrogate dataset")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--height", type=int, default=32)
    p.add_argument("--width", type=int, default=32)
    p.add_argument("--components-min", type=int, default=2)
    p.add_argument("--components-max", type=int, default=5)
    p.add_argument("--scale-min", type=float, default=1.0)
    p.add_argument("--scale-max", type=float, default=100.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=["zscore", "none"], default="zscore")
    p.add_argument("--dataset-id", default="")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_synth_xgc)

    p = sub.add_parser("fit-basis", help="fit a representation basis")
    p.add_argument("--kind", choices=["pca", "ica", "tucker", "identity"], required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--ranks", default="", help="tucker spatial ranks r2,r3")
    p.add_argument("--centered", action="store_true")
    p.add_argument("--contrast", choices=["logcosh", "cube"], default="logcosh")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_fit_basis)

    p = sub.add_parser("project", help="project a dataset into a fitted basis")
    p.add_argument("--data", required=True)
    p.add_argument("--basis", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("fit-gmm", help="fit a GMM to a coefficient file")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--covariance", choices=["full", "diagonal", "auto"], default="auto")
    p.add_argument("--reg", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_fit_gmm)

    p = sub.add_parser("sample", help="sample coefficients from a fitted GMM")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("reconstruct", help="invert coefficients back to images")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--basis", required=True)
    p.add_argument("--postprocess", choices=["sigmoid", "zscore", "none"], default="none")
    p.add_argument("--epsilon", type=float, default=0.001)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--stats-from", default="")
    p.add_argument("--height", type=int, default=0)
    p.add_argument("--width", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("evaluate", help="score generated images against real ones")
    p.add_argument("--real", required=True)
    p.add_argument("--generated", required=True)
    p.add_argument("--reference", default="")
    p.add_argument("--ref-k", type=int, default=10)
    p.add_argument(
        "--ref-covariance", choices=["full", "diagonal", "auto"], default="diagonal"
    )
    p.add_argument("--ref-seed", type=int, default=0)
    p.add_argument("--save-reference", default="")
    p.add_argument("--kde-space", choices=["pixel", "pca"], default="pixel")
    p.add_argument("--kde-dim", type=int, default=50)
    p.add_argument("--kde-rule", choices=["scott", "silverman"], default=SCOTT)
    p.add_argument("--interval", choices=["percentile", "fixed"], default="percentile")
    p.add_argument("--lo", type=float, default=1.0)
    p.add_argument("--hi", type=float, default=99.0)
    p.add_argument("--grid-points", type=int, default=512)
    p.add_argument("--model-id", default="")
    p.add_argument("--basis-id", default="")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("plot", help="render NLL density curves to SVG and CSV")
    p.add_argument("--nll", required=True, help="the _nll.csv written by evaluate")
    p.add_argument("--interval", choices=["percentile", "fixed"], default="percentile")
    p.add_argument("--lo", type=float, default=1.0)
    p.add_argument("--hi", type=float, default=99.0)
    p.add_argument("--grid-points", type=int, default=512)
    p.add_argument("--output", required=True, help="output path prefix")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("sweep-d", help="reconstruction-error sweep over dimensions")
    p.add_argument("--data", required=True)
    p.add_argument("--kind", choices=["pca", "tucker"], default="pca")
    p.add_argument("--d-list", default="")
    p.add_argument("--d-min", type=int, default=1)
    p.add_argument("--d-max", type=int, default=16)
    p.add_argument("--d-step", type=int, default=1)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--centered", action="store_true")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_sweep_d)

    return parser


def _load_config_file(path: str) -> dict:
    if not os.path.exists(path):
        raise UsageError(f"config file not found: {path}")
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh.read().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"malformed config line {line!r}")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(parser: argparse.ArgumentParser, argv: list, config: dict) -> None:
    """Install config values as subcommand defaults (flags still win)."""
    sub_actions = [
        a for a in parser._actions if isinstance(a, argparse._SubParsersAction)
    ]
    if not sub_actions:
        return
    names = set(sub_actions[0].choices)
    chosen = next((tok for tok in argv if tok in names), None)
    if chosen is None:
        return
    subparser = sub_actions[0].choices[chosen]
    for action in subparser._actions:
        if action.dest in config:
            raw = config[action.dest]
            if isinstance(action, argparse._StoreTrueAction):
                action.default = raw in ("true", "1", "yes")
            elif action.type is not None:
                action.default = action.type(raw)
            else:
                action.default = raw
            action.required = False


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if "--config" in argv:
            idx = argv.index("--config")
            if idx + 1 >= len(argv):
                raise UsageError("--config requires a file path")
            _apply_config(parser, argv, _load_config_file(argv[idx + 1]))
        args = parser.parse_args(argv)
        return args.func(args)
    except HybridgenError as exc:
        print(f"hybridgen: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"hybridgen: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
