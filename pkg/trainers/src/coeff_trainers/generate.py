"""Sampling from trained checkpoints into coefficient containers."""

from __future__ import annotations

import numpy as np

from . import flow as flow_mod
from . import gan as gan_mod
from .checkpoint import load_checkpoint
from .coeffio import write_coefficients
from .errors import ConfigError


def generate(checkpoint_dir, n, seed, output_path):
    """Draw n rows from a checkpoint and write them as a coefficient file.

    Metadata carries the model kind and sampling seed, plus whatever
    basis/dataset tags the training run recorded. n=0 yields a valid
    empty container.
    """
    if n < 0:
        raise ConfigError("sample count must be nonnegative")
    payload, manifest = load_checkpoint(checkpoint_dir)
    kind = manifest.get("kind", payload.get("kind", ""))
    d = int(payload["d"])
    if n == 0:
        values = np.zeros((0, d))
    elif kind == "gan":
        values = gan_mod.sample_generator(payload, n, seed)
    elif kind == "nf":
        values = flow_mod.sample_flow(payload, n, seed)
    else:
        raise ConfigError(f"{checkpoint_dir}: unknown checkpoint kind {kind!r}")
    metadata = {}
    for key in ("basis_id", "dataset_id"):
        if key in manifest:
            metadata[key] = manifest[key]
    metadata["model"] = kind
    metadata["seed"] = str(seed)
    write_coefficients(output_path, values, metadata)
    return values
