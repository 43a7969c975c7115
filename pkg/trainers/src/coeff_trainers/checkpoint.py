"""Checkpoint directories: weights.pt plus a plain-text manifest."""

from __future__ import annotations

import os

import torch

from .errors import FileFormatError

MANIFEST_NAME = "manifest.txt"
WEIGHTS_NAME = "weights.pt"


def write_manifest(dirpath, entries: dict):
    lines = [f"{k}={v}" for k, v in sorted(entries.items())]
    with open(os.path.join(dirpath, MANIFEST_NAME), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_manifest(dirpath) -> dict:
    path = os.path.join(dirpath, MANIFEST_NAME)
    if not os.path.exists(path):
        raise FileFormatError(f"{dirpath}: no checkpoint manifest")
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line:
                key, value = line.split("=", 1)
                entries[key] = value
    return entries


def save_checkpoint(dirpath, payload: dict, manifest: dict):
    os.makedirs(dirpath, exist_ok=True)
    torch.save(payload, os.path.join(dirpath, WEIGHTS_NAME))
    write_manifest(dirpath, manifest)


def load_checkpoint(dirpath):
    """Return (payload, manifest)."""
    manifest = read_manifest(dirpath)
    weights = os.path.join(dirpath, WEIGHTS_NAME)
    if not os.path.exists(weights):
        raise FileFormatError(f"{dirpath}: missing {WEIGHTS_NAME}")
    payload = torch.load(weights, map_location="cpu", weights_only=False)
    return payload, manifest
