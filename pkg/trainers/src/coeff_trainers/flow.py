"""Normalizing flow with exact log-density.

Affine coupling layers in the RealNVP mold plus one global
elementwise affine bijector, standard normal base. Couplings
zero-initialize their final layer, so a fresh flow is the identity
map and its logpdf coincides with the base distribution.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .checkpoint import load_checkpoint, save_checkpoint
from .coeffio import read_coefficients
from .errors import ConfigError, TrainingError

_HALF_LOG_TWO_PI = 0.9189385332046727


@dataclass
class NfConfig:
    num_layers: int = 4
    hidden_width: int = 50
    learning_rate: float = 1e-3
    batch_size: int = 128
    epochs: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.num_layers < 1:
            raise ConfigError("num_layers must be at least 1")
        if self.hidden_width < 1:
            raise ConfigError("hidden_width must be at least 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1")
        if self.epochs < 1:
            raise ConfigError("epochs must be at least 1")


class AffineElementwise(nn.Module):
    """Global affine map, generative direction x = z * exp(log_scale) + shift."""

    def __init__(self, dim):
        super().__init__()
        self.log_scale = nn.Parameter(torch.zeros(dim, dtype=torch.float64))
        self.shift = nn.Parameter(torch.zeros(dim, dtype=torch.float64))

    def forward_transform(self, z):
        x = z * torch.exp(self.log_scale) + self.shift
        return x, self.log_scale.sum().expand(z.shape[0])

    def inverse_transform(self, x):
        z = (x - self.shift) * torch.exp(-self.log_scale)
        return z, (-self.log_scale.sum()).expand(x.shape[0])


class AffineCoupling(nn.Module):
    """Half the dims pass through and condition the scale/shift of the rest."""

    def __init__(self, dim, hidden_width, mask):
        super().__init__()
        self.register_buffer("mask", mask.to(torch.float64))
        self.net = nn.Sequential(
            nn.Linear(dim, hidden_width),
            nn.Tanh(),
            nn.Linear(hidden_width, hidden_width),
            nn.Tanh(),
            nn.Linear(hidden_width, 2 * dim),
        )
        nn.init.zeros_(self.net[-1].weight)
        nn.init.zeros_(self.net[-1].bias)

    def _scale_and_shift(self, anchored):
        h = self.net(anchored * self.mask)
        raw_scale, shift = h.chunk(2, dim=1)
        free = 1.0 - self.mask
        # tanh keeps per-layer stretch bounded, training stays stable
        return torch.tanh(raw_scale) * free, shift * free

    def forward_transform(self, z):
        s, t = self._scale_and_shift(z)
        x = self.mask * z + (1.0 - self.mask) * (z * torch.exp(s) + t)
        return x, s.sum(dim=1)

    def inverse_transform(self, x):
        s, t = self._scale_and_shift(x)
        z = self.mask * x + (1.0 - self.mask) * ((x - t) * torch.exp(-s))
        return z, -s.sum(dim=1)


class Flow(nn.Module):
    """Bijector chain over a standard normal base distribution."""

    def __init__(self, bijectors):
        super().__init__()
        self.bijectors = nn.ModuleList(bijectors)

    def forward_transform(self, z):
        logdet = torch.zeros(z.shape[0], dtype=z.dtype)
        x = z
        for bij in self.bijectors:
            x, ld = bij.forward_transform(x)
            logdet = logdet + ld
        return x, logdet

    def inverse_transform(self, x):
        logdet = torch.zeros(x.shape[0], dtype=x.dtype)
        z = x
        for bij in reversed(self.bijectors):
            z, ld = bij.inverse_transform(z)
            logdet = logdet + ld
        return z, logdet

    def logpdf(self, x):
        z, inv_logdet = self.inverse_transform(x)
        base = -0.5 * (z * z).sum(dim=1) - _HALF_LOG_TWO_PI * z.shape[1]
        return base + inv_logdet


def build_flow(dim, num_layers, hidden_width):
    bijectors = []
    for k in range(num_layers):
        mask = torch.tensor([(i + k) % 2 for i in range(dim)], dtype=torch.float64)
        bijectors.append(AffineCoupling(dim, hidden_width, mask))
    bijectors.append(AffineElementwise(dim))
    return Flow(bijectors).double()


def train_nf(coeffs_path, cfg: NfConfig, output_dir):
    """Maximum-likelihood training; writes nll.csv and a checkpoint."""
    values, meta = read_coefficients(coeffs_path)
    n, d = values.shape
    if n == 0:
        raise ConfigError(f"{coeffs_path}: cannot train on an empty coefficient file")

    torch.manual_seed(cfg.seed)
    flow = build_flow(d, cfg.num_layers, cfg.hidden_width)
    # actnorm-style start: the closing affine absorbs the data location and
    # scale, so the couplings always train on standardized values no matter
    # how large the raw coefficients are
    with np.errstate(invalid="ignore", over="ignore"):
        mu = values.mean(axis=0)
        sd = values.std(axis=0)
        sd = np.where(sd > 0.0, sd, 1.0)
    with torch.no_grad():
        closing = flow.bijectors[-1]
        closing.shift.copy_(torch.from_numpy(mu))
        closing.log_scale.copy_(torch.from_numpy(np.log(sd)))
    data = torch.from_numpy(np.ascontiguousarray(values))
    opt = torch.optim.Adam(flow.parameters(), lr=cfg.learning_rate)

    history = []
    for epoch in range(cfg.epochs):
        order = torch.randperm(n)
        total = 0.0
        for lo in range(0, n, cfg.batch_size):
            batch = data[order[lo : lo + cfg.batch_size]]
            opt.zero_grad()
            loss = -flow.logpdf(batch).mean()
            value = loss.item()
            if not math.isfinite(value):
                raise TrainingError(
                    f"NLL diverged at epoch {epoch}, batch offset {lo}: "
                    f"loss={value} (lr={cfg.learning_rate}, seed={cfg.seed})"
                )
            loss.backward()
            opt.step()
            total += value * batch.shape[0]
        history.append((epoch, total / n))

    os.makedirs(output_dir, exist_ok=True)
    with open(os.path.join(output_dir, "nll.csv"), "w", encoding="utf-8") as fh:
        fh.write("epoch,mean_nll\n")
        for epoch, mean_nll in history:
            fh.write(f"{epoch},{mean_nll!r}\n")

    payload = {
        "kind": "nf",
        "state": flow.state_dict(),
        "d": d,
        "num_layers": cfg.num_layers,
        "hidden_width": cfg.hidden_width,
    }
    manifest = {
        "kind": "nf",
        "flow": "realnvp-affine",
        "d": d,
        "num_layers": cfg.num_layers,
        "hidden_width": cfg.hidden_width,
        "learning_rate": repr(cfg.learning_rate),
        "batch_size": cfg.batch_size,
        "epochs": cfg.epochs,
        "seed": cfg.seed,
    }
    for key in ("basis_id", "dataset_id"):
        if key in meta:
            manifest[key] = meta[key]
    save_checkpoint(output_dir, payload, manifest)
    return {
        "epochs": cfg.epochs,
        "mean_nll": history[-1][1],
        "checkpoint": output_dir,
    }


def restore_flow(payload):
    if payload.get("kind") != "nf":
        raise ConfigError("checkpoint does not hold a flow model")
    flow = build_flow(payload["d"], payload["num_layers"], payload["hidden_width"])
    flow.load_state_dict(payload["state"])
    flow.eval()
    return flow


def nf_logpdf(checkpoint_dir, X):
    """Exact log-density of X rows under a trained flow checkpoint."""
    payload, _ = load_checkpoint(checkpoint_dir)
    flow = restore_flow(payload)
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != int(payload["d"]):
        raise ConfigError(
            f"query shape {X.shape} does not match checkpoint d={payload['d']}"
        )
    with torch.no_grad():
        out = flow.logpdf(torch.from_numpy(X))
    return out.numpy().copy()


def sample_flow(payload, n, seed):
    """Push n base-normal draws through the generative direction."""
    flow = restore_flow(payload)
    torch.manual_seed(seed)
    with torch.no_grad():
        z = torch.randn(n, int(payload["d"]), dtype=torch.float64)
        x, _ = flow.forward_transform(z)
    return x.numpy().copy()
