"""Adversarial training on coefficient grids.

Coefficient rows are reshaped row-major to a 2D grid (400 -> 20x20,
324 -> 18x18) so the generator can upsample with transposed
convolutions and the discriminator can downsample with strided ones.
Non-square widths need an explicit layout.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .checkpoint import save_checkpoint
from .coeffio import read_coefficients
from .errors import ConfigError, TrainingError

FINAL_ACTIVATIONS = ("linear", "sigmoid")


@dataclass
class GanConfig:
    latent_dim: int = 64
    final_activation: str = "linear"
    lr_generator: float = 1e-4
    lr_discriminator: float = 4e-4
    batch_size: int = 64
    epochs: int = 2
    seed: int = 0
    layout: tuple | None = None

    def __post_init__(self):
        if self.latent_dim < 1:
            raise ConfigError("latent_dim must be at least 1")
        if self.final_activation not in FINAL_ACTIVATIONS:
            raise ConfigError(
                f"final_activation must be one of {FINAL_ACTIVATIONS}, "
                f"got {self.final_activation!r}"
            )
        if self.lr_generator <= 0 or self.lr_discriminator <= 0:
            raise ConfigError("learning rates must be positive")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1")
        if self.epochs < 1:
            raise ConfigError("epochs must be at least 1")
        if self.layout is not None:
            layout = tuple(int(v) for v in self.layout)
            if len(layout) != 2 or layout[0] < 1 or layout[1] < 1:
                raise ConfigError("layout must be two positive integers")
            self.layout = layout


def _grid_of(d, layout):
    if layout is not None:
        h, w = layout
        if h * w != d:
            raise ConfigError(f"layout {h}x{w} does not hold {d} coefficients")
        return h, w
    side = math.isqrt(d)
    if side * side != d:
        raise ConfigError(
            f"d={d} is not square-reshapeable; pass an explicit layout"
        )
    return side, side


def _upsample_plan(h, w):
    # deepest stride-2 stack whose seed grid stays at least 3x3
    for depth in (2, 1):
        factor = 2 ** depth
        if h % factor == 0 and w % factor == 0 and min(h, w) // factor >= 3:
            return depth, h // factor, w // factor
    return 0, h, w


class Generator(nn.Module):
    """Dense seed -> transposed-convolution upsampling -> flat coefficients."""

    def __init__(self, latent_dim, grid, final_activation):
        super().__init__()
        h, w = grid
        depth, h0, w0 = _upsample_plan(h, w)
        channels = 64 if depth else 32
        self.grid = (h, w)
        self.seed_shape = (channels, h0, w0)
        self.final_activation = final_activation
        self.fc = nn.Linear(latent_dim, channels * h0 * w0)
        blocks = []
        for _ in range(depth):
            blocks += [
                nn.ReLU(),
                nn.ConvTranspose2d(channels, channels // 2, 4, stride=2, padding=1),
            ]
            channels //= 2
        if depth == 0:
            blocks += [nn.ReLU(), nn.Conv2d(channels, 16, 3, padding=1)]
            channels = 16
        blocks += [nn.ReLU(), nn.Conv2d(channels, 1, 3, padding=1)]
        self.body = nn.Sequential(*blocks)

    def forward(self, z):
        x = self.fc(z).reshape(z.shape[0], *self.seed_shape)
        x = self.body(x)
        if self.final_activation == "sigmoid":
            x = torch.sigmoid(x)
        return x.reshape(z.shape[0], -1)


class Discriminator(nn.Module):
    """Strided-convolution stack ending in a single logit."""

    def __init__(self, grid):
        super().__init__()
        h, w = grid
        n_down = 2 if min(h, w) >= 12 else 1 if min(h, w) >= 6 else 0
        blocks = []
        c_in, c_out = 1, 16
        for _ in range(n_down):
            blocks += [nn.Conv2d(c_in, c_out, 4, stride=2, padding=1), nn.LeakyReLU(0.2)]
            c_in, c_out = c_out, c_out * 2
        if n_down == 0:
            blocks += [nn.Conv2d(1, 16, 3, padding=1), nn.LeakyReLU(0.2)]
            c_in = 16
        self.features = nn.Sequential(*blocks)
        with torch.no_grad():
            flat = self.features(torch.zeros(1, 1, h, w)).numel()
        self.head = nn.Linear(flat, 1)

    def forward(self, x):
        return self.head(self.features(x).flatten(1)).squeeze(1)


def train_gan(coeffs_path, cfg: GanConfig, output_dir):
    """Nonsaturating GAN training; writes losses.csv and a checkpoint.

    Every logged step must have finite generator and discriminator
    losses, otherwise training aborts with a TrainingError.
    """
    values, meta = read_coefficients(coeffs_path)
    n, d = values.shape
    if n == 0:
        raise ConfigError(f"{coeffs_path}: cannot train on an empty coefficient file")
    grid = _grid_of(d, cfg.layout)

    torch.manual_seed(cfg.seed)
    generator = Generator(cfg.latent_dim, grid, cfg.final_activation).double()
    discriminator = Discriminator(grid).double()
    data = torch.from_numpy(np.ascontiguousarray(values)).reshape(n, 1, *grid)
    opt_g = torch.optim.Adam(
        generator.parameters(), lr=cfg.lr_generator, betas=(0.5, 0.999)
    )
    opt_d = torch.optim.Adam(
        discriminator.parameters(), lr=cfg.lr_discriminator, betas=(0.5, 0.999)
    )
    bce = nn.BCEWithLogitsLoss()

    rows = []
    step = 0
    for epoch in range(cfg.epochs):
        order = torch.randperm(n)
        for lo in range(0, n, cfg.batch_size):
            batch = data[order[lo : lo + cfg.batch_size]]
            b = batch.shape[0]
            ones = torch.ones(b, dtype=torch.float64)
            zeros = torch.zeros(b, dtype=torch.float64)
            z = torch.randn(b, cfg.latent_dim, dtype=torch.float64)
            fake = generator(z).reshape(b, 1, *grid)

            opt_d.zero_grad()
            d_loss = bce(discriminator(batch), ones) + bce(
                discriminator(fake.detach()), zeros
            )
            d_loss.backward()
            opt_d.step()

            opt_g.zero_grad()
            g_loss = bce(discriminator(fake), ones)
            g_loss.backward()
            opt_g.step()

            dl, gl = d_loss.item(), g_loss.item()
            if not (math.isfinite(dl) and math.isfinite(gl)):
                raise TrainingError(
                    f"non-finite loss at step {step} (epoch {epoch}): "
                    f"d_loss={dl} g_loss={gl}"
                )
            rows.append((step, epoch, dl, gl))
            step += 1

    os.makedirs(output_dir, exist_ok=True)
    with open(os.path.join(output_dir, "losses.csv"), "w", encoding="utf-8") as fh:
        fh.write("step,epoch,d_loss,g_loss\n")
        for s, e, dl, gl in rows:
            fh.write(f"{s},{e},{dl!r},{gl!r}\n")

    payload = {
        "kind": "gan",
        "generator": generator.state_dict(),
        "discriminator": discriminator.state_dict(),
        "latent_dim": cfg.latent_dim,
        "final_activation": cfg.final_activation,
        "grid": list(grid),
        "d": d,
    }
    manifest = {
        "kind": "gan",
        "d": d,
        "grid": f"{grid[0]}x{grid[1]}",
        "latent_dim": cfg.latent_dim,
        "final_activation": cfg.final_activation,
        "lr_generator": repr(cfg.lr_generator),
        "lr_discriminator": repr(cfg.lr_discriminator),
        "batch_size": cfg.batch_size,
        "epochs": cfg.epochs,
        "seed": cfg.seed,
        "steps": step,
    }
    for key in ("basis_id", "dataset_id"):
        if key in meta:
            manifest[key] = meta[key]
    save_checkpoint(output_dir, payload, manifest)
    return {
        "steps": step,
        "d_loss": rows[-1][2],
        "g_loss": rows[-1][3],
        "checkpoint": output_dir,
    }


def sample_generator(payload, n, seed):
    """Draw n coefficient rows from a trained generator payload."""
    grid = tuple(payload["grid"])
    generator = Generator(
        payload["latent_dim"], grid, payload["final_activation"]
    ).double()
    generator.load_state_dict(payload["generator"])
    generator.eval()
    torch.manual_seed(seed)
    with torch.no_grad():
        z = torch.randn(n, payload["latent_dim"], dtype=torch.float64)
        out = generator(z)
    return out.numpy().reshape(n, int(payload["d"])).copy()
