"""Trainer command line: train-gan, train-nf, generate.

Inputs and outputs are coefficient containers plus checkpoint
directories (weights.pt and a key=value manifest.txt). Exit codes: 2
for configuration problems, 3 for unreadable files, 4 for numerical
failures during training.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, TrainerError
from .flow import NfConfig, train_nf
from .gan import GanConfig, train_gan
from .generate import generate


def _parse_layout(text):
    if text is None:
        return None
    parts = text.lower().split("x")
    try:
        h, w = (int(p) for p in parts)
    except ValueError:
        raise ConfigError(f"layout must look like 20x20, got {text!r}") from None
    return h, w


def cmd_train_gan(args) -> int:
    cfg = GanConfig(
        latent_dim=args.latent_dim,
        final_activation=args.final_activation,
        lr_generator=args.lr_gen,
        lr_discriminator=args.lr_disc,
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=args.seed,
        layout=_parse_layout(args.layout),
    )
    result = train_gan(args.coeffs, cfg, args.output)
    print(
        f"train-gan: {result['steps']} steps, "
        f"d_loss={result['d_loss']:.6f} g_loss={result['g_loss']:.6f} "
        f"-> {args.output}"
    )
    return 0


def cmd_train_nf(args) -> int:
    cfg = NfConfig(
        num_layers=args.layers,
        hidden_width=args.hidden,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=args.seed,
    )
    result = train_nf(args.coeffs, cfg, args.output)
    print(
        f"train-nf: {result['epochs']} epochs, "
        f"mean_nll={result['mean_nll']:.6f} -> {args.output}"
    )
    return 0


def cmd_generate(args) -> int:
    values = generate(args.checkpoint, args.n, args.seed, args.output)
    print(f"generate: {values.shape[0]}x{values.shape[1]} -> {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coeff-trainers",
        description="GAN and normalizing-flow trainers over coefficient files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-gan", help="adversarial training on a coefficient file")
    p.add_argument("--coeffs", required=True, help="input coefficient container")
    p.add_argument("--output", required=True, help="checkpoint directory")
    p.add_argument("--latent-dim", type=int, default=64)
    p.add_argument(
        "--final-activation", choices=("linear", "sigmoid"), default="linear"
    )
    p.add_argument("--lr-gen", type=float, default=1e-4)
    p.add_argument("--lr-disc", type=float, default=4e-4)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--epochs", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--layout", default=None, help="grid layout for non-square d, e.g. 18x18")
    p.set_defaults(func=cmd_train_gan)

    p = sub.add_parser("train-nf", help="likelihood training of a normalizing flow")
    p.add_argument("--coeffs", required=True, help="input coefficient container")
    p.add_argument("--output", required=True, help="checkpoint directory")
    p.add_argument("--layers", type=int, default=4)
    p.add_argument("--hidden", type=int, default=50)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_nf)

    p = sub.add_parser("generate", help="sample a trained checkpoint into a coefficient file")
    p.add_argument("--checkpoint", required=True, help="checkpoint directory")
    p.add_argument("--n", type=int, required=True, help="number of rows to draw")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True, help="output coefficient container")
    p.set_defaults(func=cmd_generate)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except TrainerError as exc:
        print(f"coeff-trainers: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"coeff-trainers: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
