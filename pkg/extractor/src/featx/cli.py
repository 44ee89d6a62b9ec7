"""CLI: featx extract --manifest M --out F [--resize 299 --batch 64 ...]"""
from __future__ import annotations

import argparse
import sys

from .extract import ExtractorConfig, extract


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="featx", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("extract", help="compute pool3 features for a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--resize", type=int, default=299)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--device", default="cpu")
    p.add_argument("--normalization", default="imagenet", choices=("imagenet", "tf"))
    p.add_argument("--weights", help="state-dict file for the backbone")
    p.add_argument("--weights-sha256", help="expected SHA-256 of the weights file")
    p.add_argument("--init-seed", type=int, default=0,
                   help="seed for the reproducible random init used when no weights file is given")
    args = parser.parse_args(argv)
    config = ExtractorConfig(
        manifest=args.manifest, out=args.out, resize=args.resize,
        batch_size=args.batch, device=args.device, normalization=args.normalization,
        weights=args.weights, weights_sha256=args.weights_sha256,
        init_seed=args.init_seed)
    try:
        out = extract(config)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"featx: error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
