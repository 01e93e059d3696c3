#!/usr/bin/env python3
"""Convert the digits bundled in the npm `mnist` package to IDX files.

Usage: mnist_from_npm.py <package-dir> <out-dir> [--train 8000] [--seed 0]

The package ships 10,000 28x28 digits as JSON (one file per class). They are
shuffled with a fixed seed and split into train/test IDX files named like the
original MNIST distribution. Any real MNIST IDX files can be used instead.
"""
import argparse
import json
import random
import struct
from pathlib import Path

SIDE = 28
PIXELS = SIDE * SIDE


def load(package_dir):
    items = []
    for digit in range(10):
        path = Path(package_dir) / "src" / "digits" / f"{digit}.json"
        data = json.loads(path.read_text())["data"]
        for start in range(0, len(data), PIXELS):
            pixels = bytes(round(v * 255) for v in data[start:start + PIXELS])
            items.append((pixels, digit))
    return items


def write(out_dir, prefix, items):
    with open(out_dir / f"{prefix}-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(items), SIDE, SIDE))
        for pixels, _ in items:
            f.write(pixels)
    with open(out_dir / f"{prefix}-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, len(items)))
        f.write(bytes(label for _, label in items))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("package_dir")
    parser.add_argument("out_dir")
    parser.add_argument("--train", type=int, default=8000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    items = load(args.package_dir)
    random.Random(args.seed).shuffle(items)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write(out, "train", items[: args.train])
    write(out, "t10k", items[args.train:])
    print(f"wrote {args.train} train and {len(items) - args.train} test digits to {out}")


if __name__ == "__main__":
    main()
