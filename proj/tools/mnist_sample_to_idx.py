#!/usr/bin/env python3
"""Convert the MNIST digit sample shipped in the npm `mnist` package into
gzip-compressed IDX files (the format the C++ loader reads).

Usage:
    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/mnist_sample_to_idx.py package/src/digits data/mnist-sample

Every fifth digit of each class goes to the test split, the rest to train.
Pixel values in the package are stored as v/255 rounded to three decimals;
they are mapped back to bytes with round(v * 255).
"""
import gzip
import json
import struct
import sys
from pathlib import Path

SIDE = 28


def write_idx(path, images, labels_path, labels):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), SIDE, SIDE))
        for img in images:
            f.write(bytes(img))
    with gzip.GzipFile(labels_path, "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main(src, dst):
    src, dst = Path(src), Path(dst)
    dst.mkdir(parents=True, exist_ok=True)
    per_class = []
    for digit in range(10):
        raw = json.loads((src / f"{digit}.json").read_text())["data"]
        count = len(raw) // (SIDE * SIDE)
        imgs = []
        for k in range(count):
            chunk = raw[k * SIDE * SIDE:(k + 1) * SIDE * SIDE]
            imgs.append([min(255, max(0, round(v * 255))) for v in chunk])
        per_class.append(imgs)

    splits = {"train": ([], []), "t10k": ([], [])}
    longest = max(len(c) for c in per_class)
    # Interleave classes so that any prefix of a split is roughly balanced.
    for k in range(longest):
        for digit, imgs in enumerate(per_class):
            if k < len(imgs):
                name = "t10k" if k % 5 == 4 else "train"
                splits[name][0].append(imgs[k])
                splits[name][1].append(digit)

    for name, (images, labels) in splits.items():
        write_idx(dst / f"{name}-images-idx3-ubyte.gz", images,
                  dst / f"{name}-labels-idx1-ubyte.gz", labels)
        print(f"{name}: {len(images)} images")


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2])
