#!/usr/bin/env python3
"""Convert the `mnist` and `fashion-mnist` npm packages into IDX files.

Both packages group images by class in JSON files and drop the original
train/test assignment, so this script re-splits them with a fixed seed,
stratified by class:

  mnist          10,000 digits  -> 8,571 train / 1,429 test
  fashion-mnist  70,000 images  -> 60,000 train / 10,000 test (6000/1000 per class)

Usage:
  npm pack mnist@1.1.0 fashion-mnist@1.1.0
  tar xzf mnist-1.1.0.tgz -C mnist && tar xzf fashion-mnist-1.1.0.tgz -C fashion
  python3 scripts/npm_to_idx.py --mnist mnist/package --fashion fashion/package --out data/
"""

import argparse
import json
import os
import random
import struct


def write_images(path, images, rows, cols):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), rows, cols))
        for img in images:
            f.write(bytes(img))


def write_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def split(per_class, train_counts, test_counts, seed):
    rng = random.Random(seed)
    train, test = [], []
    for c in sorted(per_class):
        imgs = per_class[c]
        order = list(range(len(imgs)))
        rng.shuffle(order)
        ntr, nte = train_counts[c], test_counts[c]
        train += [(imgs[i], c) for i in order[:ntr]]
        test += [(imgs[i], c) for i in order[ntr:ntr + nte]]
    rng.shuffle(train)
    rng.shuffle(test)
    return train, test


def largest_remainder(sizes, total):
    whole = sum(sizes.values())
    quotas = {c: total * s / whole for c, s in sizes.items()}
    counts = {c: int(q) for c, q in quotas.items()}
    rest = total - sum(counts.values())
    for c in sorted(quotas, key=lambda c: (-(quotas[c] - counts[c]), c))[:rest]:
        counts[c] += 1
    return counts


def emit(out_dir, train, test):
    os.makedirs(out_dir, exist_ok=True)
    write_images(os.path.join(out_dir, "train-images-idx3-ubyte"), [t[0] for t in train], 28, 28)
    write_labels(os.path.join(out_dir, "train-labels-idx1-ubyte"), [t[1] for t in train])
    write_images(os.path.join(out_dir, "t10k-images-idx3-ubyte"), [t[0] for t in test], 28, 28)
    write_labels(os.path.join(out_dir, "t10k-labels-idx1-ubyte"), [t[1] for t in test])
    print(out_dir, len(train), len(test))


def convert_mnist(pkg, out_dir, seed):
    per_class = {}
    for c in range(10):
        raw = json.load(open(os.path.join(pkg, "src", "digits", f"{c}.json")))["data"]
        count = len(raw) // 784
        per_class[c] = [
            [min(255, max(0, round(v * 255))) for v in raw[i * 784:(i + 1) * 784]]
            for i in range(count)
        ]
    sizes = {c: len(v) for c, v in per_class.items()}
    total = sum(sizes.values())
    n_test = round(total / 7)
    test_counts = largest_remainder(sizes, n_test)
    train_counts = {c: sizes[c] - test_counts[c] for c in sizes}
    emit(out_dir, *split(per_class, train_counts, test_counts, seed))


def convert_fashion(pkg, out_dir, seed):
    per_class = {}
    for c in range(10):
        raw = json.load(open(os.path.join(pkg, "src", "clothes", f"{c}.json")))["data"]
        # the package carries a couple of empty entries
        per_class[c] = [img for img in raw if len(img) == 784]
    train_counts = {c: 6000 for c in per_class}
    test_counts = {c: 1000 for c in per_class}
    emit(out_dir, *split(per_class, train_counts, test_counts, seed))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mnist")
    ap.add_argument("--fashion")
    ap.add_argument("--out", required=True)
    ap.add_argument("--seed", type=int, default=20201223)
    args = ap.parse_args()
    if args.mnist:
        convert_mnist(args.mnist, os.path.join(args.out, "mnist"), args.seed)
    if args.fashion:
        convert_fashion(args.fashion, os.path.join(args.out, "fashion"), args.seed)


if __name__ == "__main__":
    main()
