#!/usr/bin/env python3
"""The pyramid convnet with and without lossy augmentation.

A small disk-vs-square task at 32x32: training bare on few samples
memorizes and the validation loss turns around (the overfit epoch);
training the same budget under the lossy regime generalizes. Expect a
couple of minutes of number crunching.
"""

from pathlib import Path

import numpy as np

from glyphlab import (
    LabeledDataset,
    Rng,
    TrainConfig,
    auc,
    cnn_train,
    overfit_epoch,
    predict_proba,
    preset,
    roc_curve,
)
from glyphlab.numerics import derive_seed

OUT = Path(__file__).resolve().parent / "out" / "05_cnn"


def shapes(n_per_class, side, seed, noise=0.15, label_noise=0.0):
    rng = Rng(derive_seed(seed, 0x53484150))
    n = 2 * n_per_class
    images = np.zeros((n, side, side))
    labels = np.array([0] * n_per_class + [1] * n_per_class, dtype=np.int64)
    yy, xx = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    for i in range(n):
        cx = rng.uniform(0.35 * side, 0.65 * side)
        cy = rng.uniform(0.35 * side, 0.65 * side)
        r = rng.uniform(0.14 * side, 0.30 * side)
        if labels[i] == 0:
            mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
        else:
            mask = (np.abs(xx - cx) <= r) & (np.abs(yy - cy) <= r)
        img = np.where(mask, 0.85, 0.15) + rng.uniform_array((side, side), -noise, noise)
        images[i] = np.clip(img, 0.0, 1.0)
    if label_noise > 0.0:
        flip = Rng(derive_seed(seed, 0x464C4950))
        for i in range(n):
            if flip.uniform() < label_noise:
                labels[i] = 1 - labels[i]
    return LabeledDataset(images, labels, ("disk", "square"))


def main():
    OUT.mkdir(parents=True, exist_ok=True)

    print("== bare training on 24 noisy-label images ==")
    train = shapes(12, 32, seed=11, noise=0.2, label_noise=0.25)
    val = shapes(10, 32, seed=12, noise=0.2)
    cfg = TrainConfig(epochs=24, batch_size=4, learning_rate=1e-3, seed=2,
                      augment_policy=preset("none"))
    _, hist = cnn_train(train, val, cfg)
    print(f"final train acc {hist.train_acc[-1]:.2f}, "
          f"val loss min {min(hist.val_loss):.3f} -> last {hist.val_loss[-1]:.3f}")
    print(f"overfit epoch: {overfit_epoch(hist)}")

    print("== same budget under the lossy regime, 60/class ==")
    train = shapes(60, 32, seed=21)
    val = shapes(15, 32, seed=22)
    test = shapes(15, 32, seed=23)
    cfg = TrainConfig(epochs=25, batch_size=8, learning_rate=1e-3, seed=3,
                      augment_policy=preset("lossy"))
    model, hist = cnn_train(train, val, cfg)
    p = predict_proba(model, test.images)
    acc = float(np.mean((p >= 0.5) == (test.labels == 1)))
    print(f"held-out AUC {auc(roc_curve(p, test.labels)):.3f}, accuracy {acc:.3f}")


if __name__ == "__main__":
    main()
