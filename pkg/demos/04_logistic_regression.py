#!/usr/bin/env python3
"""Multinomial logistic regression on separable blobs.

Full-batch descent from zero weights is convex and perfectly
reproducible; the script trains, reports the loss curve, and evaluates
with one-vs-rest ROC/AUC plus a confusion matrix.
"""

from pathlib import Path

import numpy as np

from glyphlab import (
    LabeledDataset,
    Rng,
    TrainConfig,
    accuracy,
    confusion_matrix,
    macro_auc_ovr,
    mlr_train,
    predict_proba,
    roc_curve,
)
from glyphlab.svgplot import roc_svg

OUT = Path(__file__).resolve().parent / "out" / "04_mlr"


def blobs(n_per_class, seed):
    rng = Rng(seed)
    pts = rng.normal_array((3 * n_per_class, 2))
    pts[n_per_class : 2 * n_per_class] += (5.0, 0.0)
    pts[2 * n_per_class :] += (0.0, 5.0)
    lo, hi = pts.min(), pts.max()
    pts = (pts - lo) / (hi - lo)
    labels = np.repeat([0, 1, 2], n_per_class)
    return LabeledDataset(pts.reshape(-1, 1, 2), labels, ("east", "north", "origin"))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    train = blobs(40, seed=3)
    test = blobs(15, seed=4)

    cfg = TrainConfig(epochs=400, batch_size=1, learning_rate=0.1, l2=1e-4, seed=0)
    model, history = mlr_train(train, test, cfg)
    print(f"train loss {history.train_loss[0]:.3f} -> {history.train_loss[-1]:.4f}, "
          f"final train acc {history.train_acc[-1]:.3f}")

    probs = predict_proba(model, test.images)
    per_class, macro = macro_auc_ovr(probs, test.labels)
    cm = confusion_matrix(probs.argmax(axis=1), test.labels, 3)
    print(f"test: macro AUC {macro:.3f}, per-class {np.round(per_class, 3).tolist()}, "
          f"accuracy {accuracy(cm):.3f}")
    print("confusion (rows true):")
    for row, name in zip(cm.m, test.class_names):
        print(f"  {name:7s} {row.tolist()}")

    curves = [
        (name, roc_curve(probs[:, c], (test.labels == c).astype(int)).points)
        for c, name in enumerate(test.class_names)
    ]
    (OUT / "roc.svg").write_text(roc_svg(curves, title="one-vs-rest ROC"))
    print(f"wrote {OUT}/roc.svg")


if __name__ == "__main__":
    main()
