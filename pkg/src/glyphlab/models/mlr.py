"""Multinomial logistic regression trained by full-batch descent.

The objective is mean cross-entropy plus an L2 ridge on the weights;
its gradient is (P - Y_onehot)^T X / n + l2 * W. Weights start at zero,
so the objective is convex and the run is exactly reproducible; the
internal sample order is canonicalized first, which makes the result
independent of how the caller happened to order the dataset rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..augment import augment_batch
from ..dataset import LabeledDataset, content_order
from ..errors import ArgumentError, DimensionError
from ..numerics import Tensor
from .config import TrainConfig, TrainHistory


@dataclass
class MlrModel:
    """Weight matrix (classes x flattened pixels) plus bias vector."""

    w: Tensor
    b: Tensor
    class_names: tuple

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        self.class_names = tuple(self.class_names)
        if self.w.ndim != 2 or self.b.shape != (self.w.shape[0],):
            raise ArgumentError(f"inconsistent parameter shapes {self.w.shape} / {self.b.shape}")
        if len(self.class_names) != self.w.shape[0] or len(self.class_names) < 2:
            raise ArgumentError("need one class name per weight row, at least two")
        if not (np.isfinite(self.w).all() and np.isfinite(self.b).all()):
            raise ArgumentError("model parameters must be finite")

    def predict_proba(self, images: Tensor) -> Tensor:
        x = np.asarray(images, dtype=np.float64).reshape(len(images), -1)
        if x.shape[1] != self.w.shape[1]:
            raise DimensionError(
                f"expected {self.w.shape[1]} features per image, got {x.shape[1]}"
            )
        return softmax_rows(x @ self.w.T + self.b)


def softmax(z: Tensor) -> Tensor:
    """Stable softmax of a logit vector; output sums to 1."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1:
        raise DimensionError(f"softmax expects a rank-1 logit vector, got shape {z.shape}")
    e = np.exp(z - z.max())
    return e / e.sum()


def softmax_rows(z: Tensor) -> Tensor:
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def _ce_loss(p: Tensor, labels: np.ndarray, w: Tensor, l2: float) -> float:
    picked = np.maximum(p[np.arange(len(labels)), labels], 1e-300)
    return float(-np.mean(np.log(picked)) + 0.5 * l2 * np.sum(w * w))


def mlr_train(
    train: LabeledDataset, val: LabeledDataset, cfg: TrainConfig
) -> tuple[MlrModel, TrainHistory]:
    """Fit the regression on train, tracking val metrics each epoch.

    cfg.augment_policy, when not the identity, re-augments the training
    images with fresh draws before each epoch's gradient; validation is
    never augmented.
    """
    if len(set(train.labels.tolist())) < 2:
        raise ArgumentError("training set must contain at least 2 classes")
    order = content_order(train)
    images = train.images[order]
    labels = train.labels[order]
    n, h, wd = images.shape
    n_classes = len(train.class_names)

    x_val = val.images.reshape(val.n, -1)
    y_val = val.labels
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), labels] = 1.0

    w = np.zeros((n_classes, h * wd))
    b = np.zeros(n_classes)
    history = TrainHistory()
    for epoch in range(cfg.epochs):
        if cfg.augment_policy.is_identity:
            x = images.reshape(n, -1)
        else:
            x = augment_batch(images, cfg.augment_policy, cfg.seed, counter=epoch)
            x = x.reshape(n, -1)
        p = softmax_rows(x @ w.T + b)
        grad_w = (p - onehot).T @ x / n + cfg.l2 * w
        grad_b = (p - onehot).sum(axis=0) / n
        train_loss = _ce_loss(p, labels, w, cfg.l2)
        train_acc = float(np.mean(p.argmax(axis=1) == labels))

        w = w - cfg.learning_rate * grad_w
        b = b - cfg.learning_rate * grad_b

        p_val = softmax_rows(x_val @ w.T + b)
        history.append(
            train_loss,
            train_acc,
            _ce_loss(p_val, y_val, w, cfg.l2),
            float(np.mean(p_val.argmax(axis=1) == y_val)),
        )
    return MlrModel(w, b, train.class_names), history
