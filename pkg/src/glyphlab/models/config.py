"""Shared training configuration and per-epoch history records."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..augment import AugmentPolicy, preset
from ..errors import ArgumentError


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 1e-4
    rmsprop_rho: float = 0.9
    rmsprop_eps: float = 1e-8
    l2: float = 0.0
    seed: int = 0
    augment_policy: AugmentPolicy = field(default_factory=lambda: preset("none"))

    def __post_init__(self):
        if self.learning_rate <= 0.0:
            raise ArgumentError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0.0 < self.rmsprop_rho < 1.0:
            raise ArgumentError(f"rmsprop_rho must be in (0, 1), got {self.rmsprop_rho}")
        if self.epochs < 0 or self.batch_size < 1:
            raise ArgumentError("epochs must be >= 0 and batch_size >= 1")
        if self.l2 < 0.0:
            raise ArgumentError(f"l2 must be >= 0, got {self.l2}")


def mlr_defaults(**overrides) -> TrainConfig:
    """Full-batch logistic-regression defaults: lr 0.1, l2 1e-4, 500 epochs."""
    base = dict(epochs=500, batch_size=1, learning_rate=0.1, l2=1e-4)
    base.update(overrides)
    return TrainConfig(**base)


def cnn_defaults(**overrides) -> TrainConfig:
    """Convolutional-network defaults: RMSProp lr 1e-4, batch 32, 30 epochs."""
    base = dict(epochs=30, batch_size=32, learning_rate=1e-4)
    base.update(overrides)
    return TrainConfig(**base)


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    train_acc: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    val_acc: list = field(default_factory=list)

    def append(self, tl: float, ta: float, vl: float, va: float) -> None:
        for v in (tl, ta, vl, va):
            if not np.isfinite(v):
                raise ArgumentError(f"history values must be finite, got {v}")
        self.train_loss.append(float(tl))
        self.train_acc.append(float(ta))
        self.val_loss.append(float(vl))
        self.val_acc.append(float(va))

    def __len__(self) -> int:
        return len(self.val_loss)
