"""Shared synthetic data builders for the test suite."""

import numpy as np
import pytest

from glyphlab import LabeledDataset, Rng
from glyphlab.numerics import derive_seed


def make_shapes_dataset(
    n_per_class: int,
    side: int = 64,
    seed: int = 0,
    noise: float = 0.0,
    label_noise: float = 0.0,
) -> LabeledDataset:
    """Filled disks vs squares with jittered size/position.

    noise adds uniform pixel noise (clipped back to [0, 1]); label_noise
    flips that fraction of labels, which makes a small training set
    memorizable but not generalizable.
    """
    rng = Rng(derive_seed(seed, 0x53484150))
    n = 2 * n_per_class
    images = np.zeros((n, side, side))
    labels = np.array([0] * n_per_class + [1] * n_per_class, dtype=np.int64)

    yy, xx = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    for i in range(n):
        cx = rng.uniform(0.35 * side, 0.65 * side)
        cy = rng.uniform(0.35 * side, 0.65 * side)
        r = rng.uniform(0.14 * side, 0.30 * side)
        if labels[i] == 0:  # disk
            mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
        else:  # square
            mask = (np.abs(xx - cx) <= r) & (np.abs(yy - cy) <= r)
        img = np.where(mask, 0.85, 0.15)
        if noise > 0.0:
            img = img + rng.uniform_array((side, side), -noise, noise)
        images[i] = np.clip(img, 0.0, 1.0)

    if label_noise > 0.0:
        flip_rng = Rng(derive_seed(seed, 0x464C4950))
        for i in range(n):
            if flip_rng.uniform() < label_noise:
                labels[i] = 1 - labels[i]
    return LabeledDataset(images, labels, ("disk", "square"))


def make_blob_dataset(n_per_class: int, seed: int = 0, gap: float = 4.0) -> LabeledDataset:
    """Two linearly separable 2-D Gaussian blobs packed as 1x2 'images'."""
    rng = Rng(derive_seed(seed, 0x424C4F42))
    pts = rng.normal_array((2 * n_per_class, 2))
    pts[n_per_class:] += gap
    # map into [0, 1] for the dataset contract
    lo, hi = pts.min(), pts.max()
    pts = (pts - lo) / (hi - lo)
    labels = np.array([0] * n_per_class + [1] * n_per_class, dtype=np.int64)
    return LabeledDataset(pts.reshape(-1, 1, 2), labels, ("a", "b"))


@pytest.fixture
def shapes_small():
    return make_shapes_dataset(10, side=32, seed=7, noise=0.1)
