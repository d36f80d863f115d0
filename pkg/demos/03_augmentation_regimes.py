#!/usr/bin/env python3
"""The three augmentation regimes side by side.

"none" is the bitwise identity, "lossless" only mirrors, and "lossy"
resamples through rotation / shift / shear / zoom. The script warps one
synthetic glyph under each regime and writes the results as P5 files.
"""

from pathlib import Path

import numpy as np

from glyphlab import GrayImage, Rng, augment_batch, preset, sample_affine, write_pgm

OUT = Path(__file__).resolve().parent / "out" / "03_augment"


def glyph(side=48):
    yy, xx = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    bar = (np.abs(xx - side // 2) < 3) | (np.abs(yy - side // 2) < 3)
    return np.where(bar, 0.9, 0.1)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    img = glyph()
    batch = img[None, :, :]

    for name in ("none", "lossless", "lossy"):
        policy = preset(name)
        params = sample_affine(policy, Rng(42), img.shape[1], img.shape[0])
        print(f"{name:9s} sample: theta={params.theta:+.1f} deg, shift=({params.tx:+.1f}, "
              f"{params.ty:+.1f}) px, shear={params.shear:+.3f}, zoom=({params.zx:.2f}, {params.zy:.2f}), "
              f"flips=({params.hflip}, {params.vflip})")
        for k in range(3):
            out = augment_batch(batch, policy, seed=42, counter=k)[0]
            delta = float(np.abs(out - img).mean())
            px = np.floor(out * 255.0 + 0.5).astype(np.uint8)
            path = OUT / f"{name}_{k}.pgm"
            path.write_bytes(write_pgm(GrayImage(px.shape[1], px.shape[0], px)))
            print(f"  draw {k}: mean |change| = {delta:.4f} -> {path.name}")


if __name__ == "__main__":
    main()
