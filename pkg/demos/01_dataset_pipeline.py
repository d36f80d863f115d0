#!/usr/bin/env python3
"""Dataset pipeline walkthrough.

Builds a tiny on-disk tree of binary graymaps, ingests it into a
LabeledDataset (sorted class table, [0, 1] intensities), splits it
deterministically, and round-trips the packed GLY1 file.
"""

from pathlib import Path

import numpy as np

from glyphlab import (
    GrayImage,
    Rng,
    SplitSpec,
    ingest_dir,
    read_gly,
    split_stratified,
    write_gly,
    write_pgm,
)

OUT = Path(__file__).resolve().parent / "out" / "01_dataset"


def main():
    raw = OUT / "raw"
    rng = Rng(2024)
    for cname in ("A", "B", "H"):
        (raw / cname).mkdir(parents=True, exist_ok=True)
        for i in range(6):
            px = np.array(
                [[rng.randrange(256) for _ in range(10)] for _ in range(12)], dtype=np.uint8
            )
            (raw / cname / f"glyph{i}.pgm").write_bytes(write_pgm(GrayImage(10, 12, px)))

    ds = ingest_dir(raw, side=16)
    print(f"ingested n={ds.n}, classes={ds.class_names}, images={ds.images.shape}")
    print(f"intensity range: [{ds.images.min():.3f}, {ds.images.max():.3f}]")

    train, val, test = split_stratified(ds, SplitSpec(0.7, 0.15, 0.15, seed=7))
    print(f"split sizes: train={train.n} val={val.n} test={test.n}")

    gly = OUT / "demo.gly"
    n_bytes = write_gly(ds, gly)
    back = read_gly(gly)
    assert np.array_equal(back.images, ds.images)
    assert back.class_names == ds.class_names
    print(f"GLY1 file: {n_bytes} bytes, round-trips bit-exactly")


if __name__ == "__main__":
    main()
