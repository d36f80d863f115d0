"""Glyph dataset handling.

Covers the full path from raw binary P5 graymaps on disk to the packed
GLY1 dataset file: decoding, center-aligned bilinear resize, intensity
normalization to [0, 1], deterministic stratified splitting, and a
bit-exact binary round trip.

GLY1 layout (all integers little-endian):

    magic 'GLY1' | u32 version=1 | u32 n | u32 height | u32 width
    | u32 n_classes | n_classes x (u16 byte_len, UTF-8 name)
    | n x u16 label | n*height*width x u8 pixel

Pixels are stored on the original 0..255 scale; readers divide by 255.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ArgumentError,
    CorruptFileError,
    EmptyDatasetError,
    StratificationError,
    UnsupportedDepthError,
    UnsupportedFormatError,
)
from .numerics import Rng, Tensor, derive_seed

_GLY_MAGIC = b"GLY1"
_GLY_VERSION = 1


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale raster; pixels shaped (height, width), row-major."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ArgumentError(f"image extents must be >= 1, got {self.width}x{self.height}")
        px = np.asarray(self.pixels, dtype=np.uint8).reshape(self.height, self.width)
        object.__setattr__(self, "pixels", px)


@dataclass(frozen=True)
class LabeledDataset:
    """Uniform-size glyph images with integer labels and a class table.

    images holds float64 intensities in [0, 1] shaped (n, h, w); labels
    index class_names, which must be duplicate-free and sorted ascending
    by code point so label indices are reproducible without a manifest.
    """

    images: Tensor
    labels: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        images = np.asarray(self.images, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        names = tuple(self.class_names)
        if images.ndim != 3:
            raise ArgumentError(f"images must be rank-3 (n, h, w), got shape {images.shape}")
        if labels.shape != (images.shape[0],):
            raise ArgumentError(
                f"labels length {labels.shape} does not match image count {images.shape[0]}"
            )
        if list(names) != sorted(names) or len(set(names)) != len(names):
            raise ArgumentError("class_names must be unique and sorted ascending by code point")
        if labels.size and (labels.min() < 0 or labels.max() >= len(names)):
            raise ArgumentError("labels must index class_names")
        if images.size and (not np.isfinite(images).all() or images.min() < 0.0 or images.max() > 1.0):
            raise ArgumentError("image intensities must be finite and within [0, 1]")
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", names)

    @property
    def n(self) -> int:
        return self.images.shape[0]

    @property
    def image_shape(self) -> tuple[int, int]:
        return self.images.shape[1], self.images.shape[2]

    def select(self, indices) -> "LabeledDataset":
        """Subset by row indices; the class table is kept as-is."""
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(self.images[idx], self.labels[idx], self.class_names)

    def subset_by_classes(self, names) -> "LabeledDataset":
        """Rows of the given classes only, relabeled against a reduced table."""
        wanted = sorted(names)
        for name in wanted:
            if name not in self.class_names:
                raise ArgumentError(f"unknown class name: {name!r}")
        old_ids = [self.class_names.index(name) for name in wanted]
        remap = {old: new for new, old in enumerate(old_ids)}
        keep = np.isin(self.labels, old_ids)
        new_labels = np.array([remap[int(l)] for l in self.labels[keep]], dtype=np.int64)
        return LabeledDataset(self.images[keep], new_labels, tuple(wanted))


@dataclass(frozen=True)
class SplitSpec:
    """Fractions for train/val/test plus the seed that fixes the shuffle."""

    train_frac: float = 0.70
    val_frac: float = 0.15
    test_frac: float = 0.15
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if any(f <= 0 for f in fracs):
            raise ArgumentError(f"split fractions must be positive, got {fracs}")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ArgumentError(f"split fractions must sum to 1, got {sum(fracs)}")


def load_pgm(data: bytes) -> GrayImage:
    """Decode a binary P5 graymap with maxval 255."""
    if len(data) < 2 or data[:2] != b"P5":
        raise UnsupportedFormatError("not a binary P5 graymap")

    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(data):
            if data[pos : pos + 1].isspace():
                pos += 1
            elif data[pos : pos + 1] == b"#":  # comment runs to end of line
                while pos < len(data) and data[pos] not in b"\r\n":
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and data[pos : pos + 1].isdigit():
            pos += 1
        if pos == start:
            raise CorruptFileError("malformed P5 header")
        fields.append(int(data[start:pos]))

    width, height, maxval = fields
    if maxval != 255:
        raise UnsupportedDepthError(f"maxval must be 255, got {maxval}")
    if width < 1 or height < 1:
        raise CorruptFileError(f"bad raster extents {width}x{height}")
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise CorruptFileError("missing whitespace before raster")
    pos += 1

    expected = width * height
    raster = data[pos : pos + expected]
    if len(raster) < expected:
        raise CorruptFileError(f"raster truncated: expected {expected} bytes, found {len(raster)}")
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return GrayImage(width, height, pixels.copy())


def write_pgm(img: GrayImage) -> bytes:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


def resize_bilinear(img: GrayImage, out_w: int, out_h: int) -> GrayImage:
    """Center-aligned bilinear resample, edge-clamped, rounded half-up.

    Source coordinate for destination index d along an axis is
    (d + 0.5) * (src_extent / dst_extent) - 0.5, so an identical-size
    resize lands exactly on the input grid and is lossless.
    """
    if out_w < 1 or out_h < 1:
        raise ArgumentError(f"output extents must be >= 1, got {out_w}x{out_h}")
    src = img.pixels.astype(np.float64)
    h, w = img.height, img.width

    xs = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    ys = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    x0 = np.floor(xs)
    y0 = np.floor(ys)
    fx = xs - x0
    fy = ys - y0
    x0i = np.clip(x0.astype(np.int64), 0, w - 1)
    x1i = np.clip(x0.astype(np.int64) + 1, 0, w - 1)
    y0i = np.clip(y0.astype(np.int64), 0, h - 1)
    y1i = np.clip(y0.astype(np.int64) + 1, 0, h - 1)

    top = src[y0i][:, x0i] * (1.0 - fx) + src[y0i][:, x1i] * fx
    bot = src[y1i][:, x0i] * (1.0 - fx) + src[y1i][:, x1i] * fx
    out = top * (1.0 - fy)[:, None] + bot * fy[:, None]
    out8 = np.floor(out + 0.5).astype(np.uint8)
    return GrayImage(out_w, out_h, out8)


def ingest_dir(root, side: int = 64) -> LabeledDataset:
    """Build a dataset from a directory tree root/<class>/<name>.pgm.

    Class names are the subdirectory names sorted ascending; files within
    a class are taken in sorted filename order, so the result does not
    depend on filesystem enumeration order. Every image is resized to
    side x side and scaled to [0, 1] by dividing by 255.
    """
    rootp = Path(root)
    if not rootp.is_dir():
        raise ArgumentError(f"ingest root is not a directory: {root}")
    class_dirs = sorted(p for p in rootp.iterdir() if p.is_dir())
    if not class_dirs:
        raise EmptyDatasetError(f"no class subdirectories under {root}")

    class_names = tuple(p.name for p in class_dirs)
    chunks: list[np.ndarray] = []
    labels: list[int] = []
    for label, cdir in enumerate(class_dirs):
        for fpath in sorted(p for p in cdir.iterdir() if p.is_file() and p.suffix == ".pgm"):
            try:
                img = load_pgm(fpath.read_bytes())
            except (UnsupportedFormatError, CorruptFileError) as exc:
                raise CorruptFileError(f"{fpath}: {exc}") from exc
            resized = resize_bilinear(img, side, side)
            chunks.append(resized.pixels.astype(np.float64) / 255.0)
            labels.append(label)

    if chunks:
        images = np.stack(chunks)
    else:
        images = np.zeros((0, side, side), dtype=np.float64)
    return LabeledDataset(images, np.array(labels, dtype=np.int64), class_names)


def split_stratified(ds: LabeledDataset, spec: SplitSpec):
    """Seeded per-class shuffle-and-cut into (train, val, test).

    Within each class the shuffled indices are cut at
    floor(n_c * train_frac) and floor(n_c * (train_frac + val_frac)).
    The three parts partition the dataset exactly and the same seed
    always reproduces the same split.
    """
    parts: tuple[list[int], list[int], list[int]] = ([], [], [])
    rng = Rng(derive_seed(spec.seed, 0x53504C49))  # stream tag: split
    for c in range(len(ds.class_names)):
        idx = [int(i) for i in np.flatnonzero(ds.labels == c)]
        if len(idx) < 3:
            raise StratificationError(
                f"class {ds.class_names[c]!r} has {len(idx)} samples; need >= 3 to stratify"
            )
        rng.shuffle(idx)
        n_c = len(idx)
        cut1 = int(n_c * spec.train_frac)
        cut2 = int(n_c * (spec.train_frac + spec.val_frac))
        parts[0].extend(idx[:cut1])
        parts[1].extend(idx[cut1:cut2])
        parts[2].extend(idx[cut2:])
    return tuple(ds.select(p) for p in parts)


def content_order(ds: LabeledDataset) -> list[int]:
    """Indices sorted by (label, pixel bytes): a row-order-independent
    canonical ordering used by trainers before their seeded shuffle."""
    return sorted(range(ds.n), key=lambda i: (int(ds.labels[i]), ds.images[i].tobytes()))


def write_gly(ds: LabeledDataset, sink) -> int:
    """Serialize to GLY1. Returns the number of bytes written."""
    if not ds.class_names:
        raise ArgumentError("refusing to write a dataset with an empty class table")
    n = ds.n
    h, w = ds.images.shape[1], ds.images.shape[2]
    if len(ds.class_names) > 0xFFFF:
        raise ArgumentError("GLY1 stores labels as u16; class table too large")

    blob = bytearray()
    blob += _GLY_MAGIC
    blob += struct.pack("<IIIII", _GLY_VERSION, n, h, w, len(ds.class_names))
    for name in ds.class_names:
        enc = name.encode("utf-8")
        if len(enc) > 0xFFFF:
            raise ArgumentError(f"class name too long for u16 length: {name!r}")
        blob += struct.pack("<H", len(enc)) + enc
    blob += ds.labels.astype("<u2").tobytes()
    pixels = np.floor(ds.images * 255.0 + 0.5).astype(np.uint8)
    blob += pixels.tobytes()

    data = bytes(blob)
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(data)
    else:
        sink.write(data)
    return len(data)


def read_gly(source) -> LabeledDataset:
    """Parse a GLY1 file back into a LabeledDataset."""
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = source.read()

    if len(data) < 4 or data[:4] != _GLY_MAGIC:
        raise CorruptFileError("bad GLY1 magic")
    if len(data) < 24:
        raise CorruptFileError("GLY1 header truncated")
    version, n, h, w, n_classes = struct.unpack_from("<IIIII", data, 4)
    if version != _GLY_VERSION:
        raise CorruptFileError(f"unsupported GLY1 version {version}")
    if n_classes == 0:
        raise CorruptFileError("GLY1 class table is empty")

    pos = 24
    names = []
    for _ in range(n_classes):
        if pos + 2 > len(data):
            raise CorruptFileError("GLY1 class table truncated")
        (blen,) = struct.unpack_from("<H", data, pos)
        pos += 2
        raw = data[pos : pos + blen]
        if len(raw) < blen:
            raise CorruptFileError("GLY1 class table truncated")
        try:
            names.append(raw.decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise CorruptFileError(f"GLY1 class name is not UTF-8: {exc}") from exc
        pos += blen

    if pos + 2 * n > len(data):
        raise CorruptFileError("GLY1 label block truncated")
    labels = np.frombuffer(data, dtype="<u2", count=n, offset=pos).astype(np.int64)
    pos += 2 * n

    n_px = n * h * w
    if pos + n_px > len(data):
        raise CorruptFileError("GLY1 pixel block truncated")
    pixels = np.frombuffer(data, dtype=np.uint8, count=n_px, offset=pos)
    images = pixels.astype(np.float64).reshape(n, h, w) / 255.0

    try:
        return LabeledDataset(images, labels, tuple(names))
    except ArgumentError as exc:
        raise CorruptFileError(f"GLY1 payload inconsistent: {exc}") from exc
