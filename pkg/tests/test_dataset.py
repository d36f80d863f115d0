import io

import numpy as np
import pytest

from glyphlab import (
    ArgumentError,
    CorruptFileError,
    EmptyDatasetError,
    GrayImage,
    LabeledDataset,
    Rng,
    SplitSpec,
    StratificationError,
    UnsupportedDepthError,
    UnsupportedFormatError,
    ingest_dir,
    load_pgm,
    read_gly,
    resize_bilinear,
    split_stratified,
    write_gly,
    write_pgm,
)


def pgm_bytes(width, height, pixels):
    return f"P5\n{width} {height}\n255\n".encode() + bytes(pixels)


def random_dataset(rng, n, h=4, w=5, n_classes=3):
    # pixel intensities quantized to the 8-bit grid, as any real source is
    images = np.array(
        [[[rng.randrange(256) / 255.0 for _ in range(w)] for _ in range(h)] for _ in range(n)]
    ).reshape(n, h, w)
    labels = np.array([rng.randrange(n_classes) for _ in range(n)], dtype=np.int64)
    names = tuple(chr(ord("a") + i) for i in range(n_classes))
    return LabeledDataset(images, labels, names)


class TestLoadPgm:
    def test_direct_decode(self):
        img = load_pgm(pgm_bytes(2, 2, [0, 64, 128, 255]))
        assert (img.width, img.height) == (2, 2)
        assert img.pixels.ravel().tolist() == [0, 64, 128, 255]

    def test_comments_in_header(self):
        data = b"P5\n# made by hand\n2 1\n255\n" + bytes([7, 9])
        assert load_pgm(data).pixels.ravel().tolist() == [7, 9]

    def test_ascii_variant_rejected(self):
        with pytest.raises(UnsupportedFormatError):
            load_pgm(b"P2\n2 2\n255\n0 1 2 3")

    def test_wrong_depth_rejected(self):
        with pytest.raises(UnsupportedDepthError):
            load_pgm(f"P5\n2 2\n65535\n".encode() + bytes(8))

    def test_truncated_raster(self):
        with pytest.raises(CorruptFileError):
            load_pgm(pgm_bytes(2, 2, [0, 64, 128]))

    def test_write_round_trip(self):
        img = GrayImage(3, 2, np.arange(6, dtype=np.uint8).reshape(2, 3))
        again = load_pgm(write_pgm(img))
        assert np.array_equal(again.pixels, img.pixels)


class TestResizeBilinear:
    def test_identity_resize(self):
        img = GrayImage(3, 2, np.array([[1, 2, 3], [4, 5, 6]], dtype=np.uint8))
        out = resize_bilinear(img, 3, 2)
        assert np.array_equal(out.pixels, img.pixels)

    def test_hand_computed_average(self):
        # all four pixels weigh 1/4 at the single output center: 138.75 -> 139
        img = GrayImage(2, 2, np.array([[0, 100], [200, 255]], dtype=np.uint8))
        assert resize_bilinear(img, 1, 1).pixels.tolist() == [[139]]

    def test_constant_image_stays_constant(self):
        img = GrayImage(3, 3, np.full((3, 3), 77, dtype=np.uint8))
        for w, h in ((1, 1), (2, 5), (7, 3)):
            assert (resize_bilinear(img, w, h).pixels == 77).all()

    def test_bad_extent(self):
        img = GrayImage(2, 2, np.zeros((2, 2), dtype=np.uint8))
        with pytest.raises(ArgumentError):
            resize_bilinear(img, 0, 2)


class TestIngestDir:
    def _write_tree(self, root, spec):
        for cname, files in spec.items():
            d = root / cname
            d.mkdir(parents=True)
            for fname, (w, h, px) in files.items():
                (d / fname).write_bytes(pgm_bytes(w, h, px))

    def test_enumeration_and_labels(self, tmp_path):
        self._write_tree(
            tmp_path,
            {
                "H": {f"g{i}.pgm": (2, 2, [10 * i] * 4) for i in range(3)},
                "A": {f"g{i}.pgm": (2, 2, [5 * i] * 4) for i in range(2)},
            },
        )
        ds = ingest_dir(tmp_path, side=4)
        assert ds.class_names == ("A", "H")
        assert ds.labels.tolist() == [0, 0, 1, 1, 1]
        assert ds.images.shape == (5, 4, 4)

    def test_normalization_endpoints(self, tmp_path):
        self._write_tree(tmp_path, {"A": {"x.pgm": (2, 1, [0, 255])}, "B": {"y.pgm": (1, 1, [128])}})
        ds = ingest_dir(tmp_path, side=2)
        assert ds.images.min() == 0.0
        assert ds.images.max() == 1.0

    def test_empty_root(self, tmp_path):
        with pytest.raises(EmptyDatasetError):
            ingest_dir(tmp_path)

    def test_corrupt_file_names_path(self, tmp_path):
        d = tmp_path / "A"
        d.mkdir()
        (d / "bad.pgm").write_bytes(b"P5\n2 2\n255\n\x00")
        with pytest.raises(CorruptFileError) as err:
            ingest_dir(tmp_path)
        assert "bad.pgm" in str(err.value)

    def test_many_classes(self, tmp_path):
        self._write_tree(
            tmp_path,
            {f"c{i:02d}": {"g.pgm": (2, 2, [i] * 4)} for i in range(34)},
        )
        ds = ingest_dir(tmp_path, side=2)
        assert len(ds.class_names) == 34
        assert ds.n == 34

    def test_order_independent_of_creation(self, tmp_path):
        a = tmp_path / "t1"
        b = tmp_path / "t2"
        files = {f"g{i}.pgm": (2, 2, [i, i, i, i]) for i in range(4)}
        self._write_tree(a, {"X": files})
        # create the same tree in reverse file order
        d = b / "X"
        d.mkdir(parents=True)
        for fname in reversed(sorted(files)):
            w, h, px = files[fname]
            (d / fname).write_bytes(pgm_bytes(w, h, px))
        da, db = ingest_dir(a, side=2), ingest_dir(b, side=2)
        assert np.array_equal(da.images, db.images)


class TestSplitStratified:
    def test_floor_rule_counts(self):
        ds = random_dataset(Rng(1), 0, n_classes=2)
        images = np.zeros((20, 2, 2))
        labels = np.array([0] * 10 + [1] * 10)
        ds = LabeledDataset(images, labels, ("a", "b"))
        train, val, test = split_stratified(ds, SplitSpec(0.7, 0.15, 0.15, seed=3))
        for c in range(2):
            assert int(np.sum(train.labels == c)) == 7
            assert int(np.sum(val.labels == c)) == 1
            assert int(np.sum(test.labels == c)) == 2

    def test_deterministic(self):
        ds = random_dataset(Rng(2), 40)
        s1 = split_stratified(ds, SplitSpec(seed=11))
        s2 = split_stratified(ds, SplitSpec(seed=11))
        for a, b in zip(s1, s2):
            assert np.array_equal(a.images, b.images)
            assert np.array_equal(a.labels, b.labels)

    def test_partition_property(self):
        ds = random_dataset(Rng(3), 60, n_classes=4)
        parts = split_stratified(ds, SplitSpec(seed=5))
        rows = np.concatenate([p.images.reshape(p.n, -1) for p in parts])
        joined = sorted(map(tuple, rows.tolist()))
        original = sorted(map(tuple, ds.images.reshape(ds.n, -1).tolist()))
        assert joined == original
        assert sum(p.n for p in parts) == ds.n

    def test_per_class_counts_near_fraction(self):
        rng = Rng(9)
        for trial in range(5):
            ds = random_dataset(rng, 50 + trial * 13, n_classes=3)
            if min(np.bincount(ds.labels, minlength=3)) < 3:
                continue
            parts = split_stratified(ds, SplitSpec(seed=trial))
            fracs = (0.70, 0.15, 0.15)
            for c in range(3):
                n_c = int(np.sum(ds.labels == c))
                for part, frac in zip(parts, fracs):
                    got = int(np.sum(part.labels == c))
                    assert abs(got - n_c * frac) <= 1.0

    def test_small_class_rejected(self):
        ds = LabeledDataset(
            np.zeros((5, 2, 2)), np.array([0, 0, 0, 1, 1]), ("big", "tiny")
        )
        with pytest.raises(StratificationError) as err:
            split_stratified(ds, SplitSpec(seed=0))
        assert "tiny" in str(err.value)

    def test_bad_fractions(self):
        with pytest.raises(ArgumentError):
            SplitSpec(0.5, 0.2, 0.2)
        with pytest.raises(ArgumentError):
            SplitSpec(1.0, -0.1, 0.1)


class TestGlyFormat:
    def test_round_trip_random_datasets(self):
        rng = Rng(31)
        for trial in range(20):
            ds = random_dataset(rng, rng.randrange(12), n_classes=1 + rng.randrange(4))
            buf = io.BytesIO()
            count = write_gly(ds, buf)
            assert count == len(buf.getvalue())
            back = read_gly(io.BytesIO(buf.getvalue()))
            assert np.array_equal(back.images, ds.images)
            assert np.array_equal(back.labels, ds.labels)
            assert back.class_names == ds.class_names

    def test_empty_dataset_round_trips(self):
        ds = LabeledDataset(np.zeros((0, 3, 3)), np.zeros(0, dtype=np.int64), ("only",))
        buf = io.BytesIO()
        write_gly(ds, buf)
        back = read_gly(io.BytesIO(buf.getvalue()))
        assert back.n == 0
        assert back.class_names == ("only",)

    def test_empty_class_table_rejected_on_read(self):
        import struct

        blob = b"GLY1" + struct.pack("<IIIII", 1, 0, 2, 2, 0)
        with pytest.raises(CorruptFileError):
            read_gly(io.BytesIO(blob))

    def test_bad_magic(self):
        with pytest.raises(CorruptFileError):
            read_gly(io.BytesIO(b"NOPE" + bytes(40)))

    def test_truncation_rejected(self):
        ds = random_dataset(Rng(5), 6)
        buf = io.BytesIO()
        write_gly(ds, buf)
        data = buf.getvalue()
        with pytest.raises(CorruptFileError):
            read_gly(io.BytesIO(data[: len(data) - 3]))

    def test_unicode_class_names(self):
        ds = LabeledDataset(
            np.zeros((2, 2, 2)), np.array([0, 1]), ("А", "Ж")
        )
        buf = io.BytesIO()
        write_gly(ds, buf)
        assert read_gly(io.BytesIO(buf.getvalue())).class_names == ("А", "Ж")


class TestLabeledDataset:
    def test_unsorted_class_names_rejected(self):
        with pytest.raises(ArgumentError):
            LabeledDataset(np.zeros((1, 2, 2)), np.array([0]), ("b", "a"))

    def test_duplicate_class_names_rejected(self):
        with pytest.raises(ArgumentError):
            LabeledDataset(np.zeros((1, 2, 2)), np.array([0]), ("a", "a"))

    def test_label_out_of_range(self):
        with pytest.raises(ArgumentError):
            LabeledDataset(np.zeros((1, 2, 2)), np.array([2]), ("a", "b"))

    def test_subset_by_classes_relabels(self):
        ds = random_dataset(Rng(8), 30, n_classes=3)
        sub = ds.subset_by_classes(["c", "a"])
        assert sub.class_names == ("a", "c")
        assert set(sub.labels.tolist()) <= {0, 1}
        assert sub.n == int(np.sum(ds.labels != 1))
