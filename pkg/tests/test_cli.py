"""End-to-end checks of every subcommand, exit codes, and byte-level
determinism of the outputs."""

import json

import numpy as np
import pytest

from conftest import make_shapes_dataset
from glyphlab import read_gly, write_gly
from glyphlab.cli import main


def write_pgm_tree(root, spec):
    from glyphlab import GrayImage, write_pgm

    for cname, images in spec.items():
        d = root / cname
        d.mkdir(parents=True)
        for fname, px in images.items():
            arr = np.asarray(px, dtype=np.uint8)
            (d / fname).write_bytes(write_pgm(GrayImage(arr.shape[1], arr.shape[0], arr)))


@pytest.fixture
def shapes_gly(tmp_path):
    """A small 2-class dataset file at CNN-compatible resolution."""
    path = tmp_path / "shapes.gly"
    write_gly(make_shapes_dataset(8, side=32, seed=50, noise=0.1), path)
    return path


@pytest.fixture
def shapes_val_gly(tmp_path):
    path = tmp_path / "shapes_val.gly"
    write_gly(make_shapes_dataset(3, side=32, seed=51, noise=0.1), path)
    return path


class TestIngest:
    def test_toy_tree(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        tree = {
            "A": {f"g{i}.pgm": rng.integers(0, 256, (6, 5)) for i in range(2)},
            "H": {f"g{i}.pgm": rng.integers(0, 256, (4, 4)) for i in range(3)},
        }
        write_pgm_tree(tmp_path / "raw", tree)
        out = tmp_path / "ds.gly"
        rc = main(["ingest", "--input", str(tmp_path / "raw"), "--output", str(out), "--size", "64"])
        assert rc == 0
        assert capsys.readouterr().out.strip() == "n=5 classes=2 size=64"
        ds = read_gly(out)
        assert ds.class_names == ("A", "H")
        assert ds.images.shape == (5, 64, 64)
        assert (out.parent / "ds.gly.manifest.json").exists()

    def test_missing_dir_exit_2(self, tmp_path):
        rc = main(["ingest", "--input", str(tmp_path / "nope"), "--output", str(tmp_path / "x.gly")])
        assert rc == 2

    def test_corrupt_pgm_exit_3(self, tmp_path):
        d = tmp_path / "raw" / "A"
        d.mkdir(parents=True)
        (d / "bad.pgm").write_bytes(b"P5\n4 4\n255\nxx")
        rc = main(["ingest", "--input", str(tmp_path / "raw"), "--output", str(tmp_path / "x.gly")])
        assert rc == 3


class TestTsne:
    def _run(self, tmp_path, gly, seed="5", iters="40"):
        csv = tmp_path / "emb.csv"
        svg = tmp_path / "emb.svg"
        rc = main(
            ["tsne", "--input", str(gly), "--iters", iters, "--perplexity", "4",
             "--seed", seed, "--out-csv", str(csv), "--out-svg", str(svg)]
        )
        return rc, csv, svg

    def test_csv_and_svg_shape(self, tmp_path, shapes_gly):
        rc, csv, svg = self._run(tmp_path, shapes_gly)
        assert rc == 0
        lines = csv.read_text().splitlines()
        assert lines[0] == "x,y,z,label,class_name"
        data = [l for l in lines if not l.startswith("#")]
        kl = [l for l in lines if l.startswith("#kl,")]
        assert len(data) == 1 + 16
        assert len(kl) == 40
        assert data[1].endswith(",disk") or data[1].endswith(",square")
        assert "<svg" in svg.read_text()

    def test_distinct_color_per_class(self, tmp_path):
        # ten classes, a few samples each
        import string

        from glyphlab import LabeledDataset

        rng = np.random.default_rng(3)
        names = tuple(string.ascii_uppercase[:10])
        images = rng.random((40, 6, 6))
        labels = np.repeat(np.arange(10), 4)
        path = tmp_path / "ten.gly"
        write_gly(LabeledDataset(images.round(2), labels, names), path)
        rc, csv, svg = self._run(tmp_path, path)
        assert rc == 0
        text = svg.read_text()
        fills = {line.split('fill="')[1].split('"')[0] for line in text.splitlines() if "<circle" in line}
        assert len(fills) == 10

    def test_unknown_class_exit_2(self, tmp_path, shapes_gly):
        rc = main(
            ["tsne", "--input", str(shapes_gly), "--classes", "disk,ghost",
             "--out-csv", str(tmp_path / "a.csv"), "--out-svg", str(tmp_path / "a.svg")]
        )
        assert rc == 2

    def test_single_class_exit_2(self, tmp_path, shapes_gly):
        rc = main(
            ["tsne", "--input", str(shapes_gly), "--classes", "disk",
             "--out-csv", str(tmp_path / "a.csv"), "--out-svg", str(tmp_path / "a.svg")]
        )
        assert rc == 2

    def test_byte_identical_reruns(self, tmp_path, shapes_gly):
        _, csv1, svg1 = self._run(tmp_path / "r1", shapes_gly)
        _, csv2, svg2 = self._run(tmp_path / "r2", shapes_gly)
        assert csv1.read_bytes() == csv2.read_bytes()
        assert svg1.read_bytes() == svg2.read_bytes()

    def test_env_seed_used_when_flag_absent(self, tmp_path, shapes_gly, monkeypatch):
        csv1 = tmp_path / "e1.csv"
        csv2 = tmp_path / "e2.csv"
        monkeypatch.setenv("GLYPHLAB_SEED", "77")
        main(["tsne", "--input", str(shapes_gly), "--iters", "30",
              "--out-csv", str(csv1), "--out-svg", str(tmp_path / "e1.svg")])
        monkeypatch.delenv("GLYPHLAB_SEED")
        main(["tsne", "--input", str(shapes_gly), "--iters", "30", "--seed", "77",
              "--out-csv", str(csv2), "--out-svg", str(tmp_path / "e2.svg")])
        assert csv1.read_bytes() == csv2.read_bytes()


class TestDistmap:
    def test_symmetric_csv_with_ids(self, tmp_path, shapes_gly):
        csv = tmp_path / "d.csv"
        svg = tmp_path / "d.svg"
        rc = main(["distmap", "--input", str(shapes_gly), "--classes", "disk,square",
                   "--out-csv", str(csv), "--out-svg", str(svg)])
        assert rc == 0
        lines = csv.read_text().splitlines()
        n = 16
        assert len(lines) == n + 1
        header = lines[0].split(",")
        assert header[0] == "id" and len(header) == n + 1
        mat = np.array([[float(v) for v in l.split(",")[1:]] for l in lines[1:]])
        assert np.allclose(mat, mat.T)
        assert np.allclose(np.diag(mat), 0.0)
        # ribbon strips present in the svg
        assert svg.read_text().count("<rect") > n

    def test_absent_class_exit_2(self, tmp_path, shapes_gly):
        rc = main(["distmap", "--input", str(shapes_gly), "--classes", "disk,ghost",
                   "--out-csv", str(tmp_path / "d.csv"), "--out-svg", str(tmp_path / "d.svg")])
        assert rc == 2


class TestTrainCommands:
    def test_train_mlr_writes_model_history_manifest(self, tmp_path, shapes_gly, shapes_val_gly):
        model_out = tmp_path / "m.gmd"
        hist_out = tmp_path / "h.csv"
        rc = main(["train-mlr", "--train", str(shapes_gly), "--val", str(shapes_val_gly),
                   "--epochs", "20", "--lr", "0.1", "--seed", "3",
                   "--model-out", str(model_out), "--history-out", str(hist_out)])
        assert rc == 0
        lines = hist_out.read_text().splitlines()
        assert lines[0] == "epoch,train_loss,train_acc,val_loss,val_acc"
        assert len(lines) == 21
        assert model_out.exists()
        manifest = json.loads((tmp_path / "m.gmd.manifest.json").read_text())
        assert manifest["subcommand"] == "train-mlr"
        assert manifest["seed"] == 3

    def test_train_mlr_prints_overfit_epoch(self, tmp_path, capsys):
        train = tmp_path / "t.gly"
        val = tmp_path / "v.gly"
        write_gly(make_shapes_dataset(6, side=16, seed=81, noise=0.35, label_noise=0.3), train)
        write_gly(make_shapes_dataset(6, side=16, seed=82, noise=0.35), val)
        rc = main(["train-mlr", "--train", str(train), "--val", str(val),
                   "--epochs", "25", "--lr", "3.0", "--seed", "1",
                   "--model-out", str(tmp_path / "m.gmd"), "--history-out", str(tmp_path / "h.csv")])
        assert rc == 0
        assert "overfit_epoch=5" in capsys.readouterr().out

    def test_train_cnn_and_evaluate(self, tmp_path, shapes_gly, shapes_val_gly, capsys):
        model_out = tmp_path / "c.gmd"
        hist_out = tmp_path / "ch.csv"
        rc = main(["train-cnn", "--train", str(shapes_gly), "--val", str(shapes_val_gly),
                   "--epochs", "2", "--batch", "4", "--lr", "0.001", "--seed", "4",
                   "--model-out", str(model_out), "--history-out", str(hist_out)])
        assert rc == 0
        assert len(hist_out.read_text().splitlines()) == 3

        out_csv = tmp_path / "eval.csv"
        roc_svg = tmp_path / "roc.svg"
        rc = main(["evaluate", "--model", str(model_out), "--data", str(shapes_val_gly),
                   "--out-csv", str(out_csv), "--roc-svg", str(roc_svg)])
        assert rc == 0
        text = out_csv.read_text()
        assert "macro_auc," in text
        assert "accuracy," in text
        assert "# confusion matrix" in text
        svg = roc_svg.read_text()
        assert "polyline" in svg

    def test_train_cnn_rejects_non_binary(self, tmp_path, shapes_val_gly):
        from glyphlab import LabeledDataset

        rng = np.random.default_rng(5)
        images = rng.random((9, 32, 32)).round(2)
        ds = LabeledDataset(images, np.repeat(np.arange(3), 3), ("a", "b", "c"))
        path = tmp_path / "three.gly"
        write_gly(ds, path)
        rc = main(["train-cnn", "--train", str(path), "--val", str(shapes_val_gly),
                   "--epochs", "1", "--model-out", str(tmp_path / "x.gmd"),
                   "--history-out", str(tmp_path / "x.csv")])
        assert rc == 2

    def test_unknown_augment_exit_2(self, tmp_path, shapes_gly, shapes_val_gly, capsys):
        with pytest.raises(SystemExit) as err:
            main(["train-cnn", "--train", str(shapes_gly), "--val", str(shapes_val_gly),
                  "--augment", "sharpen", "--model-out", str(tmp_path / "x.gmd"),
                  "--history-out", str(tmp_path / "x.csv")])
        assert err.value.code == 2

    def test_train_history_byte_identical(self, tmp_path, shapes_gly, shapes_val_gly):
        outs = []
        for sub in ("r1", "r2"):
            d = tmp_path / sub
            d.mkdir()
            main(["train-cnn", "--train", str(shapes_gly), "--val", str(shapes_val_gly),
                  "--epochs", "2", "--batch", "4", "--lr", "0.001", "--seed", "9",
                  "--model-out", str(d / "m.gmd"), "--history-out", str(d / "h.csv")])
            outs.append((d / "h.csv").read_bytes())
            outs.append((d / "m.gmd").read_bytes())
        assert outs[0] == outs[2]
        assert outs[1] == outs[3]


class TestEvaluateErrors:
    def test_model_data_mismatch_exit_2(self, tmp_path, shapes_gly):
        # regression trained on 2 classes, evaluated against 3-class data
        from glyphlab import LabeledDataset, MlrModel, save_model

        model = MlrModel(np.zeros((2, 4)), np.zeros(2), ("a", "b"))
        mpath = tmp_path / "m.gmd"
        save_model(model, mpath)
        rng = np.random.default_rng(6)
        ds = LabeledDataset(rng.random((9, 2, 2)).round(2), np.repeat(np.arange(3), 3), ("a", "b", "c"))
        dpath = tmp_path / "d.gly"
        write_gly(ds, dpath)
        rc = main(["evaluate", "--model", str(mpath), "--data", str(dpath),
                   "--out-csv", str(tmp_path / "e.csv"), "--roc-svg", str(tmp_path / "e.svg")])
        assert rc == 2


class TestAugmentPreview:
    def test_none_policy_outputs_identical_pgms(self, tmp_path, shapes_gly):
        out = tmp_path / "previews"
        rc = main(["augment-preview", "--input", str(shapes_gly), "--policy", "none",
                   "--count", "1", "--seed", "2", "--out", str(out)])
        assert rc == 0
        ds = read_gly(shapes_gly)
        from glyphlab import load_pgm

        files = sorted(out.glob("*.pgm"))
        assert len(files) == ds.n
        img0 = load_pgm(files[0].read_bytes())
        assert np.array_equal(img0.pixels, np.floor(ds.images[0] * 255.0 + 0.5).astype(np.uint8))

    def test_lossless_outputs_are_flips(self, tmp_path, shapes_gly):
        out = tmp_path / "flips"
        rc = main(["augment-preview", "--input", str(shapes_gly), "--policy", "lossless",
                   "--count", "1", "--seed", "3", "--out", str(out)])
        assert rc == 0
        from glyphlab import load_pgm

        ds = read_gly(shapes_gly)
        for i, f in enumerate(sorted(out.glob("*.pgm"))):
            got = load_pgm(f.read_bytes()).pixels
            src = np.floor(ds.images[i] * 255.0 + 0.5).astype(np.uint8)
            candidates = [src, src[:, ::-1], src[::-1, :], src[::-1, ::-1]]
            assert any(np.array_equal(got, c) for c in candidates)

    def test_fixed_seed_reproduces_files(self, tmp_path, shapes_gly):
        blobs = []
        for sub in ("p1", "p2"):
            out = tmp_path / sub
            main(["augment-preview", "--input", str(shapes_gly), "--policy", "lossy",
                  "--count", "2", "--seed", "8", "--out", str(out)])
            blobs.append(b"".join(f.read_bytes() for f in sorted(out.glob("*.pgm"))))
        assert blobs[0] == blobs[1]

    def test_bad_policy_exit_2(self, tmp_path, shapes_gly):
        rc = main(["augment-preview", "--input", str(shapes_gly), "--policy", "wobble",
                   "--count", "1", "--out", str(tmp_path / "x")])
        assert rc == 2
