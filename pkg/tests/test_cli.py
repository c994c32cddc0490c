import json

import numpy as np
import pytest

from fccnn.cli import main
from fccnn.ctensor import ComplexTensor
from fccnn.data import LabeledImageSet, write_ctns_dataset


@pytest.fixture
def svhn_style_dir(tmp_path, rng):
    """CTNS dataset laid out the way `train --dataset svhn-ctns` expects."""
    for split, n in (("train", 40), ("test", 16)):
        images = ComplexTensor(rng.uniform(0, 1, (n, 3, 32, 32)).astype(np.float32))
        labels = rng.integers(0, 10, n)
        write_ctns_dataset(
            LabeledImageSet(images, labels, num_classes=10, split=split),
            tmp_path / "svhn-ctns" / split,
        )
    return tmp_path


class TestCount:
    def test_fc_cnn_totals(self, capsys):
        assert main(["count", "--model", "fc-cnn", "--classes", "100"]) == 0
        out = capsys.readouterr().out
        assert "34244" in out and "986852" in out

    def test_real_cnn(self, capsys):
        assert main(["count", "--model", "real-cnn", "--classes", "10"]) == 0
        assert "22634" in capsys.readouterr().out


class TestGradcheck:
    def test_passes_with_one_point(self, capsys):
        assert main(["gradcheck", "--points", "1"]) == 0
        out = capsys.readouterr().out
        assert "hinge->gate->loss" in out and "ok" in out


class TestEncode:
    def test_reencode_dataset(self, tmp_path, capsys, rng):
        images = ComplexTensor(rng.uniform(0, 1, (6, 3, 8, 8)).astype(np.float32))
        src = tmp_path / "src"
        write_ctns_dataset(LabeledImageSet(images, rng.integers(0, 10, 6), num_classes=10), src)
        dst = tmp_path / "dst"
        code = main(["encode", "--in", str(src), "--encoding", "sliding", "--out", str(dst)])
        assert code == 0
        from fccnn.data import load_ctns_dataset

        out = load_ctns_dataset(dst)
        assert np.abs(out.images.im).sum() > 0

    def test_missing_input_is_oneline_error(self, tmp_path, capsys):
        code = main(["encode", "--in", str(tmp_path / "nope"), "--encoding", "rgb",
                     "--out", str(tmp_path / "o")])
        assert code == 1
        err = capsys.readouterr().err
        assert err.startswith("error: ")
        assert "\n" not in err.strip()


class TestTrainEval:
    def test_end_to_end_on_ctns_dataset(self, svhn_style_dir, tmp_path, capsys):
        out_dir = tmp_path / "run"
        code = main([
            "train", "--model", "fc-cnn", "--dataset", "svhn-ctns",
            "--data-dir", str(svhn_style_dir), "--epochs", "2",
            "--batch-size", "16", "--seed", "3", "--out", str(out_dir),
        ])
        assert code == 0
        assert (out_dir / "metrics.csv").exists()
        assert (out_dir / "curves.svg").exists()
        assert (out_dir / "summary.txt").exists()
        assert (out_dir / "final" / "manifest.json").exists()
        assert (out_dir / "features" / "features.ctns").exists()
        result = json.loads((out_dir / "result.json").read_text())
        assert 0.0 <= result["final_test_acc"] <= 1.0
        lines = (out_dir / "metrics.csv").read_text().strip().split("\n")
        assert len(lines) == 1 + 4  # header + 2 epochs x 2 stages

        code = main([
            "eval", "--checkpoint", str(out_dir / "final"), "--dataset", "svhn-ctns",
            "--data-dir", str(svhn_style_dir), "--split", "test",
        ])
        assert code == 0
        assert "accuracy" in capsys.readouterr().out

    def test_no_stage2_flag(self, svhn_style_dir, tmp_path):
        out_dir = tmp_path / "run"
        code = main([
            "train", "--model", "real-cnn", "--dataset", "svhn-ctns",
            "--data-dir", str(svhn_style_dir), "--epochs", "1",
            "--batch-size", "16", "--no-stage2", "--out", str(out_dir),
        ])
        assert code == 0
        lines = (tmp_path / "run" / "metrics.csv").read_text().strip().split("\n")
        assert len(lines) == 2  # header + 1 stage-1 epoch

    def test_env_var_data_dir(self, svhn_style_dir, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("FCCNN_DATA_DIR", str(svhn_style_dir))
        out_dir = tmp_path / "run"
        code = main([
            "train", "--dataset", "svhn-ctns", "--epochs", "1",
            "--batch-size", "16", "--out", str(out_dir),
        ])
        assert code == 0

    def test_missing_data_dir_is_error(self, tmp_path, capsys, monkeypatch):
        monkeypatch.delenv("FCCNN_DATA_DIR", raising=False)
        code = main(["train", "--dataset", "cifar10", "--epochs", "1",
                     "--out", str(tmp_path / "x")])
        assert code == 1
        assert capsys.readouterr().err.startswith("error: ")

    def test_cifar_train_with_limits_and_encoding(self, tmp_path, rng):
        from test_data import write_cifar10_batch

        d = tmp_path / "cifar-10-batches-bin"
        d.mkdir()
        for name in [f"data_batch_{i}.bin" for i in range(1, 6)] + ["test_batch.bin"]:
            labels = rng.integers(0, 10, 8).astype(np.uint8)
            pixels = rng.integers(0, 256, (8, 3, 32, 32)).astype(np.uint8)
            write_cifar10_batch(d / name, labels, pixels)
        out_dir = tmp_path / "run"
        code = main([
            "train", "--dataset", "cifar10", "--data-dir", str(tmp_path),
            "--encoding", "sliding", "--epochs", "1", "--batch-size", "16",
            "--train-limit", "24", "--test-limit", "8", "--no-stage2",
            "--out", str(out_dir),
        ])
        assert code == 0
        assert (out_dir / "final" / "manifest.json").exists()
