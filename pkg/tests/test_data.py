import numpy as np
import pytest

from fccnn.ctensor import ComplexTensor
from fccnn.data import (
    LabeledImageSet,
    encode,
    load_cifar,
    load_ctns_dataset,
    write_ctns_dataset,
)


def write_cifar10_batch(path, labels, pixels):
    """labels: [N], pixels: [N,3,32,32] uint8 in R,G,B plane order."""
    n = len(labels)
    rows = np.zeros((n, 3073), dtype=np.uint8)
    rows[:, 0] = labels
    rows[:, 1:] = pixels.reshape(n, 3072)
    rows.tofile(path)


def write_cifar100_file(path, coarse, fine, pixels):
    n = len(fine)
    rows = np.zeros((n, 3074), dtype=np.uint8)
    rows[:, 0] = coarse
    rows[:, 1] = fine
    rows[:, 2:] = pixels.reshape(n, 3072)
    rows.tofile(path)


@pytest.fixture
def cifar10_dir(tmp_path, rng):
    d = tmp_path / "cifar-10-batches-bin"
    d.mkdir()
    n_per = 4
    for i in range(1, 6):
        labels = rng.integers(0, 10, n_per).astype(np.uint8)
        pixels = rng.integers(0, 256, (n_per, 3, 32, 32)).astype(np.uint8)
        write_cifar10_batch(d / f"data_batch_{i}.bin", labels, pixels)
    labels = rng.integers(0, 10, n_per).astype(np.uint8)
    pixels = rng.integers(0, 256, (n_per, 3, 32, 32)).astype(np.uint8)
    write_cifar10_batch(d / "test_batch.bin", labels, pixels)
    return tmp_path


class TestCifarLoader:
    def test_train_concatenates_batches(self, cifar10_dir):
        dset = load_cifar(cifar10_dir, "cifar10", "train")
        assert dset.n == 20  # 5 batches of 4
        assert dset.images.shape == (20, 3, 32, 32)
        assert dset.num_classes == 10
        assert np.all(dset.images.im == 0)

    def test_test_split(self, cifar10_dir):
        dset = load_cifar(cifar10_dir, "cifar10", "test")
        assert dset.n == 4 and dset.split == "test"

    def test_single_record_values(self, tmp_path):
        d = tmp_path / "cifar-10-batches-bin"
        d.mkdir()
        pixels = np.full((1, 3, 32, 32), 255, dtype=np.uint8)
        pixels[0, 1] = 0  # G plane dark
        write_cifar10_batch(d / "data_batch_1.bin", np.array([7], dtype=np.uint8), pixels)
        for i in range(2, 6):
            write_cifar10_batch(d / f"data_batch_{i}.bin", np.array([0], np.uint8),
                                np.zeros((1, 3, 32, 32), np.uint8))
        dset = load_cifar(tmp_path, "cifar10", "train")
        assert dset.labels[0] == 7
        assert dset.images.re[0, 0, 0, 0] == 1.0  # 255 -> exactly 1.0
        assert dset.images.re[0, 1, 16, 16] == 0.0

    def test_plane_order_is_rgb(self, tmp_path):
        d = tmp_path / "cifar-10-batches-bin"
        d.mkdir()
        pixels = np.zeros((1, 3, 32, 32), dtype=np.uint8)
        pixels[0, 0, 0, 0] = 10  # R
        pixels[0, 2, 31, 31] = 20  # B
        write_cifar10_batch(d / "data_batch_1.bin", np.array([0], np.uint8), pixels)
        for i in range(2, 6):
            write_cifar10_batch(d / f"data_batch_{i}.bin", np.array([0], np.uint8),
                                np.zeros((1, 3, 32, 32), np.uint8))
        dset = load_cifar(tmp_path, "cifar10", "train")
        assert dset.images.re[0, 0, 0, 0] == pytest.approx(10 / 255, rel=1e-6)
        assert dset.images.re[0, 2, 31, 31] == pytest.approx(20 / 255, rel=1e-6)

    def test_cifar100_reads_fine_label(self, tmp_path, rng):
        d = tmp_path / "cifar-100-binary"
        d.mkdir()
        pixels = rng.integers(0, 256, (3, 3, 32, 32)).astype(np.uint8)
        write_cifar100_file(d / "train.bin", np.array([1, 2, 3]), np.array([42, 99, 0]), pixels)
        write_cifar100_file(d / "test.bin", np.array([0]), np.array([5]),
                            rng.integers(0, 256, (1, 3, 32, 32)).astype(np.uint8))
        train = load_cifar(tmp_path, "cifar100", "train")
        np.testing.assert_array_equal(train.labels, [42, 99, 0])
        assert train.num_classes == 100

    def test_missing_directory(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_cifar(tmp_path / "nope", "cifar10", "train")

    def test_record_size_mismatch(self, tmp_path):
        d = tmp_path / "cifar-10-batches-bin"
        d.mkdir()
        (d / "data_batch_1.bin").write_bytes(b"\x00" * 100)
        with pytest.raises(ValueError, match="record"):
            load_cifar(tmp_path, "cifar10", "train")

    def test_label_out_of_range(self, tmp_path):
        d = tmp_path / "cifar-10-batches-bin"
        d.mkdir()
        write_cifar10_batch(d / "data_batch_1.bin", np.array([11], np.uint8),
                            np.zeros((1, 3, 32, 32), np.uint8))
        for i in range(2, 6):
            write_cifar10_batch(d / f"data_batch_{i}.bin", np.array([0], np.uint8),
                                np.zeros((1, 3, 32, 32), np.uint8))
        with pytest.raises(ValueError, match="out of range"):
            load_cifar(tmp_path, "cifar10", "train")

    def test_loader_determinism(self, cifar10_dir):
        a = load_cifar(cifar10_dir, "cifar10", "train")
        b = load_cifar(cifar10_dir, "cifar10", "train")
        assert np.array_equal(a.images.re, b.images.re)
        assert np.array_equal(a.labels, b.labels)


class TestCtnsDataset:
    def test_round_trip(self, tmp_path, rng):
        images = ComplexTensor(rng.uniform(0, 1, (2, 3, 32, 32)).astype(np.float32))
        dset = LabeledImageSet(images, np.array([3, 9]), num_classes=10)
        write_ctns_dataset(dset, tmp_path / "d")
        back = load_ctns_dataset(tmp_path / "d")
        assert back.n == 2 and back.num_classes == 10
        np.testing.assert_array_equal(back.labels, [3, 9])
        np.testing.assert_array_equal(back.images.re, dset.images.re)

    def test_count_mismatch_rejected(self, tmp_path, rng):
        from fccnn.ctensor import write_ctns

        d = tmp_path / "d"
        d.mkdir()
        write_ctns(ComplexTensor(rng.uniform(size=(3, 3, 4, 4)).astype(np.float32)),
                   d / "images.ctns")
        write_ctns(ComplexTensor(np.zeros(2, dtype=np.float32)), d / "labels.ctns")
        with pytest.raises(ValueError, match="images but"):
            load_ctns_dataset(d)

    def test_encoding_tag_round_trips(self, tmp_path, rng):
        images = ComplexTensor(rng.uniform(0, 1, (3, 3, 8, 8)).astype(np.float32))
        dset = LabeledImageSet(images, rng.integers(0, 10, 3), num_classes=10)
        sliding = encode(dset, "sliding")
        write_ctns_dataset(sliding, tmp_path / "enc")
        back = load_ctns_dataset(tmp_path / "enc")
        assert back.encoding == "sliding"
        assert encode(back, "sliding") is back  # identity on same encoding
        with pytest.raises(ValueError, match="expects an rgb"):
            encode(back, "lab")

    def test_non_integer_labels_rejected(self, tmp_path, rng):
        from fccnn.ctensor import write_ctns

        d = tmp_path / "d"
        d.mkdir()
        write_ctns(ComplexTensor(rng.uniform(size=(2, 3, 4, 4)).astype(np.float32)),
                   d / "images.ctns")
        write_ctns(ComplexTensor(np.array([0.5, 1.0], dtype=np.float32)), d / "labels.ctns")
        with pytest.raises(ValueError, match="integers"):
            load_ctns_dataset(d)


class TestEncodings:
    @pytest.fixture
    def small_set(self, rng):
        images = ComplexTensor(rng.uniform(0, 1, (4, 3, 8, 8)).astype(np.float32))
        return LabeledImageSet(images, rng.integers(0, 10, 4), num_classes=10)

    def test_rgb_is_identity(self, small_set):
        out = encode(small_set, "rgb")
        assert out.images is small_set.images

    def test_lab_white_point(self):
        white = ComplexTensor(np.ones((1, 3, 2, 2), dtype=np.float32))
        dset = LabeledImageSet(white, np.array([0]), num_classes=10)
        out = encode(dset, "lab")
        np.testing.assert_allclose(out.images.re[0, 0], 1.0, atol=1e-4)  # L/100
        np.testing.assert_allclose(out.images.re[0, 1], 0.0, atol=1e-3)  # a/110
        np.testing.assert_allclose(out.images.im[0, 1], 0.0, atol=1e-3)  # b/110

    def test_lab_reference_oracle_midgray(self):
        # independent scalar reference computation for sRGB 0.5 gray:
        # linear = ((0.5+0.055)/1.055)^2.4; X=Y=Z ratios give a=b~0 and
        # L = 116 f(y) - 16 with y = linear
        lin = ((0.5 + 0.055) / 1.055) ** 2.4
        fy = lin ** (1 / 3) if lin > (6 / 29) ** 3 else lin / (3 * (6 / 29) ** 2) + 4 / 29
        expect_l = 116 * fy - 16
        gray = ComplexTensor(np.full((1, 3, 1, 1), 0.5, dtype=np.float32))
        out = encode(LabeledImageSet(gray, np.array([0]), num_classes=10), "lab")
        assert out.images.re[0, 0, 0, 0] == pytest.approx(expect_l / 100, rel=1e-3)
        assert abs(out.images.re[0, 1, 0, 0]) < 1e-3

    def test_sliding_endpoints(self):
        vals = np.zeros((1, 3, 1, 2), dtype=np.float32)
        vals[0, :, 0, 1] = 1.0
        dset = LabeledImageSet(ComplexTensor(vals), np.array([0]), num_classes=10)
        out = encode(dset, "sliding")
        assert out.images.re[0, 0, 0, 0] == 0.0 and out.images.im[0, 0, 0, 0] == 0.0
        assert out.images.re[0, 0, 0, 1] == pytest.approx(1.0)
        assert out.images.im[0, 0, 0, 1] == pytest.approx(0.0, abs=1e-6)

    def test_sliding_magnitude_equals_pixel(self, small_set):
        out = encode(small_set, "sliding")
        np.testing.assert_allclose(
            np.hypot(out.images.re, out.images.im), small_set.images.re,
            rtol=1e-5, atol=1e-7,
        )

    @pytest.mark.parametrize("target", ["lab", "sliding"])
    def test_complex_energy_nonzero(self, small_set, target):
        out = encode(small_set, target)
        assert np.abs(out.images.im).sum() > 0

    @pytest.mark.parametrize("target", ["rgb", "lab", "sliding"])
    def test_labels_and_shape_preserved(self, small_set, target):
        out = encode(small_set, target)
        assert out.images.shape == small_set.images.shape
        np.testing.assert_array_equal(out.labels, small_set.labels)
        assert out.encoding == target

    def test_non_rgb_input_rejected(self, small_set):
        lab = encode(small_set, "lab")
        with pytest.raises(ValueError, match="rgb"):
            encode(lab, "sliding")

    def test_unknown_encoding(self, small_set):
        with pytest.raises(ValueError, match="unknown encoding"):
            encode(small_set, "hsv")


class TestLabeledImageSet:
    def test_take_subset(self, rng):
        images = ComplexTensor(rng.uniform(size=(6, 3, 4, 4)).astype(np.float32))
        dset = LabeledImageSet(images, np.arange(6), num_classes=10)
        sub = dset.take([4, 1])
        assert sub.n == 2
        np.testing.assert_array_equal(sub.labels, [4, 1])
        np.testing.assert_array_equal(sub.images.re[0], images.re[4])

    def test_label_bounds_validated(self, rng):
        images = ComplexTensor(rng.uniform(size=(2, 3, 4, 4)).astype(np.float32))
        with pytest.raises(ValueError, match="labels outside"):
            LabeledImageSet(images, np.array([0, 10]), num_classes=10)

    def test_count_consistency_validated(self, rng):
        images = ComplexTensor(rng.uniform(size=(2, 3, 4, 4)).astype(np.float32))
        with pytest.raises(ValueError, match="inconsistent"):
            LabeledImageSet(images, np.array([0]), num_classes=10)

    def test_rgb_tag_requires_real_images(self, rng):
        re = rng.uniform(size=(2, 3, 4, 4)).astype(np.float32)
        complex_images = ComplexTensor(re, re.copy())
        with pytest.raises(ValueError, match="zero im plane"):
            LabeledImageSet(complex_images, np.array([0, 1]), num_classes=10)
        # fine under a complex encoding tag
        LabeledImageSet(complex_images, np.array([0, 1]), num_classes=10, encoding="sliding")
