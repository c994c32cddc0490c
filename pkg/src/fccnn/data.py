"""Dataset ingestion and complex input encodings.

CIFAR-10/100 are read from their canonical binary batch files. Converted
datasets (e.g. SVHN) arrive as CTNS image/label tensor pairs. Pixels are
scaled to [0,1]; no mean/std normalization and no augmentation.

Encodings map real RGB images to complex channels:
  rgb      identity (im plane zero)
  lab      sRGB -> CIELAB (D65): L/100, (a + i b)/110, chroma/155 + i hue/pi
  sliding  per channel p in [0,1] -> p * exp(i 2 pi p)
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace

import numpy as np

from .ctensor import ComplexTensor, read_ctns, write_ctns

ENCODINGS = ("rgb", "lab", "sliding")

_CIFAR10_FILES = {
    "train": [f"data_batch_{i}.bin" for i in range(1, 6)],
    "test": ["test_batch.bin"],
}
_CIFAR100_FILES = {"train": ["train.bin"], "test": ["test.bin"]}
_CANONICAL_SUBDIR = {"cifar10": "cifar-10-batches-bin", "cifar100": "cifar-100-binary"}


@dataclass(frozen=True)
class LabeledImageSet:
    images: ComplexTensor  # [N,3,H,W]
    labels: np.ndarray  # [N] ints
    num_classes: int
    encoding: str = "rgb"
    split: str = "train"

    def __post_init__(self):
        if self.images.re.ndim != 4:
            raise ValueError(f"images must be [N,C,H,W], got {self.images.shape}")
        if self.labels.ndim != 1 or self.labels.shape[0] != self.images.shape[0]:
            raise ValueError(
                f"labels shape {self.labels.shape} inconsistent with "
                f"{self.images.shape[0]} images"
            )
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise ValueError(f"labels outside [0, {self.num_classes})")
        if self.encoding == "rgb" and np.any(self.images.im != 0):
            raise ValueError("rgb-encoded images must have a zero im plane")

    @property
    def n(self) -> int:
        return int(self.images.shape[0])

    def take(self, indices) -> "LabeledImageSet":
        indices = np.asarray(indices)
        images = ComplexTensor._wrap(self.images.re[indices], self.images.im[indices])
        return replace(self, images=images, labels=self.labels[indices])


def _resolve_dir(data_dir, variant: str) -> str:
    data_dir = os.path.expanduser(str(data_dir))
    names = _CIFAR10_FILES if variant == "cifar10" else _CIFAR100_FILES
    probe = names["train"][0]
    for candidate in (data_dir, os.path.join(data_dir, _CANONICAL_SUBDIR[variant])):
        if os.path.exists(os.path.join(candidate, probe)):
            return candidate
    raise FileNotFoundError(
        f"{variant} batch files not found under {data_dir} "
        f"(looked for {probe}, also in {_CANONICAL_SUBDIR[variant]}/)"
    )


def load_cifar(data_dir, variant: str = "cifar10", split: str = "train") -> LabeledImageSet:
    """Read the canonical binary batches: each record is one label byte
    (cifar100: coarse byte then fine byte) followed by 3072 pixel bytes,
    R plane then G then B, row-major 32x32."""
    if variant not in ("cifar10", "cifar100"):
        raise ValueError(f"unknown variant {variant!r}")
    if split not in ("train", "test"):
        raise ValueError(f"unknown split {split!r}")
    base = _resolve_dir(data_dir, variant)
    files = (_CIFAR10_FILES if variant == "cifar10" else _CIFAR100_FILES)[split]
    label_bytes = 1 if variant == "cifar10" else 2
    record = label_bytes + 3072
    num_classes = 10 if variant == "cifar10" else 100
    images, labels = [], []
    for fname in files:
        path = os.path.join(base, fname)
        if not os.path.exists(path):
            raise FileNotFoundError(f"missing batch file {path}")
        raw = np.fromfile(path, dtype=np.uint8)
        if raw.size == 0 or raw.size % record:
            raise ValueError(
                f"{path}: size {raw.size} is not a multiple of the "
                f"{record}-byte record"
            )
        rows = raw.reshape(-1, record)
        labels.append(rows[:, label_bytes - 1].astype(np.int64))
        images.append(rows[:, label_bytes:])
    labels = np.concatenate(labels)
    if labels.size and labels.max() >= num_classes:
        raise ValueError(
            f"label {labels.max()} out of range for {variant} ({num_classes} classes)"
        )
    pixels = np.concatenate(images).reshape(-1, 3, 32, 32).astype(np.float32) / np.float32(255)
    return LabeledImageSet(
        images=ComplexTensor._wrap(pixels, np.zeros_like(pixels)),
        labels=labels,
        num_classes=num_classes,
        encoding="rgb",
        split=split,
    )


def load_ctns_dataset(path, split: str = "train") -> LabeledImageSet:
    """Read an images.ctns/labels.ctns pair (e.g. converted SVHN)."""
    imgs = read_ctns(os.path.join(path, "images.ctns"))
    lab = read_ctns(os.path.join(path, "labels.ctns"))
    if imgs.re.ndim != 4:
        raise ValueError(f"{path}: images tensor must be rank 4, got {imgs.shape}")
    if lab.re.ndim != 1:
        raise ValueError(f"{path}: labels tensor must be rank 1, got {lab.shape}")
    if imgs.shape[0] != lab.shape[0]:
        raise ValueError(
            f"{path}: {imgs.shape[0]} images but {lab.shape[0]} labels"
        )
    if np.any(lab.im != 0) or np.any(lab.re != np.round(lab.re)):
        raise ValueError(f"{path}: labels must be real integers")
    labels = lab.re.astype(np.int64)
    num_classes = 10
    encoding = "rgb"
    manifest_path = os.path.join(path, "manifest.json")
    if os.path.exists(manifest_path):
        with open(manifest_path) as fh:
            manifest = json.load(fh)
        num_classes = int(manifest.get("class_count", num_classes))
        encoding = manifest.get("encoding", encoding)
    elif labels.size:
        num_classes = int(labels.max()) + 1
    return LabeledImageSet(
        images=imgs, labels=labels, num_classes=num_classes, encoding=encoding, split=split
    )


def write_ctns_dataset(dataset: LabeledImageSet, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_ctns(dataset.images, os.path.join(out_dir, "images.ctns"))
    labels = dataset.labels.astype(np.float32)
    write_ctns(ComplexTensor(labels), os.path.join(out_dir, "labels.ctns"))
    manifest = {
        "n": dataset.n,
        "class_count": dataset.num_classes,
        "encoding": dataset.encoding,
        "split": dataset.split,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


# ---- complex encodings -------------------------------------------------------


def _srgb_to_lab(rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized sRGB (in [0,1]) to CIELAB under D65."""
    c = rgb.astype(np.float64)
    lin = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    r, g, b = lin[:, 0], lin[:, 1], lin[:, 2]
    x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b
    y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b
    z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b
    xn, yn, zn = 0.95047, 1.0, 1.08883
    delta3 = (6.0 / 29.0) ** 3

    def f(t):
        return np.where(t > delta3, np.cbrt(t), t / (3 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)

    fx, fy, fz = f(x / xn), f(y / yn), f(z / zn)
    lum = 116.0 * fy - 16.0
    a = 500.0 * (fx - fy)
    bb = 200.0 * (fy - fz)
    return lum, a, bb


def encode(dataset: LabeledImageSet, target: str) -> LabeledImageSet:
    """Re-encode an rgb dataset into one of the complex input encodings.
    Identity when the dataset already carries the target encoding."""
    if target not in ENCODINGS:
        raise ValueError(f"unknown encoding {target!r}")
    if target == dataset.encoding:
        return dataset
    if dataset.encoding != "rgb":
        raise ValueError(f"encode expects an rgb dataset, got {dataset.encoding!r}")
    dt = dataset.images.np_dtype
    rgb = dataset.images.re
    if target == "sliding":
        p = rgb.astype(np.float64)
        phase = 2.0 * np.pi * p
        re = (p * np.cos(phase)).astype(dt)
        im = (p * np.sin(phase)).astype(dt)
    else:  # lab
        lum, a, b = _srgb_to_lab(rgb)
        chroma = np.hypot(a, b)
        hue = np.arctan2(b, a)
        re = np.stack([lum / 100.0, a / 110.0, chroma / 155.0], axis=1).astype(dt)
        im = np.stack([np.zeros_like(lum), b / 110.0, hue / np.pi], axis=1).astype(dt)
    images = ComplexTensor._wrap(re, im)
    return replace(dataset, images=images, encoding=target)
