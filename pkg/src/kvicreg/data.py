"""Synthetic datasets, paired-view augmentation, IDX loading and CSV export."""

from __future__ import annotations

import csv
import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    def __init__(self, message, offset):
        super().__init__(message)
        self.offset = offset


@dataclass
class Dataset:
    samples: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,), probing only
    name: str = "dataset"

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.samples.ndim != 2 or self.samples.shape[0] < 1:
            raise ValueError(f"samples must be a non-empty (n, d) array, got {self.samples.shape}")
        if self.labels.shape != (self.samples.shape[0],):
            raise ValueError("labels must have one entry per sample")
        if self.labels.min() < 0:
            raise ValueError("labels must be non-negative")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples contain non-finite values")

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1

    def __len__(self):
        return self.samples.shape[0]


@dataclass(frozen=True)
class AugmentationSpec:
    noise_sigma: float = 0.1
    rotation_max_deg: float = 10.0
    scale_jitter: float = 0.1
    mask_prob: float = 0.1

    def __post_init__(self):
        for name in ("noise_sigma", "rotation_max_deg", "scale_jitter"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0 <= self.mask_prob < 1:
            raise ValueError("mask_prob must lie in [0, 1)")


@dataclass
class ViewPairBatch:
    view_a: np.ndarray
    view_b: np.ndarray
    source_indices: np.ndarray


def make_blobs(num_classes: int, per_class: int, dim: int, spread: float = 1.0, seed=0) -> Dataset:
    if min(num_classes, per_class, dim) < 1 or not spread > 0:
        raise ValueError("make_blobs needs positive counts, dim and spread")
    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(num_classes, dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    centers *= 4.0 * spread
    labels = np.repeat(np.arange(num_classes), per_class)
    samples = centers[labels] + spread * rng.normal(size=(labels.size, dim))
    return Dataset(samples, labels, "blobs")


def make_two_moons(per_class: int, noise_sigma: float = 0.0, seed=0) -> Dataset:
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    t = np.linspace(0.0, np.pi, per_class)
    outer = np.column_stack([np.cos(t), np.sin(t)])
    inner = np.column_stack([1.0 - np.cos(t), 0.5 - np.sin(t)])
    samples = np.vstack([outer, inner])
    if noise_sigma > 0:
        samples = samples + noise_sigma * np.random.default_rng(seed).normal(size=samples.shape)
    return Dataset(samples, np.repeat([0, 1], per_class), "moons")


def make_circles(per_class: int, noise_sigma: float = 0.0, radius_ratio: float = 0.5, seed=0) -> Dataset:
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    if not 0 < radius_ratio < 1:
        raise ValueError("radius_ratio must lie in (0, 1)")
    t = np.linspace(0.0, 2.0 * np.pi, per_class, endpoint=False)
    ring = np.column_stack([np.cos(t), np.sin(t)])
    samples = np.vstack([ring, radius_ratio * ring])
    if noise_sigma > 0:
        samples = samples + noise_sigma * np.random.default_rng(seed).normal(size=samples.shape)
    return Dataset(samples, np.repeat([0, 1], per_class), "circles")


def _augment(x, spec, rng):
    n, d = x.shape
    out = x.copy()
    if spec.rotation_max_deg > 0 and d >= 2:
        theta = np.deg2rad(rng.uniform(-spec.rotation_max_deg, spec.rotation_max_deg, size=(n, 1)))
        c, s = np.cos(theta), np.sin(theta)
        pairs = d // 2
        xs, ys = out[:, 0:2 * pairs:2].copy(), out[:, 1:2 * pairs:2].copy()
        out[:, 0:2 * pairs:2] = c * xs - s * ys
        out[:, 1:2 * pairs:2] = s * xs + c * ys
    if spec.scale_jitter > 0:
        out *= rng.uniform(1.0 - spec.scale_jitter, 1.0 + spec.scale_jitter, size=(n, 1))
    if spec.mask_prob > 0:
        out[rng.random(size=out.shape) < spec.mask_prob] = 0.0
    if spec.noise_sigma > 0:
        out += spec.noise_sigma * rng.normal(size=out.shape)
    return out


def augment_pair(ds: Dataset, indices, spec: AugmentationSpec, seed) -> ViewPairBatch:
    """Two independent augmentation draws per selected sample.

    ``seed`` may be an int or a tuple such as ``(run_seed, step)``; the
    result is a pure function of it.
    """
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 1:
        raise ValueError("indices must be 1-D")
    if idx.size and (idx.min() < 0 or idx.max() >= len(ds)):
        raise IndexError(f"sample index out of range for dataset of size {len(ds)}")
    rng = np.random.default_rng(seed)
    src = ds.samples[idx]
    return ViewPairBatch(_augment(src, spec, rng), _augment(src, spec, rng), idx)


# -- IDX (MNIST) ----------------------------------------------------------------

def _read_bytes(path):
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def _need(raw, end, what):
    if len(raw) < end:
        raise IdxFormatError(f"{what}: truncated at offset {len(raw)}", len(raw))


def _parse_images(raw):
    _need(raw, 16, "image header")
    magic, n, rows, cols = struct.unpack(">IIII", raw[:16])
    if magic != IDX_IMAGES_MAGIC:
        raise IdxFormatError(f"image file: bad magic 0x{magic:08x} at offset 0", 0)
    _need(raw, 16 + n * rows * cols, "image data")
    pixels = np.frombuffer(raw, dtype=np.uint8, count=n * rows * cols, offset=16)
    return pixels.reshape(n, rows * cols).astype(np.float64) / 255.0


def _parse_labels(raw):
    _need(raw, 8, "label header")
    magic, n = struct.unpack(">II", raw[:8])
    if magic != IDX_LABELS_MAGIC:
        raise IdxFormatError(f"label file: bad magic 0x{magic:08x} at offset 0", 0)
    _need(raw, 8 + n, "label data")
    return np.frombuffer(raw, dtype=np.uint8, count=n, offset=8).astype(np.int64)


def load_idx(images_path, labels_path) -> Dataset:
    """Load an IDX image/label pair; pixels scaled to [0, 1] and flattened."""
    images = _parse_images(_read_bytes(images_path))
    labels = _parse_labels(_read_bytes(labels_path))
    if labels.size != images.shape[0]:
        raise IdxFormatError(
            f"label count {labels.size} at offset 4 disagrees with image count {images.shape[0]}", 4)
    return Dataset(images, labels, "idx")


def write_dataset_csv(ds: Dataset, path) -> None:
    """Header ``label,f0,f1,...``; reals with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"] + [f"f{j}" for j in range(ds.samples.shape[1])])
        for label, row in zip(ds.labels, ds.samples):
            writer.writerow([int(label)] + [format(v, ".17g") for v in row])


def read_dataset_csv(path, name: str = "csv") -> Dataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "label":
            raise ValueError(f"{path}: expected a 'label,f0,...' header")
        rows = list(reader)
    labels = [int(r[0]) for r in rows]
    samples = [[float(v) for v in r[1:]] for r in rows]
    return Dataset(np.array(samples), np.array(labels), name)
