"""IDX image/label files and a synthetic blob dataset in the same layout."""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    images: np.ndarray  # uint8, (count, height, width, channels)
    labels: np.ndarray  # int64, (count,)
    classes: int = 10

    def __post_init__(self):
        if self.images.ndim != 4 or self.images.dtype != np.uint8:
            raise ValueError(f"images must be uint8 (count, h, w, c), got {self.images.dtype} {self.images.shape}")
        if len(self.images) != len(self.labels):
            raise ValueError(f"{len(self.images)} images but {len(self.labels)} labels")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.classes):
            raise ValueError(f"labels outside [0, {self.classes})")

    def __len__(self):
        return len(self.labels)

    @property
    def image_shape(self) -> tuple[int, int, int]:
        return tuple(self.images.shape[1:])

    def inputs(self, idx=None) -> np.ndarray:
        """Float64 pixels scaled to [0, 1]."""
        imgs = self.images if idx is None else self.images[idx]
        return imgs.astype(np.float64) / 255.0


def _read_header(raw: bytes, path, magic: int) -> tuple[list[int], int]:
    if len(raw) < 4:
        raise IdxFormatError(f"{path}: truncated header")
    (found,) = struct.unpack(">I", raw[:4])
    if found != magic:
        raise IdxFormatError(f"{path}: magic 0x{found:08x}, expected 0x{magic:08x}")
    ndim = magic & 0xFF
    end = 4 + 4 * ndim
    if len(raw) < end:
        raise IdxFormatError(f"{path}: truncated header")
    dims = list(struct.unpack(f">{ndim}I", raw[4:end]))
    return dims, end


def load_idx(images_path, labels_path, classes: int = 10) -> Dataset:
    """Parse an MNIST-style image file and its label file into a single-channel Dataset."""
    raw = Path(images_path).read_bytes()
    dims, off = _read_header(raw, images_path, IDX_IMAGES_MAGIC)
    n = int(np.prod(dims))
    if len(raw) - off != n:
        raise IdxFormatError(f"{images_path}: expected {n} pixel bytes, found {len(raw) - off}")
    images = np.frombuffer(raw, dtype=np.uint8, offset=off).reshape(*dims, 1)

    raw = Path(labels_path).read_bytes()
    (count,), off = _read_header(raw, labels_path, IDX_LABELS_MAGIC)
    if len(raw) - off != count:
        raise IdxFormatError(f"{labels_path}: expected {count} label bytes, found {len(raw) - off}")
    if count != len(images):
        raise IdxFormatError(f"{len(images)} images but {count} labels")
    labels = np.frombuffer(raw, dtype=np.uint8, offset=off).astype(np.int64)
    try:
        return Dataset(images.copy(), labels, classes)
    except ValueError as exc:
        raise IdxFormatError(str(exc)) from exc


def write_idx(images_path, labels_path, ds: Dataset) -> None:
    if ds.images.shape[-1] != 1:
        raise ValueError("IDX image files hold single-channel images only")
    imgs = ds.images[..., 0]
    with open(images_path, "wb") as f:
        f.write(struct.pack(">I3I", IDX_IMAGES_MAGIC, *imgs.shape))
        f.write(np.ascontiguousarray(imgs, dtype=np.uint8).tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", IDX_LABELS_MAGIC, len(ds.labels)))
        f.write(ds.labels.astype(np.uint8).tobytes())


@dataclass(frozen=True)
class BlobSpec:
    """Each class is a fixed constellation of Gaussian blobs; samples jitter it."""

    size: int = 16
    classes: int = 10
    blobs: int = 3
    width: float = 1.6
    jitter: float = 1.5
    noise: float = 0.35
    proto_seed: int = 1234


def _prototypes(spec: BlobSpec) -> np.ndarray:
    rng = np.random.default_rng(spec.proto_seed)
    margin = 2.0
    return rng.uniform(margin, spec.size - 1 - margin, size=(spec.classes, spec.blobs, 2))


def synthetic_blobs(count: int, seed: int, spec: BlobSpec = BlobSpec()) -> Dataset:
    """Render ``count`` uint8 images of jittered class blobs plus pixel noise.

    Class prototypes depend only on ``spec.proto_seed``, so train and test
    sets drawn with different ``seed`` values share the same classes.
    """
    rng = np.random.default_rng(seed)
    protos = _prototypes(spec)
    labels = rng.integers(0, spec.classes, size=count)
    centers = protos[labels] + rng.normal(0.0, spec.jitter, size=(count, spec.blobs, 2))
    amps = rng.uniform(0.6, 1.0, size=(count, spec.blobs))
    grid = np.arange(spec.size, dtype=np.float64)
    dy = grid[None, None, :] - centers[:, :, 0:1]
    dx = grid[None, None, :] - centers[:, :, 1:2]
    gy = np.exp(-0.5 * (dy / spec.width) ** 2)
    gx = np.exp(-0.5 * (dx / spec.width) ** 2)
    img = np.einsum("nb,nby,nbx->nyx", amps, gy, gx)
    img += rng.normal(0.0, spec.noise, size=img.shape)
    pixels = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    return Dataset(pixels[..., None], labels.astype(np.int64), spec.classes)
