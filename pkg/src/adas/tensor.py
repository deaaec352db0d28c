"""4-way convolution weight tensors, their mode-3/mode-4 unfoldings, and the AT4 snapshot format.

Weights are stored as ``(N1, N2, N3, N4)`` = (kernel height, kernel width,
input channels, output channels) in C order, so the last index varies fastest.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

AT4_MAGIC = b"AT4\x00"
_AT4_HEADER = struct.Struct("<4s4I")


class SnapshotError(ValueError):
    """Raised when an AT4 snapshot cannot be parsed."""


@dataclass(frozen=True)
class Tensor4:
    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim != 4:
            raise ValueError(f"Tensor4 needs 4 dims, got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise ValueError(f"all dims must be >= 1, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_flat(cls, dims, values) -> "Tensor4":
        dims = tuple(int(d) for d in dims)
        values = np.asarray(values, dtype=np.float64)
        if len(dims) != 4 or values.size != int(np.prod(dims)):
            raise ValueError(f"{values.size} values do not fill dims {dims}")
        return cls(values.reshape(dims))

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return tuple(self.data.shape)

    def flat(self) -> np.ndarray:
        return self.data.reshape(-1)

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.flat()))


def as_tensor4(t) -> Tensor4:
    return t if isinstance(t, Tensor4) else Tensor4(t)


def unfold_mode3(t) -> np.ndarray:
    """(N1*N2*N4) x N3 matrix; column j holds every entry with third index j.

    Rows run lexicographically over (d1, d2, d4).
    """
    a = as_tensor4(t).data
    n1, n2, n3, n4 = a.shape
    return np.ascontiguousarray(a.transpose(0, 1, 3, 2)).reshape(n1 * n2 * n4, n3)


def unfold_mode4(t) -> np.ndarray:
    """(N1*N2*N3) x N4 matrix, rows lexicographic over (d1, d2, d3)."""
    a = as_tensor4(t).data
    n1, n2, n3, n4 = a.shape
    return a.reshape(n1 * n2 * n3, n4).copy()


def fold_mode3(m: np.ndarray, dims) -> Tensor4:
    n1, n2, n3, n4 = dims
    return Tensor4(np.asarray(m).reshape(n1, n2, n4, n3).transpose(0, 1, 3, 2))


def fold_mode4(m: np.ndarray, dims) -> Tensor4:
    return Tensor4(np.asarray(m).reshape(tuple(dims)))


def write_at4(path, t) -> None:
    t = as_tensor4(t)
    payload = t.flat().astype("<f8").tobytes()
    with open(path, "wb") as f:
        f.write(_AT4_HEADER.pack(AT4_MAGIC, *t.dims))
        f.write(payload)


def read_at4(path) -> Tensor4:
    raw = Path(path).read_bytes()
    if len(raw) < _AT4_HEADER.size:
        raise SnapshotError(f"{path}: truncated header")
    magic, *dims = _AT4_HEADER.unpack_from(raw)
    if magic != AT4_MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}")
    if min(dims) < 1:
        raise SnapshotError(f"{path}: invalid dims {dims}")
    count = int(np.prod(dims))
    body = raw[_AT4_HEADER.size:]
    if len(body) != 8 * count:
        raise SnapshotError(f"{path}: expected {8 * count} payload bytes, found {len(body)}")
    values = np.frombuffer(body, dtype="<f8").astype(np.float64)
    return Tensor4.from_flat(dims, values)
