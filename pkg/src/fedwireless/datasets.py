"""Dataset utilities: synthetic classification tasks and two file loaders.

Fixture files are a minimal binary format for desk-scale runs:

    bytes 0-3   magic "FWF1"
    bytes 4-15  little-endian uint32: n_samples, n_features, n_classes
    then        float32 features, row-major (n_samples x n_features)
    then        int32 labels (n_samples)

The IDX loader reads the classic big-endian image/label format (magic
``0x00 0x00 <dtype> <ndims>`` followed by uint32 dimension sizes) for
full-scale digit runs.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

_FIXTURE_MAGIC = b"FWF1"

_IDX_DTYPES = {
    0x08: np.uint8,
    0x09: np.int8,
    0x0B: np.dtype(">i2"),
    0x0C: np.dtype(">i4"),
    0x0D: np.dtype(">f4"),
    0x0E: np.dtype(">f8"),
}


def make_blobs(
    n: int,
    n_features: int,
    n_classes: int,
    rng: np.random.Generator,
    sep: float = 3.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian-blob classification task with unit within-class noise.

    Class centers are drawn once from N(0, sep^2 / n_features) per
    coordinate, so the expected center separation scales with ``sep``
    independently of dimension.  Labels cycle through the classes, giving
    balanced counts.
    """
    if n < 1 or n_features < 1 or n_classes < 2:
        raise ValueError("need n >= 1, n_features >= 1, n_classes >= 2")
    centers = rng.standard_normal((n_classes, n_features)) * (sep / np.sqrt(n_features))
    y = np.arange(n) % n_classes
    rng.shuffle(y)
    X = centers[y] + rng.standard_normal((n, n_features))
    return X, y


def save_fixture(path: str | Path, X: np.ndarray, y: np.ndarray, n_classes: int) -> None:
    X = np.asarray(X, dtype=np.float32)
    y = np.asarray(y, dtype=np.int32)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be (n, f) and y must be (n,)")
    with open(path, "wb") as fh:
        fh.write(_FIXTURE_MAGIC)
        fh.write(struct.pack("<III", X.shape[0], X.shape[1], n_classes))
        fh.write(X.tobytes(order="C"))
        fh.write(y.tobytes())


def load_fixture(path: str | Path) -> tuple[np.ndarray, np.ndarray, int]:
    """Read a fixture file; returns (features, labels, n_classes)."""
    raw = Path(path).read_bytes()
    if raw[:4] != _FIXTURE_MAGIC:
        raise ValueError(f"{path}: not a fixture file (bad magic)")
    n, f, n_classes = struct.unpack("<III", raw[4:16])
    body = raw[16:]
    expected = n * f * 4 + n * 4
    if len(body) != expected:
        raise ValueError(f"{path}: truncated fixture payload")
    X = np.frombuffer(body[: n * f * 4], dtype=np.float32).reshape(n, f)
    y = np.frombuffer(body[n * f * 4 :], dtype=np.int32)
    return X.astype(np.float64), y.astype(np.int64), int(n_classes)


def load_idx(path: str | Path) -> np.ndarray:
    """Read an IDX-format array (big-endian magic + dims + payload)."""
    raw = Path(path).read_bytes()
    if len(raw) < 4 or raw[0] != 0 or raw[1] != 0:
        raise ValueError(f"{path}: not an IDX file (bad magic)")
    dtype_code, ndims = raw[2], raw[3]
    if dtype_code not in _IDX_DTYPES:
        raise ValueError(f"{path}: unknown IDX dtype 0x{dtype_code:02X}")
    dims = struct.unpack(f">{ndims}I", raw[4 : 4 + 4 * ndims])
    data = np.frombuffer(raw, dtype=_IDX_DTYPES[dtype_code], offset=4 + 4 * ndims)
    if data.size != int(np.prod(dims)):
        raise ValueError(f"{path}: payload does not match declared dims {dims}")
    return data.reshape(dims)
