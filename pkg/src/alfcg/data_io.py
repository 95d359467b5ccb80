"""Dataset construction: seeded Gaussian data and the MNIST IDX format.

IDX layout: a 4-byte big-endian magic number (``0x00000803`` for image
files, ``0x00000801`` for label files), one big-endian uint32 per
dimension, then the raw unsigned-byte payload. Gzipped files are detected
by their header and decompressed transparently.
"""
from __future__ import annotations

import gzip
import struct
from pathlib import Path

import numpy as np

from .exceptions import IdxFormatError, InvalidParameterError
from .numerics import make_rng
from .objectives import Dataset

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
NORMALIZATIONS = ("none", "unit_rows", "scale_255")


def generate_synthetic(N: int, d: int, c: int, seed: int) -> Dataset:
    """``randn-N-d``: i.i.d. standard normal features, uniform labels in [0, c)."""
    if min(N, d, c) < 1:
        raise InvalidParameterError("N, d and c must all be >= 1")
    rng = make_rng(seed)
    X = rng.standard_normal((N, d))
    y = rng.integers(0, c, size=N)
    return Dataset(X, y, c, name=f"randn-{N}-{d}")


def normalize(X: np.ndarray, mode: str) -> np.ndarray:
    if mode == "none":
        return X
    if mode == "scale_255":
        return X / 255.0
    if mode == "unit_rows":
        n = np.linalg.norm(X, axis=1, keepdims=True)
        return np.where(n > 0, X / np.where(n > 0, n, 1.0), X)
    raise InvalidParameterError(f"unknown normalization {mode!r}")


def _read_bytes(path) -> bytes:
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def _parse_idx(raw: bytes, magic: int, ndim: int, what: str) -> np.ndarray:
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise IdxFormatError(
            f"{what}: truncated header, need {header} bytes but the file has {len(raw)} (offset {len(raw)})")
    (found,) = struct.unpack(">I", raw[:4])
    if found != magic:
        raise IdxFormatError(f"{what}: bad magic 0x{found:08x} at offset 0, expected 0x{magic:08x}")
    dims = struct.unpack(">" + "I" * ndim, raw[4:header])
    need = int(np.prod(dims))
    if len(raw) - header < need:
        raise IdxFormatError(
            f"{what}: payload truncated at offset {len(raw)}, expected {header + need} bytes")
    return np.frombuffer(raw, dtype=np.uint8, count=need, offset=header).reshape(dims)


def load_mnist_idx(images_path, labels_path, take_N: int | None = None,
                   take_d: int | None = None, normalize_mode: str = "scale_255",
                   name: str | None = None) -> Dataset:
    """Read an IDX image/label pair, keeping the first ``take_N`` records and
    the first ``take_d`` flattened pixels."""
    images = _parse_idx(_read_bytes(images_path), IMAGES_MAGIC, 3, "images")
    labels = _parse_idx(_read_bytes(labels_path), LABELS_MAGIC, 1, "labels")
    if images.shape[0] != labels.shape[0]:
        raise IdxFormatError(
            f"count mismatch: {images.shape[0]} images (offset 4) vs {labels.shape[0]} labels (offset 4)")
    X = images.reshape(images.shape[0], -1)
    n_total, d_total = X.shape
    take_N = n_total if take_N is None else take_N
    take_d = d_total if take_d is None else take_d
    if not 1 <= take_N <= n_total:
        raise InvalidParameterError(f"take_N={take_N} outside [1, {n_total}]")
    if not 1 <= take_d <= d_total:
        raise InvalidParameterError(f"take_d={take_d} outside [1, {d_total}]")
    X = normalize(X[:take_N, :take_d].astype(np.float64), normalize_mode)
    y = labels[:take_N].astype(np.int64)
    classes = max(10, int(y.max()) + 1)
    return Dataset(X, y, classes, name=name or f"mnist-{take_N}-{take_d}")


def write_idx(path, array: np.ndarray, compress: bool = False) -> None:
    """Write a uint8 array as IDX (images if 3-D, labels if 1-D)."""
    a = np.asarray(array)
    if a.ndim == 3:
        magic = IMAGES_MAGIC
    elif a.ndim == 1:
        magic = LABELS_MAGIC
    else:
        raise InvalidParameterError("IDX writer handles 3-D images or 1-D labels")
    if a.size and (a.min() < 0 or a.max() > 255):
        raise InvalidParameterError("IDX payload must fit in unsigned bytes")
    payload = struct.pack(">I" + "I" * a.ndim, magic, *a.shape) + a.astype(np.uint8).tobytes()
    if compress:
        payload = gzip.compress(payload, mtime=0)
    Path(path).write_bytes(payload)
