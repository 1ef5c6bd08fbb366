"""Binary tensor container used for all numeric artifacts.

Layout: magic ``SSTF``, version byte 0x01, dtype byte 0x01 (32-bit IEEE-754
little-endian float), rank byte, rank little-endian uint32 dims, then the
row-major payload. Round-trips are bit exact for float32 data.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"SSTF"
VERSION = 1
DTYPE_FLOAT32 = 1


class TensorFileError(Exception):
    """Base for tensor-container format errors."""


class MalformedHeaderError(TensorFileError):
    pass


class UnsupportedDtypeError(TensorFileError):
    pass


class TruncatedPayloadError(TensorFileError):
    pass


def save_tensor(path, array) -> None:
    arr = np.asarray(array)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.size == 0 or any(d < 1 for d in arr.shape):
        raise ValueError("all dims must be >= 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError("payload must be finite")
    if arr.ndim > 255:
        raise ValueError("rank exceeds format limit")
    data = np.ascontiguousarray(arr, dtype="<f4")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(bytes((VERSION, DTYPE_FLOAT32, arr.ndim)))
        for d in arr.shape:
            f.write(struct.pack("<I", d))
        f.write(data.tobytes(order="C"))


def load_tensor(path) -> np.ndarray:
    blob = Path(path).read_bytes()
    if len(blob) < 7 or blob[:4] != MAGIC:
        raise MalformedHeaderError(f"not a tensor file: {path}")
    version, dtype, rank = blob[4], blob[5], blob[6]
    if version != VERSION:
        raise MalformedHeaderError(f"unsupported version {version}")
    if dtype != DTYPE_FLOAT32:
        raise UnsupportedDtypeError(f"unsupported dtype code {dtype}")
    off = 7 + 4 * rank
    if len(blob) < off:
        raise MalformedHeaderError("header truncated before dims")
    dims = struct.unpack(f"<{rank}I", blob[7:off])
    if any(d < 1 for d in dims):
        raise MalformedHeaderError(f"invalid dims {dims}")
    count = int(np.prod(dims, dtype=np.int64))
    expected = off + 4 * count
    if len(blob) < expected:
        raise TruncatedPayloadError(
            f"payload holds {(len(blob) - off) // 4} values, dims {dims} need {count}"
        )
    if len(blob) > expected:
        raise TensorFileError(f"{len(blob) - expected} trailing bytes after payload")
    out = np.frombuffer(blob, dtype="<f4", count=count, offset=off)
    return out.reshape(dims).copy()
