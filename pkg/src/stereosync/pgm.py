"""Binary PGM (P5, 8-bit) and PBM (P4) image I/O.

Intensities live in [0, 1] in memory and are scaled by 255 on disk.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def write_pgm(path, image) -> None:
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("expected a 2-D grayscale image")
    data = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(data.tobytes())


def _read_header_tokens(blob, count):
    # whitespace-separated tokens, '#' comments to end of line
    tokens = []
    i = 0
    while len(tokens) < count:
        if i >= len(blob):
            raise ValueError("truncated header")
        c = blob[i : i + 1]
        if c == b"#":
            while i < len(blob) and blob[i : i + 1] != b"\n":
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(blob) and not blob[j : j + 1].isspace():
                j += 1
            tokens.append(blob[i:j])
            i = j
    return tokens, i + 1  # skip the single whitespace after the last token


def read_pgm(path) -> np.ndarray:
    blob = Path(path).read_bytes()
    if not blob.startswith(b"P5"):
        raise ValueError(f"not a binary PGM: {path}")
    (_, w, h, maxval), off = _read_header_tokens(blob, 4)
    w, h, maxval = int(w), int(h), int(maxval)
    if maxval > 255 or maxval < 1:
        raise ValueError(f"unsupported maxval {maxval}")
    need = w * h
    raw = np.frombuffer(blob, dtype=np.uint8, count=-1, offset=off)
    if raw.size < need:
        raise ValueError("truncated pixel data")
    return raw[:need].reshape(h, w).astype(np.float64) / 255.0


def write_pbm(path, mask) -> None:
    m = np.asarray(mask, dtype=bool)
    if m.ndim != 2:
        raise ValueError("expected a 2-D mask")
    h, w = m.shape
    packed = np.packbits(m, axis=1)
    with open(path, "wb") as f:
        f.write(f"P4\n{w} {h}\n".encode("ascii"))
        f.write(packed.tobytes())


def read_pbm(path) -> np.ndarray:
    blob = Path(path).read_bytes()
    if not blob.startswith(b"P4"):
        raise ValueError(f"not a binary PBM: {path}")
    (_, w, h), off = _read_header_tokens(blob, 3)
    w, h = int(w), int(h)
    row_bytes = (w + 7) // 8
    raw = np.frombuffer(blob, dtype=np.uint8, count=-1, offset=off)
    if raw.size < row_bytes * h:
        raise ValueError("truncated bit data")
    bits = np.unpackbits(raw[: row_bytes * h].reshape(h, row_bytes), axis=1)
    return bits[:, :w].astype(bool)
