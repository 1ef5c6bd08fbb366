"""Hot numeric kernels with a selectable backend.

Every kernel ships in two variants: numba-jitted loops (``_numba``) and a
pure-numpy twin (``_numpy``). The active variant is picked once at import
from the ``SSYNC_BACKEND`` environment variable ("numba" or "numpy"; unset
prefers numba when it imports) and can be changed at runtime with
:func:`set_backend` or the :func:`use_backend` context manager.

Both variants compute the same quantities; results agree to floating-point
reduction order. ``benchmarks/bench_backends.py`` times them side by side.
"""

from __future__ import annotations

import os
from contextlib import contextmanager

import numpy as np

from . import _numpy as _numpy_impl

try:
    from . import _numba as _numba_impl
except ImportError:
    _numba_impl = None

_IMPLS = {"numpy": _numpy_impl}
if _numba_impl is not None:
    _IMPLS["numba"] = _numba_impl


def _default_backend() -> str:
    env = os.environ.get("SSYNC_BACKEND", "").strip().lower()
    if env:
        if env not in ("numpy", "numba"):
            raise ValueError(f"SSYNC_BACKEND must be 'numpy' or 'numba', got {env!r}")
        if env not in _IMPLS:
            raise ImportError("SSYNC_BACKEND=numba but numba is not importable")
        return env
    return "numba" if "numba" in _IMPLS else "numpy"


_active = _default_backend()


def active_backend() -> str:
    return _active


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_IMPLS))


def set_backend(name: str) -> None:
    if name not in _IMPLS:
        raise ValueError(f"backend {name!r} not available (have {sorted(_IMPLS)})")
    global _active
    _active = name


@contextmanager
def use_backend(name: str):
    prev = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(prev)


def set_num_threads(n: int) -> None:
    """Cap worker threads of the jitted kernels. No-op on the numpy backend."""
    if n < 1:
        raise ValueError("thread count must be >= 1")
    if _numba_impl is not None:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def _impl():
    return _IMPLS[_active]


def sae_batch_obj_grad(wx, wy, x, y, lam, swap_pairing=False):
    """Mean synchrony-autoencoder objective and weight gradients over a batch.

    x, y: (B, N) input pairs; wx, wy: (Q, N) filter rows. Returns
    (objective, dJ/dWx, dJ/dWy); callers sum the two gradients when the
    bank is tied. ``swap_pairing`` selects the compatibility variant of the
    contraction term (squared x-factors paired with the x-filter norms).
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    wx = np.ascontiguousarray(wx, dtype=np.float64)
    wy = np.ascontiguousarray(wy, dtype=np.float64)
    return _impl().sae_batch_obj_grad(wx, wy, x, y, float(lam), bool(swap_pairing))


def gather_patches(frame, patch_h, patch_w, stride_y, stride_x):
    """All patches of a dense grid, one vectorized row-major patch per row.

    Returns (matrix (rows*cols, patch_h*patch_w), rows, cols) where the grid
    walks top-to-bottom, left-to-right.
    """
    frame = np.ascontiguousarray(frame, dtype=np.float64)
    h, w = frame.shape
    if patch_h > h or patch_w > w:
        raise ValueError(f"patch {patch_h}x{patch_w} exceeds frame {h}x{w}")
    rows = (h - patch_h) // stride_y + 1
    cols = (w - patch_w) // stride_x + 1
    mat = _impl().gather_patches(frame, patch_h, patch_w, stride_y, stride_x)
    return mat, rows, cols


def gather_blocks(video, offsets, bt, bh, bw):
    """Vectorize spatio-temporal blocks of shape (bt, bh, bw) at the given
    (t, y, x) offsets of a (T, H, W) stack; one row per block, frames
    concatenated in time order."""
    video = np.ascontiguousarray(video, dtype=np.float64)
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    t, h, w = video.shape
    if bt > t or bh > h or bw > w:
        raise ValueError(f"block ({bt},{bh},{bw}) exceeds video ({t},{h},{w})")
    return _impl().gather_blocks(video, offsets, bt, bh, bw)


def kmeans_assign(points, centroids):
    """Nearest centroid per point (squared Euclidean, lowest index on ties).

    Returns (labels (B,), squared distance to the assigned centroid (B,)).
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    centroids = np.ascontiguousarray(centroids, dtype=np.float64)
    if points.shape[1] != centroids.shape[1]:
        raise ValueError("point and centroid dimensionality differ")
    return _impl().kmeans_assign(points, centroids)


def box_downsample(frame, new_h, new_w):
    """Area-average resampling of a single frame to (new_h, new_w)."""
    frame = np.ascontiguousarray(frame, dtype=np.float64)
    h, w = frame.shape
    if new_h > h or new_w > w:
        raise ValueError("upsampling not supported")
    if new_h < 1 or new_w < 1:
        raise ValueError("output dims must be >= 1")
    return _impl().box_downsample(frame, new_h, new_w)
