"""Stereo frame stacks and basic geometry (cropping, vectorizing, resampling).

A frame is a (H, W) float array; a sequence is two time-aligned (T, H, W)
stacks. A still pair is just T == 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels


def as_frames(arr) -> np.ndarray:
    """Coerce a frame or list of frames into a (T, H, W) float64 stack."""
    a = np.asarray(arr, dtype=np.float64)
    if a.ndim == 2:
        a = a[None]
    if a.ndim != 3:
        raise ValueError(f"expected (H,W) or (T,H,W), got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("frames must be finite")
    return a


@dataclass
class StereoSequence:
    """Two time-aligned grayscale frame stacks, optionally class-labelled."""

    left: np.ndarray
    right: np.ndarray
    label: int | None = None
    ground_truth: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.left = as_frames(self.left)
        self.right = as_frames(self.right)
        if self.left.shape != self.right.shape:
            raise ValueError(
                f"channel shapes differ: {self.left.shape} vs {self.right.shape}"
            )
        if self.ground_truth is not None:
            self.ground_truth = as_frames(self.ground_truth)
            if self.ground_truth.shape[1:] != self.left.shape[1:]:
                raise ValueError("ground truth frame size differs from channels")

    @property
    def num_frames(self) -> int:
        return self.left.shape[0]

    @property
    def height(self) -> int:
        return self.left.shape[1]

    @property
    def width(self) -> int:
        return self.left.shape[2]


def downsample(frame, new_w, new_h) -> np.ndarray:
    """Area-average (box filter) resampling; upsampling is rejected."""
    frame = np.asarray(frame, dtype=np.float64)
    h, w = frame.shape
    if new_w > w or new_h > h:
        raise ValueError(f"cannot upsample {w}x{h} to {new_w}x{new_h}")
    if new_w < 1 or new_h < 1:
        raise ValueError("target dims must be >= 1")
    return kernels.box_downsample(frame, new_h, new_w)


def crop_window(frames, t0, y0, x0, t_len, h, w) -> np.ndarray:
    """Vectorize a (t_len, h, w) window as one row-major vector, frames
    concatenated in time order."""
    frames = as_frames(frames)
    win = frames[t0 : t0 + t_len, y0 : y0 + h, x0 : x0 + w]
    if win.shape != (t_len, h, w):
        raise ValueError("window exceeds frame bounds")
    return win.reshape(-1).copy()


def grid_positions(extent: int, window: int, stride: int) -> np.ndarray:
    """Dense grid offsets along one axis: floor((extent-window)/stride)+1 of them."""
    if window > extent:
        raise ValueError(f"window {window} exceeds extent {extent}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    n = (extent - window) // stride + 1
    return np.arange(n, dtype=np.int64) * stride
