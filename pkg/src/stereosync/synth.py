"""Synthetic stereo data with known ground truth.

Random-dot stereograms carry a per-pixel depth channel where depth is
encoded as (disparity + 1) * 10 / 255 inside the coherent region and 0
(missing) outside, so a zero-disparity region stays distinguishable from
"no data" and the values survive an 8-bit PGM round trip exactly.
"""

from __future__ import annotations

import numpy as np

from .video import StereoSequence

GT_UNIT = 10.0 / 255.0


def disparity_to_gt(disparity_px: int) -> float:
    return (disparity_px + 1) * GT_UNIT


def gt_to_disparity(value: float) -> int:
    return int(round(value / GT_UNIT)) - 1


def _dots(rng, height, width, density, dot_size=1):
    if dot_size == 1:
        return (rng.random((height, width)) < density).astype(np.float64)
    # dots covering dot_size x dot_size cells; shifts stay 1-px grained
    hh = -(-height // dot_size)
    ww = -(-width // dot_size)
    small = (rng.random((hh, ww)) < density).astype(np.float64)
    return np.kron(small, np.ones((dot_size, dot_size)))[:height, :width]


def gen_random_dot_stereogram(
    width, height, disparity_px, dot_density, seed, margin=None, dot_size=1
) -> StereoSequence:
    """Random-dot pair whose central region is coherently shifted.

    Inside the region right[r, c] == left[r, c - disparity_px]; outside it
    the right channel is freshly random. The label records the disparity
    and the ground-truth channel marks the coherent region. dot_size > 1
    draws square dots of that many pixels, giving the pattern spatial
    correlation without changing the shift granularity.
    """
    if abs(disparity_px) >= width:
        raise ValueError(f"disparity {disparity_px} out of range for width {width}")
    if not 0.0 < dot_density < 1.0:
        raise ValueError("dot density must lie in (0, 1)")
    if dot_size < 1:
        raise ValueError("dot_size must be >= 1")
    if margin is None:
        margin = max(abs(disparity_px), min(width, height) // 8, 1)
    if 2 * margin >= width or 2 * margin >= height or margin < abs(disparity_px):
        raise ValueError(f"margin {margin} leaves no coherent region")
    rng = np.random.default_rng(seed)
    left = _dots(rng, height, width, dot_density, dot_size)
    right = _dots(rng, height, width, dot_density, dot_size)
    rs = slice(margin, height - margin)
    cs = slice(margin, width - margin)
    cols = np.arange(margin, width - margin)
    right[rs, cs] = left[rs.start : rs.stop, :][:, cols - disparity_px]
    gt = np.zeros((height, width))
    if disparity_px >= 0:
        gt[rs, cs] = disparity_to_gt(disparity_px)
    return StereoSequence(left, right, label=disparity_px, ground_truth=gt)


def gen_moving_pattern(width, height, num_frames, velocity_xy, seed) -> StereoSequence:
    """Dot field translating by velocity_xy per frame (toroidal wrap);
    left and right channels are identical."""
    if num_frames < 2:
        raise ValueError("a moving pattern needs at least 2 frames")
    vx, vy = velocity_xy
    rng = np.random.default_rng(seed)
    base = _dots(rng, height, width, 0.5)
    frames = np.empty((num_frames, height, width))
    for t in range(num_frames):
        frames[t] = np.roll(base, (t * vy, t * vx), axis=(0, 1))
    return StereoSequence(frames, frames.copy())


def gen_activity_clip(
    width, height, num_frames, disparity_px, velocity_xy, dot_density, seed, label=None
) -> StereoSequence:
    """Stereo clip of a translating dot field with constant disparity.

    Every right frame is the matching left frame rolled horizontally by
    the disparity, so depth and motion cues are exact everywhere.
    """
    if abs(disparity_px) >= width:
        raise ValueError(f"disparity {disparity_px} out of range for width {width}")
    vx, vy = velocity_xy
    rng = np.random.default_rng(seed)
    base = _dots(rng, height, width, dot_density)
    left = np.empty((num_frames, height, width))
    right = np.empty((num_frames, height, width))
    for t in range(num_frames):
        left[t] = np.roll(base, (t * vy, t * vx), axis=(0, 1))
        right[t] = np.roll(left[t], disparity_px, axis=1)
    return StereoSequence(left, right, label=label)


def gen_half_flat_pair(width, height, dot_density, seed, dot_size=1) -> StereoSequence:
    """Still pair: left half random dots, right half a flat field at the
    dot density's mean intensity. Both channels identical (zero disparity)."""
    rng = np.random.default_rng(seed)
    frame = np.full((height, width), dot_density)
    half = width // 2
    frame[:, :half] = _dots(rng, height, half, dot_density, dot_size)
    return StereoSequence(frame, frame.copy())
