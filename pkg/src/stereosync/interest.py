"""Norm-threshold interest points.

Hidden-code entries are positive, so the L1 norm is the plain sum; codes
whose norm falls below delta mark positions with too little structure to
keep. Deltas are calibrated per encoding mode (motion and joint codes sit
in [0.5, 1), so their norms never drop below Q/2 and a shared threshold
would be meaningless).
"""

from __future__ import annotations

import numpy as np


def feature_norm(codes) -> np.ndarray | float:
    """L1 norm of one code (returns float) or of each row of a code matrix."""
    codes = np.asarray(codes, dtype=np.float64)
    norms = np.abs(codes).sum(axis=-1)
    return float(norms) if norms.ndim == 0 else norms


def calibrate_delta(codes, delta_factor=1.0) -> float:
    """delta = delta_factor x mean code norm over a training set."""
    codes = np.asarray(codes, dtype=np.float64)
    if codes.size == 0:
        raise ValueError("empty training set")
    if delta_factor < 0:
        raise ValueError("delta_factor must be >= 0")
    return float(delta_factor * np.mean(feature_norm(np.atleast_2d(codes))))


def threshold_mask(codes, delta) -> np.ndarray:
    """True where the code norm is >= delta (retain); strict-less discards."""
    return np.atleast_1d(feature_norm(codes)) >= delta
