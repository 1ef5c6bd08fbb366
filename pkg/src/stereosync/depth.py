"""Depth-bin calibration of hidden codes and dense depth-map prediction.

Depth targets are the mean over nonzero ground-truth values of a patch,
quantized into bins (quantile by default, linear optional). A multinomial
softmax regression maps hidden codes to bin labels; sliding the encoder and
classifier over a dense patch grid yields one label per grid position,
1 = far through n_bins = near.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import interest, kernels, sae
from .pgm import write_pgm
from .tensorio import load_tensor, save_tensor


def fit_depth_bins(means, n_bins=25, method="quantile") -> np.ndarray:
    """Bin edges (n_bins + 1, ascending) over training patch means.

    quantile: equal-population edges; linear: equal-width over [min, max].
    """
    means = np.asarray(means, dtype=np.float64)
    if means.ndim != 1 or means.size == 0:
        raise ValueError("means must be a nonempty vector")
    if method == "quantile":
        if np.unique(means).size < n_bins:
            raise ValueError(f"need at least {n_bins} distinct means")
        edges = np.quantile(means, np.linspace(0.0, 1.0, n_bins + 1))
    elif method == "linear":
        lo, hi = means.min(), means.max()
        if lo == hi:
            raise ValueError("constant means cannot be binned")
        edges = np.linspace(lo, hi, n_bins + 1)
    else:
        raise ValueError("method must be 'quantile' or 'linear'")
    if not np.all(np.diff(edges) > 0):
        raise ValueError("bin edges are not strictly increasing; too few distinct means")
    return edges


def make_depth_label(values, bin_edges) -> int:
    """1-based bin of the mean over nonzero values; bins are half-open
    [edge_k, edge_{k+1}), last bin closed, result clamped into range."""
    values = np.asarray(values, dtype=np.float64)
    nz = values[values != 0]
    if nz.size == 0:
        raise ValueError("ground-truth window has no data")
    edges = np.asarray(bin_edges, dtype=np.float64)
    idx = int(np.searchsorted(edges, nz.mean(), side="right")) - 1
    return int(np.clip(idx, 0, len(edges) - 2)) + 1


@dataclass
class DepthCalibrator:
    """Softmax weights mapping a hidden code to a depth bin."""

    weights: np.ndarray    # (n_bins, Q)
    bias: np.ndarray       # (n_bins,)
    bin_edges: np.ndarray  # (n_bins + 1,)

    @property
    def n_bins(self) -> int:
        return self.weights.shape[0]


def _softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def fit_calibrator(codes, labels, bin_edges, epochs=300, lr=0.5, seed=0) -> "CalibratorFit":
    """Full-batch gradient descent on the multinomial cross-entropy."""
    codes = np.asarray(codes, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if codes.ndim != 2 or codes.shape[0] == 0:
        raise ValueError("codes must be a nonempty (n, Q) matrix")
    edges = np.asarray(bin_edges, dtype=np.float64)
    n_bins = len(edges) - 1
    if labels.min() < 1 or labels.max() > n_bins:
        raise ValueError(f"labels must lie in 1..{n_bins}")
    n, q = codes.shape
    rng = np.random.default_rng(seed)
    w = rng.uniform(-0.01, 0.01, size=(n_bins, q))
    b = np.zeros(n_bins)
    onehot = np.zeros((n, n_bins))
    onehot[np.arange(n), labels - 1] = 1.0
    trace = []
    for _ in range(epochs):
        p = _softmax(codes @ w.T + b)
        trace.append(float(-(onehot * np.log(np.clip(p, 1e-12, None))).sum() / n))
        g = (p - onehot) / n
        w -= lr * (g.T @ codes)
        b -= lr * g.sum(axis=0)
    return CalibratorFit(DepthCalibrator(w, b, edges), trace)


@dataclass
class CalibratorFit:
    calibrator: DepthCalibrator
    loss_trace: list[float]


def predict_proba(cal, codes) -> np.ndarray:
    codes = np.atleast_2d(np.asarray(codes, dtype=np.float64))
    return _softmax(codes @ cal.weights.T + cal.bias)


def predict_bins(cal, codes) -> np.ndarray:
    """1-based bin labels, argmax of the softmax confidences."""
    return np.argmax(predict_proba(cal, codes), axis=1) + 1


@dataclass
class DepthMap:
    """Grid of bin labels; 0 marks a masked-out (absent) cell."""

    labels: np.ndarray  # (rows, cols) int
    n_bins: int
    stride: int
    patch_w: int
    patch_h: int

    @property
    def shape(self):
        return self.labels.shape


def grid_codes(bank, seq, whiten, patch_w=16, patch_h=16, stride=4, mode="D"):
    """Hidden codes at every dense grid position of a still stereo pair.

    Returns (codes (rows*cols, Q), rows, cols); positions walk row-major.
    """
    if seq.num_frames != 1:
        raise ValueError("dense grids are defined on still pairs")
    px, rows, cols = kernels.gather_patches(seq.left[0], patch_h, patch_w, stride, stride)
    py, _, _ = kernels.gather_patches(seq.right[0], patch_h, patch_w, stride, stride)
    x = whiten.transform(px) if whiten is not None else px
    y = whiten.transform(py) if whiten is not None else py
    return sae.encode(bank, mode, x, y), rows, cols


def predict_depth_map(bank, cal, seq, whiten, patch_w=16, patch_h=16, stride=4) -> DepthMap:
    """One predicted bin label per dense grid position of the stereo pair."""
    codes, rows, cols = grid_codes(bank, seq, whiten, patch_w, patch_h, stride)
    labels = predict_bins(cal, codes).reshape(rows, cols)
    return DepthMap(labels, cal.n_bins, stride, patch_w, patch_h)


def interest_mask(bank, seq, whiten, delta, patch_w=16, patch_h=16, stride=4) -> np.ndarray:
    """Norm-threshold mask over the same dense grid as the depth map."""
    codes, rows, cols = grid_codes(bank, seq, whiten, patch_w, patch_h, stride)
    return interest.threshold_mask(codes, delta).reshape(rows, cols)


def mask_depth_map(dm, mask) -> DepthMap:
    """Flag cells failing the interest mask as absent (label 0)."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != dm.labels.shape:
        raise ValueError(f"mask shape {mask.shape} != map shape {dm.labels.shape}")
    return DepthMap(np.where(mask, dm.labels, 0), dm.n_bins, dm.stride, dm.patch_w, dm.patch_h)


def save_depth_map_pgm(path, dm) -> None:
    """Labels 1..n_bins scale to 10..250 gray; absent cells are 0 (black)."""
    img = dm.labels * (10.0 / 255.0)
    write_pgm(path, img)


def save_depth_map_tensor(path, dm) -> None:
    save_tensor(path, dm.labels.astype(np.float64))


def save_calibrator(directory, cal, extra_meta=None) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_tensor(directory / "calibrator_weights.sstf", cal.weights)
    save_tensor(directory / "calibrator_bias.sstf", cal.bias)
    save_tensor(directory / "calibrator_edges.sstf", cal.bin_edges)
    meta = {"n_bins": cal.n_bins}
    if extra_meta:
        meta.update(extra_meta)
    (directory / "calibrator.json").write_text(
        json.dumps(meta, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )


def load_calibrator(directory) -> DepthCalibrator:
    directory = Path(directory)
    return DepthCalibrator(
        weights=load_tensor(directory / "calibrator_weights.sstf").astype(np.float64),
        bias=load_tensor(directory / "calibrator_bias.sstf").astype(np.float64),
        bin_edges=load_tensor(directory / "calibrator_edges.sstf").astype(np.float64),
    )
