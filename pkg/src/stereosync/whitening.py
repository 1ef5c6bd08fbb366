"""PCA whitening of training patches and PCA reduction of descriptors.

One fitted transform covers both uses: whitening rescales each retained
component by (eigenvalue + eps)^-1/2, reduction keeps unit-norm eigenvector
rows. Covariance is the population covariance (divide by n) of the sample
set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .tensorio import load_tensor, save_tensor


class DegenerateDataError(ValueError):
    """Raised when the data has no usable variance."""


@dataclass
class WhiteningTransform:
    mean: np.ndarray          # (D,)
    projection: np.ndarray    # (d_keep, D)
    eigenvalues: np.ndarray   # (d_keep,) descending
    epsilon: float
    rescaled: bool            # True: whitening; False: plain PCA reduction

    @property
    def input_dim(self) -> int:
        return self.mean.shape[0]

    @property
    def output_dim(self) -> int:
        return self.projection.shape[0]

    def transform(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape[-1] != self.input_dim:
            raise ValueError(f"expected dim {self.input_dim}, got {v.shape[-1]}")
        return (v - self.mean) @ self.projection.T

    def inverse_transform(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        if self.rescaled:
            back = self.projection.T * (self.eigenvalues + self.epsilon)
        else:
            back = self.projection.T
        return z @ back.T + self.mean


def _eigendecompose(samples, epsilon):
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("samples must be a 2-D (n, D) array")
    n, d = x.shape
    if n < 2:
        raise ValueError("need at least 2 samples")
    mean = x.mean(axis=0)
    xc = x - mean
    cov = (xc.T @ xc) / n
    # threshold relative to the data scale so constant data rounds to zero
    if np.trace(cov) <= 1e-20 * (1.0 + float((mean**2).sum())):
        raise DegenerateDataError("all-constant data: covariance is zero")
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    if evals[0] + epsilon <= 0:
        raise DegenerateDataError("no positive variance after regularization")
    return mean, np.maximum(evals, 0.0), evecs


def _select(evals, d_keep, variance_keep):
    d = len(evals)
    if d_keep is not None:
        if not 1 <= d_keep <= d:
            raise ValueError(f"d_keep must be in [1, {d}]")
        return d_keep
    if variance_keep is not None:
        if not 0 < variance_keep <= 1:
            raise ValueError("variance_keep must be in (0, 1]")
        frac = np.cumsum(evals) / evals.sum()
        return int(np.searchsorted(frac, variance_keep) + 1)
    return d


def fit_pca_whitening(samples, d_keep=None, variance_keep=None, epsilon=1e-8) -> WhiteningTransform:
    """Fit a whitening transform: projection = diag((l+eps)^-1/2) E_keep^T.

    Transformed training data has unit variance per retained component.
    """
    mean, evals, evecs = _eigendecompose(samples, epsilon)
    k = _select(evals, d_keep, variance_keep)
    evals = evals[:k]
    if np.any(evals + epsilon <= 0):
        raise DegenerateDataError("retained component with nonpositive variance")
    proj = evecs[:, :k].T / np.sqrt(evals + epsilon)[:, None]
    return WhiteningTransform(mean, proj, evals, float(epsilon), rescaled=True)


def fit_pca_reduction(samples, d_out) -> WhiteningTransform:
    """Fit a plain PCA reduction: unit-norm eigenvector rows, no rescaling."""
    mean, evals, evecs = _eigendecompose(samples, 0.0)
    k = _select(evals, d_out, None)
    return WhiteningTransform(mean, evecs[:, :k].T.copy(), evals[:k], 0.0, rescaled=False)


def save_whitening(directory, t: WhiteningTransform, prefix="whitening") -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_tensor(directory / f"{prefix}_mean.sstf", t.mean)
    save_tensor(directory / f"{prefix}_projection.sstf", t.projection)
    save_tensor(directory / f"{prefix}_eigenvalues.sstf", t.eigenvalues)
    meta = {
        "epsilon": t.epsilon,
        "rescaled": t.rescaled,
        "input_dim": t.input_dim,
        "output_dim": t.output_dim,
    }
    (directory / f"{prefix}.json").write_text(
        json.dumps(meta, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )


def load_whitening(directory, prefix="whitening") -> WhiteningTransform:
    directory = Path(directory)
    meta = json.loads((directory / f"{prefix}.json").read_text(encoding="utf-8"))
    return WhiteningTransform(
        mean=load_tensor(directory / f"{prefix}_mean.sstf").astype(np.float64),
        projection=load_tensor(directory / f"{prefix}_projection.sstf").astype(np.float64),
        eigenvalues=load_tensor(directory / f"{prefix}_eigenvalues.sstf").astype(np.float64),
        epsilon=float(meta["epsilon"]),
        rescaled=bool(meta["rescaled"]),
    )
