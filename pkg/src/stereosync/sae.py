"""Synchrony autoencoder: multiplicative filter-response interactions.

Two filter banks project the two inputs of a pair onto Q factors; the
hidden code passes their elementwise product through a logistic sigmoid,
so a unit fires when its filter pair responds in sync across the inputs.
Three encodings share one bank format:

  pair   h_q = sigmoid(fx_q * fy_q)            stereo / cross-channel
  motion h_q = sigmoid(fx_q^2)                 single channel, tied bank
  joint  h_q = sigmoid(fx_q^2 * fy_q^2)        both, inference only

The joint encoding is never trained directly; it reuses a pair-trained
bank (its higher exponents make the contraction term unstable).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .tensorio import load_tensor, save_tensor

MODES = ("D", "M", "MD")


class DivergenceError(RuntimeError):
    """Training objective became non-finite."""


def sigmoid(u):
    u = np.asarray(u, dtype=np.float64)
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    out[~pos] = eu / (1.0 + eu)
    return out


@dataclass
class FilterBank:
    """Paired filter matrices (Q x N). When tied, wy is the same array as wx."""

    wx: np.ndarray
    wy: np.ndarray
    tied: bool = False
    mode: str = "D"

    def __post_init__(self):
        self.wx = np.asarray(self.wx, dtype=np.float64)
        if self.tied:
            self.wy = self.wx
        else:
            self.wy = np.asarray(self.wy, dtype=np.float64)
        if self.wx.shape != self.wy.shape or self.wx.ndim != 2:
            raise ValueError("wx and wy must be matrices of identical shape")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    @property
    def q(self) -> int:
        return self.wx.shape[0]

    @property
    def n(self) -> int:
        return self.wx.shape[1]

    def retagged(self, mode: str) -> "FilterBank":
        return FilterBank(self.wx, self.wy, tied=self.tied, mode=mode)


def init_bank(q, n, seed, init_scale=None, tied=False, mode="D") -> FilterBank:
    """Uniform init in [-s, s], s defaulting to 1/sqrt(N)."""
    if init_scale is None:
        init_scale = 1.0 / np.sqrt(n)
    rng = np.random.default_rng(seed)
    wx = rng.uniform(-init_scale, init_scale, size=(q, n))
    wy = wx if tied else rng.uniform(-init_scale, init_scale, size=(q, n))
    return FilterBank(wx, wy, tied=tied, mode=mode)


def _rows(v, n, what):
    v = np.asarray(v, dtype=np.float64)
    single = v.ndim == 1
    if v.shape[-1] != n:
        raise ValueError(f"{what} has dim {v.shape[-1]}, bank expects {n}")
    return np.atleast_2d(v), single


def factors(bank, x, y):
    """Linear filter responses (fx, fy) = (Wx x, Wy y)."""
    x, single = _rows(x, bank.n, "x")
    y, _ = _rows(y, bank.n, "y")
    if x.shape != y.shape:
        raise ValueError("x and y batch shapes differ")
    fx = x @ bank.wx.T
    fy = y @ bank.wy.T
    return (fx[0], fy[0]) if single else (fx, fy)


def encode_pair(bank, x, y):
    """Pair (depth) code: sigmoid of the factor product."""
    fx, fy = factors(bank, x, y)
    return sigmoid(fx * fy)


def encode_motion(bank, x):
    """Motion code on a single channel: sigmoid of the squared factor.

    Requires a tied bank; equal to encode_pair(x, x) exactly.
    """
    if not bank.tied:
        raise ValueError("motion encoding requires a tied bank")
    x, single = _rows(x, bank.n, "x")
    fx = x @ bank.wx.T
    h = sigmoid(fx * fx)
    return h[0] if single else h


def encode_joint(bank, x, y):
    """Joint depth+motion code: sigmoid of the product of squared factors."""
    fx, fy = factors(bank, x, y)
    return sigmoid(fx * fx * fy * fy)


def encode(bank, mode, x, y=None):
    """Mode-dispatched encoding; y is ignored for mode M."""
    if mode == "D":
        return encode_pair(bank, x, y)
    if mode == "M":
        return encode_motion(bank, x)
    if mode == "MD":
        return encode_joint(bank, x, y)
    raise ValueError(f"unknown mode {mode!r}")


def decode(bank, h, fx, fy):
    """Gated reconstructions: each input rebuilt from the other's factors."""
    h = np.asarray(h, dtype=np.float64)
    xh = (h * fy) @ bank.wx
    yh = (h * fx) @ bank.wy
    return xh, yh


def reconstruction_loss(x, y, xh, yh) -> float:
    """Symmetric squared reconstruction error of the pair."""
    x, y, xh, yh = (np.asarray(v, dtype=np.float64) for v in (x, y, xh, yh))
    if x.shape != xh.shape or y.shape != yh.shape:
        raise ValueError("reconstruction shape mismatch")
    return float(((x - xh) ** 2).sum() + ((y - yh) ** 2).sum())


def contraction_penalty(bank, x, y, pairing="analytic") -> float:
    """Squared Frobenius norm of the pair encoder's input Jacobian.

    pairing="analytic" is the correct derivative (squared y-factors weight
    the x-filter norms and vice versa); pairing="as-printed" is the
    compatibility variant with the factor roles swapped, kept for
    comparison. The two agree on tied banks with symmetric inputs.
    """
    if pairing not in ("analytic", "as-printed"):
        raise ValueError("pairing must be 'analytic' or 'as-printed'")
    fx, fy = factors(bank, x, y)
    fx, fy = np.atleast_2d(fx), np.atleast_2d(fy)
    h = sigmoid(fx * fy)
    s2 = (h * (1.0 - h)) ** 2
    cx = (bank.wx**2).sum(axis=1)
    cy = (bank.wy**2).sum(axis=1)
    if pairing == "analytic":
        px, py = fy**2, fx**2
    else:
        px, py = fx**2, fy**2
    return float((s2 * (px * cx + py * cy)).sum())


def objective(bank, x, y, lam, pairing="analytic") -> float:
    """Mean over the batch of reconstruction loss + lam * contraction."""
    if lam < 0:
        raise ValueError("lam must be >= 0")
    x, _ = _rows(x, bank.n, "x")
    y, _ = _rows(y, bank.n, "y")
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    total = 0.0
    for xi, yi in zip(x, y):
        fx, fy = factors(bank, xi, yi)
        h = sigmoid(fx * fy)
        xh, yh = decode(bank, h, fx, fy)
        total += reconstruction_loss(xi, yi, xh, yh)
        if lam:
            total += lam * contraction_penalty(bank, xi, yi, pairing)
    return total / x.shape[0]


def gradient(bank, x, y, lam, pairing="analytic"):
    """Analytic mean gradient of the objective with respect to the bank.

    Returns (gwx, gwy); for tied banks gwx carries the summed gradient and
    gwy is None.
    """
    if pairing not in ("analytic", "as-printed"):
        raise ValueError("pairing must be 'analytic' or 'as-printed'")
    x, _ = _rows(x, bank.n, "x")
    y, _ = _rows(y, bank.n, "y")
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    _, gwx, gwy = kernels.sae_batch_obj_grad(
        bank.wx, bank.wy, x, y, lam, swap_pairing=(pairing == "as-printed")
    )
    if bank.tied:
        return gwx + gwy, None
    return gwx, gwy


@dataclass
class TrainConfig:
    q: int
    lam: float = 0.5
    learning_rate: float = 0.01
    momentum: float = 0.9
    batch_size: int = 100
    epochs: int = 10
    seed: int = 0
    init_scale: float | None = None

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.learning_rate < 0:
            raise ValueError("learning rate must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")


@dataclass
class TrainResult:
    bank: FilterBank
    objective_trace: list[float] = field(default_factory=list)


def train(config, x, y=None, mode="D", init=None) -> TrainResult:
    """Minibatch gradient descent with momentum on the regularized objective.

    Mode D trains an untied bank on whitened pairs (x, y); mode M trains a
    tied bank on a single channel (y ignored). Joint (MD) banks are not
    trained: retag a pair-trained bank instead.
    """
    if mode == "MD":
        raise ValueError("joint banks are pair-trained; retag a mode-D bank")
    if mode not in ("D", "M"):
        raise ValueError(f"unknown training mode {mode!r}")
    x = np.asarray(x, dtype=np.float64)
    if mode == "M":
        y = x
    else:
        if y is None:
            raise ValueError("mode D needs both channels")
        y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 2:
        raise ValueError("training data must be matching (n, N) matrices")

    n_samples, n = x.shape
    tied = mode == "M"
    if init is not None:
        if init.n != n:
            raise ValueError("init bank dimensionality differs from data")
        if mode == "M" and not init.tied:
            raise ValueError("mode M requires a tied init bank")
        bank = FilterBank(init.wx.copy(), init.wx.copy() if init.tied else init.wy.copy(),
                          tied=init.tied, mode=mode)
    else:
        bank = init_bank(config.q, n, config.seed, config.init_scale, tied=tied, mode=mode)

    rng = np.random.default_rng(config.seed)
    vel_x = np.zeros_like(bank.wx)
    vel_y = None if bank.tied else np.zeros_like(bank.wy)
    trace = []
    swap = False
    for epoch in range(config.epochs):
        order = rng.permutation(n_samples)
        epoch_obj = 0.0
        n_batches = 0
        for start in range(0, n_samples, config.batch_size):
            idx = order[start : start + config.batch_size]
            obj, gwx, gwy = kernels.sae_batch_obj_grad(
                bank.wx, bank.wy, x[idx], y[idx], config.lam, swap
            )
            if not np.isfinite(obj):
                raise DivergenceError(f"objective diverged at epoch {epoch}")
            epoch_obj += obj
            n_batches += 1
            if bank.tied:
                vel_x = config.momentum * vel_x - config.learning_rate * (gwx + gwy)
                bank.wx += vel_x
            else:
                vel_x = config.momentum * vel_x - config.learning_rate * gwx
                vel_y = config.momentum * vel_y - config.learning_rate * gwy
                bank.wx += vel_x
                bank.wy += vel_y
        trace.append(epoch_obj / max(n_batches, 1))
    return TrainResult(bank=bank, objective_trace=trace)


def save_bank(directory, bank, extra_meta=None) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_tensor(directory / "wx.sstf", bank.wx)
    if not bank.tied:
        save_tensor(directory / "wy.sstf", bank.wy)
    meta = {"mode": bank.mode, "tied": bank.tied, "q": bank.q, "n": bank.n}
    if extra_meta:
        meta.update(extra_meta)
    (directory / "bank.json").write_text(
        json.dumps(meta, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )


def load_bank(directory) -> tuple[FilterBank, dict]:
    directory = Path(directory)
    meta = json.loads((directory / "bank.json").read_text(encoding="utf-8"))
    wx = load_tensor(directory / "wx.sstf").astype(np.float64)
    if meta["tied"]:
        bank = FilterBank(wx, wx, tied=True, mode=meta["mode"])
    else:
        wy = load_tensor(directory / "wy.sstf").astype(np.float64)
        bank = FilterBank(wx, wy, tied=False, mode=meta["mode"])
    return bank, meta
