"""Pure-numpy kernel implementations (fallback backend)."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _sigmoid(u):
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    out[~pos] = eu / (1.0 + eu)
    return out


def sae_batch_obj_grad(wx, wy, x, y, lam, swap_pairing):
    b = x.shape[0]
    fx = x @ wx.T
    fy = y @ wy.T
    h = _sigmoid(fx * fy)
    s = h * (1.0 - h)
    ax = h * fy
    ay = h * fx
    rx = ax @ wx - x
    ry = ay @ wy - y
    loss = np.einsum("bi,bi->", rx, rx) + np.einsum("bi,bi->", ry, ry)

    wrx = rx @ wx.T
    wry = ry @ wy.T
    cross = s * fx * fy + h
    mx = wrx * s * fy * fy + wry * cross
    my = wry * s * fx * fx + wrx * cross
    gwx = 2.0 * (ax.T @ rx + mx.T @ x)
    gwy = 2.0 * (ay.T @ ry + my.T @ y)

    pen = 0.0
    if lam != 0.0:
        cx = np.einsum("qi,qi->q", wx, wx)
        cy = np.einsum("qi,qi->q", wy, wy)
        if swap_pairing:
            px, py = fx * fx, fy * fy
        else:
            px, py = fy * fy, fx * fx
        s2 = s * s
        base = px * cx + py * cy
        pen = np.einsum("bq,bq->", s2, base)
        one2h = 1.0 - 2.0 * h
        if swap_pairing:
            gx = 2.0 * s2 * (one2h * fy * base + fx * cx)
            gy = 2.0 * s2 * (one2h * fx * base + fy * cy)
        else:
            gx = 2.0 * s2 * (one2h * fy * base + fx * cy)
            gy = 2.0 * s2 * (one2h * fx * base + fy * cx)
        gwx += lam * (gx.T @ x + 2.0 * (s2 * px).sum(axis=0)[:, None] * wx)
        gwy += lam * (gy.T @ y + 2.0 * (s2 * py).sum(axis=0)[:, None] * wy)

    obj = (loss + lam * pen) / b
    gwx /= b
    gwy /= b
    return obj, gwx, gwy


def gather_patches(frame, ph, pw, sy, sx):
    win = sliding_window_view(frame, (ph, pw))[::sy, ::sx]
    rows, cols = win.shape[:2]
    return np.ascontiguousarray(win).reshape(rows * cols, ph * pw)


def gather_blocks(video, offsets, bt, bh, bw):
    win = sliding_window_view(video, (bt, bh, bw))
    sel = win[offsets[:, 0], offsets[:, 1], offsets[:, 2]]
    return np.ascontiguousarray(sel).reshape(offsets.shape[0], bt * bh * bw)


def kmeans_assign(points, centroids):
    n = points.shape[0]
    labels = np.empty(n, dtype=np.int64)
    dists = np.empty(n, dtype=np.float64)
    # chunk the (B, K, d) broadcast to bound memory
    step = max(1, int(4e6) // max(1, centroids.size))
    for i in range(0, n, step):
        d2 = ((points[i : i + step, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        lab = np.argmin(d2, axis=1)
        labels[i : i + step] = lab
        dists[i : i + step] = d2[np.arange(d2.shape[0]), lab]
    return labels, dists


def _axis_weights(n_out, n_in):
    # overlap of output cell [i*r, (i+1)*r) with input cell [j, j+1), r = n_in/n_out
    r = n_in / n_out
    wts = np.zeros((n_out, n_in))
    for i in range(n_out):
        lo = i * r
        hi = (i + 1) * r
        j0 = int(np.floor(lo))
        j1 = min(int(np.ceil(hi)), n_in)
        for j in range(j0, j1):
            wts[i, j] = min(hi, j + 1.0) - max(lo, float(j))
    return wts / r


def box_downsample(frame, new_h, new_w):
    h, w = frame.shape
    return _axis_weights(new_h, h) @ frame @ _axis_weights(new_w, w).T
