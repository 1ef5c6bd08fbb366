"""Numba-jitted kernel implementations.

Loops are organized so parallel regions only ever write disjoint rows and
batch accumulation stays in sample order, keeping results deterministic
regardless of thread count.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange


@njit(cache=True, inline="always")
def _sig(u):
    if u >= 0.0:
        return 1.0 / (1.0 + np.exp(-u))
    e = np.exp(u)
    return e / (1.0 + e)


@njit(cache=True, parallel=True)
def sae_batch_obj_grad(wx, wy, x, y, lam, swap_pairing):
    b, n = x.shape
    q = wx.shape[0]
    gwx = np.zeros((q, n))
    gwy = np.zeros((q, n))
    cx = np.empty(q)
    cy = np.empty(q)
    for j in prange(q):
        sx = 0.0
        sy = 0.0
        for i in range(n):
            sx += wx[j, i] * wx[j, i]
            sy += wy[j, i] * wy[j, i]
        cx[j] = sx
        cy[j] = sy

    fx = np.empty(q)
    fy = np.empty(q)
    h = np.empty(q)
    s = np.empty(q)
    ax = np.empty(q)
    ay = np.empty(q)
    rx = np.empty(n)
    ry = np.empty(n)
    wrx = np.empty(q)
    wry = np.empty(q)
    srx = np.zeros(q)
    sry = np.zeros(q)
    total = 0.0

    for bi in range(b):
        for j in prange(q):
            afx = 0.0
            afy = 0.0
            for i in range(n):
                afx += wx[j, i] * x[bi, i]
                afy += wy[j, i] * y[bi, i]
            fx[j] = afx
            fy[j] = afy
            hj = _sig(afx * afy)
            h[j] = hj
            s[j] = hj * (1.0 - hj)
            ax[j] = hj * afy
            ay[j] = hj * afx
        loss = 0.0
        for i in prange(n):
            vx = 0.0
            vy = 0.0
            for j in range(q):
                vx += wx[j, i] * ax[j]
                vy += wy[j, i] * ay[j]
            rx[i] = vx - x[bi, i]
            ry[i] = vy - y[bi, i]
        for i in range(n):
            loss += rx[i] * rx[i] + ry[i] * ry[i]
        for j in prange(q):
            ux = 0.0
            uy = 0.0
            for i in range(n):
                ux += wx[j, i] * rx[i]
                uy += wy[j, i] * ry[i]
            wrx[j] = ux
            wry[j] = uy

        pen = 0.0
        for j in prange(q):
            cross = s[j] * fx[j] * fy[j] + h[j]
            mx = wrx[j] * s[j] * fy[j] * fy[j] + wry[j] * cross
            my = wry[j] * s[j] * fx[j] * fx[j] + wrx[j] * cross
            gxj = 0.0
            gyj = 0.0
            if lam != 0.0:
                if swap_pairing:
                    pxj = fx[j] * fx[j]
                    pyj = fy[j] * fy[j]
                else:
                    pxj = fy[j] * fy[j]
                    pyj = fx[j] * fx[j]
                s2 = s[j] * s[j]
                base = pxj * cx[j] + pyj * cy[j]
                one2h = 1.0 - 2.0 * h[j]
                if swap_pairing:
                    gxj = 2.0 * s2 * (one2h * fy[j] * base + fx[j] * cx[j])
                    gyj = 2.0 * s2 * (one2h * fx[j] * base + fy[j] * cy[j])
                else:
                    gxj = 2.0 * s2 * (one2h * fy[j] * base + fx[j] * cy[j])
                    gyj = 2.0 * s2 * (one2h * fx[j] * base + fy[j] * cx[j])
                srx[j] += s2 * pxj
                sry[j] += s2 * pyj
            for i in range(n):
                gwx[j, i] += 2.0 * (ax[j] * rx[i]) + (2.0 * mx + lam * gxj) * x[bi, i]
                gwy[j, i] += 2.0 * (ay[j] * ry[i]) + (2.0 * my + lam * gyj) * y[bi, i]
        if lam != 0.0:
            pj = 0.0
            for j in range(q):
                s2 = s[j] * s[j]
                if swap_pairing:
                    pj += s2 * (fx[j] * fx[j] * cx[j] + fy[j] * fy[j] * cy[j])
                else:
                    pj += s2 * (fy[j] * fy[j] * cx[j] + fx[j] * fx[j] * cy[j])
            pen = pj
        total += loss + lam * pen

    for j in prange(q):
        for i in range(n):
            gwx[j, i] = (gwx[j, i] + lam * 2.0 * srx[j] * wx[j, i]) / b
            gwy[j, i] = (gwy[j, i] + lam * 2.0 * sry[j] * wy[j, i]) / b
    return total / b, gwx, gwy


@njit(cache=True, parallel=True)
def gather_patches(frame, ph, pw, sy, sx):
    rows = (frame.shape[0] - ph) // sy + 1
    cols = (frame.shape[1] - pw) // sx + 1
    out = np.empty((rows * cols, ph * pw))
    for g in prange(rows * cols):
        y0 = (g // cols) * sy
        x0 = (g % cols) * sx
        k = 0
        for a in range(ph):
            for c in range(pw):
                out[g, k] = frame[y0 + a, x0 + c]
                k += 1
    return out


@njit(cache=True, parallel=True)
def gather_blocks(video, offsets, bt, bh, bw):
    p = offsets.shape[0]
    out = np.empty((p, bt * bh * bw))
    for g in prange(p):
        t0 = offsets[g, 0]
        y0 = offsets[g, 1]
        x0 = offsets[g, 2]
        k = 0
        for t in range(bt):
            for a in range(bh):
                for c in range(bw):
                    out[g, k] = video[t0 + t, y0 + a, x0 + c]
                    k += 1
    return out


@njit(cache=True, parallel=True)
def kmeans_assign(points, centroids):
    n, d = points.shape
    k = centroids.shape[0]
    labels = np.empty(n, dtype=np.int64)
    dists = np.empty(n)
    for i in prange(n):
        best = 0
        bestd = np.inf
        for c in range(k):
            acc = 0.0
            for j in range(d):
                diff = points[i, j] - centroids[c, j]
                acc += diff * diff
            if acc < bestd:
                bestd = acc
                best = c
        labels[i] = best
        dists[i] = bestd
    return labels, dists


@njit(cache=True)
def _axis_weights(n_out, n_in):
    r = n_in / n_out
    wts = np.zeros((n_out, n_in))
    for i in range(n_out):
        lo = i * r
        hi = (i + 1) * r
        j0 = int(np.floor(lo))
        j1 = min(int(np.ceil(hi)), n_in)
        for j in range(j0, j1):
            top = hi if hi < j + 1.0 else j + 1.0
            bot = lo if lo > j else float(j)
            wts[i, j] = top - bot
    return wts / r


@njit(cache=True, parallel=True)
def box_downsample(frame, new_h, new_w):
    h, w = frame.shape
    wr = _axis_weights(new_h, h)
    wc = _axis_weights(new_w, w)
    out = np.empty((new_h, new_w))
    for i in prange(new_h):
        for j in range(new_w):
            acc = 0.0
            for a in range(h):
                ra = wr[i, a]
                if ra == 0.0:
                    continue
                inner = 0.0
                for c in range(w):
                    if wc[j, c] != 0.0:
                        inner += wc[j, c] * frame[a, c]
                acc += ra * inner
            out[i, j] = acc
    return out
