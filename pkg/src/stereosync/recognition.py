"""Bag-of-features activity recognition over spatio-temporal block codes.

Super blocks are cropped densely from a stereo clip; each one is described
by the hidden codes of its (typically 8) sub-blocks, concatenated and
PCA-reduced. Descriptors are vector-quantized against a k-means codebook,
clips become L1-normalized word histograms, and a one-vs-rest logistic
regression scores the classes. Fusion combines a depth pipeline and a
motion pipeline either at the descriptor level (concatenation) or at the
confidence level (averaging).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import interest, kernels, sae
from .tensorio import load_tensor, save_tensor
from .video import grid_positions


@dataclass
class BlockSpec:
    """Super-block and sub-block geometry: (frames, height, width) dims with
    (time, space) strides; the spatial stride applies to both axes."""

    super_dims: tuple[int, int, int]
    super_strides: tuple[int, int]
    sub_dims: tuple[int, int, int]
    sub_strides: tuple[int, int]

    def __post_init__(self):
        self.super_dims = tuple(int(v) for v in self.super_dims)
        self.sub_dims = tuple(int(v) for v in self.sub_dims)
        self.super_strides = tuple(int(v) for v in self.super_strides)
        self.sub_strides = tuple(int(v) for v in self.sub_strides)
        if any(s < 1 for s in self.super_strides + self.sub_strides):
            raise ValueError("strides must be >= 1")
        if any(b > s for b, s in zip(self.sub_dims, self.super_dims)):
            raise ValueError("sub-block dims must not exceed super-block dims")

    @classmethod
    def default(cls) -> "BlockSpec":
        # 14x20x20 supers at stride (7,10), 10x16x16 subs at stride (4,4):
        # 2x2x2 = 8 sub-blocks per super block
        return cls((14, 20, 20), (7, 10), (10, 16, 16), (4, 4))


def enumerate_subblocks(spec) -> np.ndarray:
    """(n, 3) array of (t, y, x) sub-block offsets inside one super block."""
    st, sy = spec.sub_strides
    ts = grid_positions(spec.super_dims[0], spec.sub_dims[0], st)
    ys = grid_positions(spec.super_dims[1], spec.sub_dims[1], sy)
    xs = grid_positions(spec.super_dims[2], spec.sub_dims[2], sy)
    grid = np.stack(np.meshgrid(ts, ys, xs, indexing="ij"), axis=-1)
    return grid.reshape(-1, 3)


def super_block_offsets(spec, num_frames, height, width) -> np.ndarray:
    """(n, 3) array of absolute super-block offsets over a clip."""
    st, ss = spec.super_strides
    ts = grid_positions(num_frames, spec.super_dims[0], st)
    ys = grid_positions(height, spec.super_dims[1], ss)
    xs = grid_positions(width, spec.super_dims[2], ss)
    grid = np.stack(np.meshgrid(ts, ys, xs, indexing="ij"), axis=-1)
    return grid.reshape(-1, 3)


@dataclass
class DescriptorSet:
    """Per-super-block descriptors of one clip, with the L1 norms of the
    concatenated (pre-reduction) codes used for interest thresholding."""

    positions: np.ndarray    # (n, 3) super-block offsets
    descriptors: np.ndarray  # (n, d)
    code_norms: np.ndarray   # (n,)
    label: int | None = None


def extract_descriptors(seq, bank, mode, spec, whiten, reducer=None) -> DescriptorSet:
    """Descriptor per super block: whitened sub-block pairs are encoded with
    the requested mode, the sub-block codes concatenated and PCA-reduced."""
    if mode not in sae.MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "MD" and bank.mode not in ("D", "MD"):
        raise ValueError("joint encoding needs a pair-trained bank")
    if mode in ("D", "M") and bank.mode != mode:
        raise ValueError(f"bank mode {bank.mode} does not match requested {mode}")
    supers = super_block_offsets(spec, seq.num_frames, seq.height, seq.width)
    subs = enumerate_subblocks(spec)
    n_sub = len(subs)
    offsets = (supers[:, None, :] + subs[None, :, :]).reshape(-1, 3)
    bt, bh, bw = spec.sub_dims
    blocks_x = kernels.gather_blocks(seq.left, offsets, bt, bh, bw)
    x = whiten.transform(blocks_x) if whiten is not None else blocks_x
    if mode == "M":
        codes = sae.encode(bank, mode, x)
    else:
        blocks_y = kernels.gather_blocks(seq.right, offsets, bt, bh, bw)
        y = whiten.transform(blocks_y) if whiten is not None else blocks_y
        codes = sae.encode(bank, mode, x, y)
    concat = codes.reshape(len(supers), n_sub * bank.q)
    norms = interest.feature_norm(concat)
    desc = reducer.transform(concat) if reducer is not None else concat
    return DescriptorSet(supers, desc, norms, label=seq.label)


def fuse_concat(a: DescriptorSet, b: DescriptorSet) -> DescriptorSet:
    """Position-wise concatenation of two descriptor sets of the same clip;
    code norms are summed so a shared interest threshold stays meaningful."""
    if a.positions.shape != b.positions.shape or np.any(a.positions != b.positions):
        raise ValueError("descriptor sets cover different positions")
    return DescriptorSet(
        a.positions,
        np.hstack([a.descriptors, b.descriptors]),
        a.code_norms + b.code_norms,
        label=a.label,
    )


@dataclass
class Codebook:
    centroids: np.ndarray  # (K, d)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


@dataclass
class KMeansFit:
    codebook: Codebook
    objective_trace: list[float]
    n_iters: int


def _kmeanspp_init(points, k, rng):
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[int(rng.integers(n))]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            centroids[i] = points[int(rng.integers(n))]
            continue
        centroids[i] = points[int(rng.choice(n, p=d2 / total))]
        d2 = np.minimum(d2, ((points - centroids[i]) ** 2).sum(axis=1))
    return centroids


def build_codebook(descriptors, k, max_iters=100, seed=0) -> KMeansFit:
    """k-means++ seeding then Lloyd iterations to an assignment fixpoint.

    Empty clusters are re-seeded to the point farthest from its centroid.
    The recorded objective (mean squared distance) never increases.
    """
    pts = np.asarray(descriptors, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError("descriptors must be (n, d)")
    n = pts.shape[0]
    if k < 1 or n < k:
        raise ValueError(f"need at least k={k} descriptors, have {n}")
    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(pts, k, rng)
    labels = np.full(n, -1, dtype=np.int64)
    trace = []
    for it in range(max_iters):
        new_labels, d2 = kernels.kmeans_assign(pts, centroids)
        trace.append(float(d2.mean()))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            member = labels == c
            if member.any():
                centroids[c] = pts[member].mean(axis=0)
            else:
                centroids[c] = pts[int(np.argmax(d2))]
                d2[int(np.argmax(d2))] = 0.0
    return KMeansFit(Codebook(centroids), trace, len(trace))


@dataclass
class BoWHistogram:
    """L1-normalized word frequencies; degenerate when nothing was retained
    (frequencies fall back to uniform)."""

    frequencies: np.ndarray
    retained: int
    degenerate: bool


def quantize_histogram(desc_set, codebook, delta=None) -> BoWHistogram:
    """Histogram of nearest-centroid assignments over retained descriptors.

    delta, when given, discards descriptors whose stored code norm falls
    below it before counting.
    """
    desc = desc_set.descriptors
    if desc.shape[1] != codebook.centroids.shape[1]:
        raise ValueError("descriptor dim does not match codebook")
    keep = np.ones(len(desc), dtype=bool)
    if delta is not None:
        keep = desc_set.code_norms >= delta
    k = codebook.k
    if not keep.any():
        return BoWHistogram(np.full(k, 1.0 / k), 0, True)
    labels, _ = kernels.kmeans_assign(desc[keep], codebook.centroids)
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    return BoWHistogram(counts / counts.sum(), int(keep.sum()), False)


@dataclass
class ActionClassifier:
    """One-vs-rest logistic regression with per-class weight vectors."""

    weights: np.ndarray  # (C, K)
    bias: np.ndarray     # (C,)
    classes: np.ndarray  # (C,) class ids


def train_classifier(histograms, labels, epochs=500, lr=1.0, l2=1e-4, seed=0) -> ActionClassifier:
    """Full-batch gradient descent on per-class logistic losses."""
    h = np.asarray(histograms, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if h.ndim != 2 or h.shape[0] != labels.shape[0]:
        raise ValueError("histograms and labels disagree")
    classes = np.unique(labels)
    n, k = h.shape
    rng = np.random.default_rng(seed)
    w = rng.uniform(-0.01, 0.01, size=(len(classes), k))
    b = np.zeros(len(classes))
    targets = (labels[None, :] == classes[:, None]).astype(np.float64)  # (C, n)
    for _ in range(epochs):
        p = sae.sigmoid(h @ w.T + b).T  # (C, n)
        g = p - targets
        w -= lr * ((g @ h) / n + l2 * w)
        b -= lr * g.mean(axis=1)
    return ActionClassifier(w, b, classes)


def predict_confidences(clf, histogram) -> np.ndarray:
    """Per-class confidences in (0, 1); rows for a batch of histograms."""
    h = np.asarray(histogram, dtype=np.float64)
    single = h.ndim == 1
    if np.atleast_2d(h).shape[1] != clf.weights.shape[1]:
        raise ValueError("histogram length does not match classifier")
    conf = sae.sigmoid(np.atleast_2d(h) @ clf.weights.T + clf.bias)
    return conf[0] if single else conf


def predict_labels(clf, histogram) -> np.ndarray:
    conf = np.atleast_2d(predict_confidences(clf, histogram))
    return clf.classes[np.argmax(conf, axis=1)]


def fuse_average(conf_a, conf_b) -> np.ndarray:
    """Mean of two confidence vectors over the same class set."""
    a = np.asarray(conf_a, dtype=np.float64)
    b = np.asarray(conf_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("confidence shapes differ")
    return (a + b) / 2.0


def average_precision(scores, labels) -> float:
    """Mean of precision at each positive item's rank; ties broken by
    descending score then ascending index."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be matching vectors")
    if not labels.any():
        raise ValueError("average precision needs at least one positive")
    order = np.lexsort((np.arange(len(scores)), -scores))
    ranked = labels[order]
    hits = np.cumsum(ranked)
    ranks = np.arange(1, len(scores) + 1)
    return float((hits[ranked] / ranks[ranked]).mean())


def mean_ap(per_class_aps) -> float:
    return float(np.mean(np.asarray(per_class_aps, dtype=np.float64)))


def correct_classification_rate(predictions, labels) -> float:
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape:
        raise ValueError("prediction and label counts differ")
    return float(np.mean(predictions == labels))


def evaluate(confidences, labels, classes) -> dict:
    """Per-class AP, mean AP, and correct-classification rate."""
    conf = np.asarray(confidences, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    classes = np.asarray(classes, dtype=np.int64)
    per_class = {}
    for i, c in enumerate(classes):
        per_class[int(c)] = average_precision(conf[:, i], labels == c)
    preds = classes[np.argmax(conf, axis=1)]
    return {
        "per_class_ap": per_class,
        "mean_ap": mean_ap(list(per_class.values())),
        "cc_rate": correct_classification_rate(preds, labels),
    }


def save_codebook(directory, cb, extra_meta=None) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_tensor(directory / "codebook.sstf", cb.centroids)
    meta = {"k": cb.k, "dim": int(cb.centroids.shape[1])}
    if extra_meta:
        meta.update(extra_meta)
    (directory / "codebook.json").write_text(
        json.dumps(meta, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )


def load_codebook(directory) -> Codebook:
    return Codebook(load_tensor(Path(directory) / "codebook.sstf").astype(np.float64))


def save_classifier(directory, clf, extra_meta=None) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_tensor(directory / "classifier_weights.sstf", clf.weights)
    save_tensor(directory / "classifier_bias.sstf", clf.bias)
    meta = {"classes": [int(c) for c in clf.classes]}
    if extra_meta:
        meta.update(extra_meta)
    (directory / "classifier.json").write_text(
        json.dumps(meta, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )


def load_classifier(directory) -> ActionClassifier:
    directory = Path(directory)
    meta = json.loads((directory / "classifier.json").read_text(encoding="utf-8"))
    return ActionClassifier(
        weights=load_tensor(directory / "classifier_weights.sstf").astype(np.float64),
        bias=load_tensor(directory / "classifier_bias.sstf").astype(np.float64),
        classes=np.asarray(meta["classes"], dtype=np.int64),
    )
