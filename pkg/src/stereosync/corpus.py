"""Corpus layout, manifest parsing, and patch-pair sampling.

A corpus is a directory of 8-bit binary PGM frames plus a ``manifest.tsv``
with one record per line and tab-separated fields::

    left    right    depth    class

``left``/``right``/``depth`` are comma-joined frame paths relative to the
manifest (one path per frame, in time order); ``depth`` and ``class`` may be
``-`` for absent. Intensities are scaled to [0, 1] on load.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import pgm
from .video import StereoSequence

MANIFEST_NAME = "manifest.tsv"


@dataclass
class CorpusRecord:
    left: tuple[str, ...]
    right: tuple[str, ...]
    depth: tuple[str, ...] | None
    label: int | None


@dataclass
class PatchSample:
    """One sampled patch pair; x and y are cropped from identical positions
    of the two channels. N = frames * patch_h * patch_w."""

    x: np.ndarray
    y: np.ndarray
    ground_truth: np.ndarray | None


def _join(paths):
    return ",".join(paths) if paths else "-"


def write_manifest(path, records) -> None:
    lines = []
    for r in records:
        label = "-" if r.label is None else str(r.label)
        lines.append("\t".join([_join(r.left), _join(r.right), _join(r.depth), label]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_manifest(path) -> list[CorpusRecord]:
    records = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise ValueError(f"{path}:{lineno}: expected 4 tab-separated fields")
        left, right, depth, label = fields
        records.append(
            CorpusRecord(
                left=tuple(left.split(",")),
                right=tuple(right.split(",")),
                depth=None if depth == "-" else tuple(depth.split(",")),
                label=None if label == "-" else int(label),
            )
        )
    return records


class Corpus:
    """Eagerly indexed corpus; frames load lazily and are cached."""

    def __init__(self, root):
        self.root = Path(root)
        self.records = read_manifest(self.root / MANIFEST_NAME)
        if not self.records:
            raise ValueError(f"empty corpus at {root}")
        self._cache: dict[int, StereoSequence] = {}

    def __len__(self) -> int:
        return len(self.records)

    def _load_stack(self, names):
        return np.stack([pgm.read_pgm(self.root / n) for n in names])

    def load(self, index: int) -> StereoSequence:
        if index not in self._cache:
            rec = self.records[index]
            gt = self._load_stack(rec.depth) if rec.depth else None
            self._cache[index] = StereoSequence(
                self._load_stack(rec.left),
                self._load_stack(rec.right),
                label=rec.label,
                ground_truth=gt,
            )
        return self._cache[index]


def save_corpus(root, sequences, with_depth=True, prefix="seq") -> Path:
    """Write sequences as PGM frames plus a manifest; returns the manifest path."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    records = []
    for i, seq in enumerate(sequences):
        left, right, depth = [], [], []
        for t in range(seq.num_frames):
            ln = f"{prefix}{i:04d}_L{t:03d}.pgm"
            rn = f"{prefix}{i:04d}_R{t:03d}.pgm"
            pgm.write_pgm(root / ln, seq.left[t])
            pgm.write_pgm(root / rn, seq.right[t])
            left.append(ln)
            right.append(rn)
            if with_depth and seq.ground_truth is not None:
                dn = f"{prefix}{i:04d}_D{t:03d}.pgm"
                pgm.write_pgm(root / dn, seq.ground_truth[t])
                depth.append(dn)
        records.append(
            CorpusRecord(tuple(left), tuple(right), tuple(depth) or None, seq.label)
        )
    manifest = root / MANIFEST_NAME
    write_manifest(manifest, records)
    return manifest


RETRY_FACTOR = 100  # sampling attempts per requested patch before giving up


def sample_stereo_patches(
    corpus,
    patch_w,
    patch_h,
    num_frames,
    count,
    require_ground_truth=False,
    seed=0,
    full_ground_truth=False,
):
    """Sample patch pairs cropped from identical positions of both channels.

    corpus may be a :class:`Corpus` or a list of :class:`StereoSequence`.
    With require_ground_truth, windows are redrawn until the ground-truth
    crop has at least one nonzero value, up to 100x count attempts;
    full_ground_truth tightens that to every value nonzero (patches fully
    inside the covered region).
    """
    seqs = corpus if isinstance(corpus, (list, tuple)) else [corpus.load(i) for i in range(len(corpus))]
    if not seqs:
        raise ValueError("empty corpus")
    for s in seqs:
        if patch_w > s.width or patch_h > s.height or num_frames > s.num_frames:
            raise ValueError(
                f"patch {num_frames}x{patch_h}x{patch_w} exceeds sequence "
                f"{s.num_frames}x{s.height}x{s.width}"
            )
    if require_ground_truth and not any(s.ground_truth is not None for s in seqs):
        raise ValueError("ground truth required but corpus has none")

    rng = np.random.default_rng(seed)
    samples: list[PatchSample] = []
    budget = RETRY_FACTOR * count
    attempts = 0
    while len(samples) < count:
        if attempts >= budget:
            raise RuntimeError(
                f"could not satisfy ground-truth requirement after {budget} attempts"
            )
        attempts += 1
        seq = seqs[int(rng.integers(len(seqs)))]
        t0 = int(rng.integers(seq.num_frames - num_frames + 1))
        y0 = int(rng.integers(seq.height - patch_h + 1))
        x0 = int(rng.integers(seq.width - patch_w + 1))
        gt = None
        if seq.ground_truth is not None:
            gt = seq.ground_truth[t0, y0 : y0 + patch_h, x0 : x0 + patch_w].reshape(-1).copy()
        if require_ground_truth or full_ground_truth:
            if gt is None:
                continue
            ok = np.all(gt != 0) if full_ground_truth else np.any(gt != 0)
            if not ok:
                continue
        win = (slice(t0, t0 + num_frames), slice(y0, y0 + patch_h), slice(x0, x0 + patch_w))
        samples.append(
            PatchSample(
                x=seq.left[win].reshape(-1).copy(),
                y=seq.right[win].reshape(-1).copy(),
                ground_truth=gt,
            )
        )
    return samples


def stack_pairs(samples) -> tuple[np.ndarray, np.ndarray]:
    """Stack PatchSamples into (X, Y) design matrices."""
    return (
        np.stack([s.x for s in samples]),
        np.stack([s.y for s in samples]),
    )
