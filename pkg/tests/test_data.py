"""Corpus I/O, patch sampling, and frame geometry."""

import numpy as np
import pytest

from stereosync import pgm
from stereosync.corpus import (
    Corpus,
    CorpusRecord,
    read_manifest,
    sample_stereo_patches,
    save_corpus,
    stack_pairs,
    write_manifest,
)
from stereosync.synth import gen_random_dot_stereogram
from stereosync.video import StereoSequence, downsample, grid_positions


class TestPgm:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        img = np.round(rng.random((12, 17)) * 255) / 255.0
        path = tmp_path / "img.pgm"
        pgm.write_pgm(path, img)
        back = pgm.read_pgm(path)
        np.testing.assert_allclose(back, img, atol=1e-12)

    def test_comment_header(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P5\n# a comment\n2 2\n255\n" + bytes([0, 128, 255, 64]))
        img = pgm.read_pgm(path)
        assert img.shape == (2, 2)
        assert img[0, 1] == 128 / 255.0

    def test_pbm_round_trip(self, tmp_path):
        rng = np.random.default_rng(4)
        mask = rng.random((9, 13)) > 0.5
        path = tmp_path / "m.pbm"
        pgm.write_pbm(path, mask)
        assert np.array_equal(pgm.read_pbm(path), mask)

    def test_truncated_pgm(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P5\n4 4\n255\n" + bytes(5))
        with pytest.raises(ValueError):
            pgm.read_pgm(path)


class TestManifest:
    def test_round_trip(self, tmp_path):
        records = [
            CorpusRecord(("a.pgm",), ("b.pgm",), ("d.pgm",), 3),
            CorpusRecord(("l0.pgm", "l1.pgm"), ("r0.pgm", "r1.pgm"), None, None),
        ]
        path = tmp_path / "manifest.tsv"
        write_manifest(path, records)
        assert read_manifest(path) == records

    def test_bad_line(self, tmp_path):
        path = tmp_path / "manifest.tsv"
        path.write_text("only\ttwo\n", encoding="utf-8")
        with pytest.raises(ValueError):
            read_manifest(path)


class TestCorpusRoundTrip:
    def test_save_and_load(self, tmp_path):
        seqs = [gen_random_dot_stereogram(40, 30, d, 0.5, seed=d) for d in (0, 2)]
        save_corpus(tmp_path, seqs)
        corp = Corpus(tmp_path)
        assert len(corp) == 2
        loaded = corp.load(1)
        assert loaded.label == 2
        np.testing.assert_allclose(loaded.left[0], seqs[1].left[0], atol=1e-12)
        assert loaded.ground_truth is not None
        np.testing.assert_allclose(
            loaded.ground_truth[0], seqs[1].ground_truth[0], atol=1e-12
        )


class TestSampling:
    @pytest.fixture()
    def corpus(self):
        return [gen_random_dot_stereogram(48, 40, d, 0.5, seed=10 + d) for d in range(3)]

    def test_count_and_length(self, corpus):
        samples = sample_stereo_patches(corpus, 8, 8, 1, 50, seed=1)
        assert len(samples) == 50
        assert all(s.x.shape == (64,) and s.y.shape == (64,) for s in samples)

    def test_reference_scale_sampling(self):
        # the full-scale patch budget: 100k 16x16 pairs, N = 256
        seqs = [gen_random_dot_stereogram(96, 64, d, 0.5, seed=d) for d in range(7)]
        samples = sample_stereo_patches(seqs, 16, 16, 1, 100000, seed=0)
        assert len(samples) == 100000
        assert samples[0].x.shape == (256,)

    def test_zero_count(self, corpus):
        assert sample_stereo_patches(corpus, 8, 8, 1, 0, seed=1) == []

    def test_determinism(self, corpus):
        a = sample_stereo_patches(corpus, 8, 8, 1, 30, seed=7)
        b = sample_stereo_patches(corpus, 8, 8, 1, 30, seed=7)
        xa, ya = stack_pairs(a)
        xb, yb = stack_pairs(b)
        assert np.array_equal(xa, xb) and np.array_equal(ya, yb)

    def test_identical_positions(self):
        # make channels encode their crop coordinates so x and y reveal
        # where they were cropped from
        h, w = 20, 24
        coord = np.arange(h * w, dtype=np.float64).reshape(h, w) / (h * w)
        seq = StereoSequence(coord, coord.copy())
        samples = sample_stereo_patches([seq], 5, 4, 1, 20, seed=3)
        for s in samples:
            assert np.array_equal(s.x, s.y)

    def test_ground_truth_required(self, corpus):
        samples = sample_stereo_patches(
            corpus, 8, 8, 1, 40, require_ground_truth=True, seed=2
        )
        assert all(np.any(s.ground_truth != 0) for s in samples)

    def test_full_ground_truth_windows(self, corpus):
        samples = sample_stereo_patches(
            corpus, 8, 8, 1, 40, require_ground_truth=True, seed=2,
            full_ground_truth=True,
        )
        assert all(np.all(s.ground_truth != 0) for s in samples)

    def test_ground_truth_unsatisfiable(self):
        seq = gen_random_dot_stereogram(48, 40, 1, 0.5, seed=0)
        seq.ground_truth[:] = 0.0
        with pytest.raises(RuntimeError):
            sample_stereo_patches([seq], 8, 8, 1, 5, require_ground_truth=True, seed=0)

    def test_patch_too_large(self, corpus):
        with pytest.raises(ValueError):
            sample_stereo_patches(corpus, 100, 8, 1, 5, seed=0)

    def test_sequence_patches_concatenate_frames(self):
        frames = np.stack([np.full((10, 10), t / 10.0) for t in range(4)])
        seq = StereoSequence(frames, frames.copy())
        samples = sample_stereo_patches([seq], 3, 3, 2, 5, seed=0)
        for s in samples:
            assert s.x.shape == (2 * 9,)
            # first 9 values from frame t0, next 9 from t0 + 1
            assert np.allclose(np.diff(s.x.reshape(2, 9), axis=0), 0.1)


class TestDownsample:
    def test_constant_preserved(self):
        img = np.full((12, 18), 5.0)
        out = downsample(img, 5, 4)
        np.testing.assert_allclose(out, 5.0)
        assert out.shape == (4, 5)

    def test_two_by_two_mean(self):
        out = downsample(np.array([[0.0, 2.0], [4.0, 6.0]]), 1, 1)
        np.testing.assert_allclose(out, [[3.0]])

    def test_mean_preserved_generally(self):
        rng = np.random.default_rng(5)
        img = rng.random((30, 42))
        out = downsample(img, 7, 5)
        assert abs(out.mean() - img.mean()) < 1e-12

    def test_upsample_rejected(self):
        with pytest.raises(ValueError):
            downsample(np.zeros((4, 4)), 8, 4)

    def test_fractional_ratio(self):
        # 3 -> 2 along one axis: cells average [a, a/2+b/2] style overlaps
        img = np.array([[0.0, 3.0, 6.0]])
        out = downsample(img, 2, 1)
        np.testing.assert_allclose(out, [[1.0, 5.0]])


def test_grid_positions_formula():
    pos = grid_positions(300, 16, 1)
    assert len(pos) == 285
    assert pos[0] == 0 and pos[-1] == 284
    with pytest.raises(ValueError):
        grid_positions(10, 16, 1)
