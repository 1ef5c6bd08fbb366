import numpy as np
import pytest

from stereosync import depth, sae
from stereosync.depth import (
    DepthMap,
    fit_calibrator,
    fit_depth_bins,
    make_depth_label,
    mask_depth_map,
    predict_bins,
    predict_proba,
)
from stereosync.pgm import read_pgm


class TestBins:
    def test_quantile_equal_population(self):
        means = np.arange(1.0, 101.0)
        edges = fit_depth_bins(means, 25, method="quantile")
        assert len(edges) == 26
        labels = np.array([make_depth_label(np.array([m]), edges) for m in means])
        counts = np.bincount(labels, minlength=26)[1:]
        assert counts.min() >= 3 and counts.max() <= 5  # 4% of 100 +/- one sample

    def test_constant_means_rejected(self):
        with pytest.raises(ValueError):
            fit_depth_bins(np.full(100, 2.0), 25)
        with pytest.raises(ValueError):
            fit_depth_bins(np.full(100, 2.0), 25, method="linear")

    def test_edges_strictly_increasing(self):
        rng = np.random.default_rng(0)
        for method in ("quantile", "linear"):
            edges = fit_depth_bins(rng.random(500), 25, method=method)
            assert np.all(np.diff(edges) > 0)

    def test_too_few_distinct(self):
        with pytest.raises(ValueError):
            fit_depth_bins(np.array([1.0, 2.0, 3.0] * 30), 25)


class TestLabels:
    def test_worked_example(self):
        edges = np.arange(26.0)  # linear over [0, 25], width 1
        label = make_depth_label(np.array([10.0, 20.0, 30.0]), edges)
        assert label == 21  # mean 20 -> 0-based bin 20

    def test_half_open_edges(self):
        edges = np.arange(26.0)
        assert make_depth_label(np.array([5.0]), edges) == 6

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            make_depth_label(np.zeros(4), np.arange(26.0))

    def test_zeroes_excluded_from_mean(self):
        edges = np.arange(26.0)
        assert make_depth_label(np.array([0.0, 0.0, 20.0]), edges) == 21

    def test_clamped_to_range(self):
        edges = np.arange(26.0)
        assert make_depth_label(np.array([999.0]), edges) == 25
        assert make_depth_label(np.array([-3.0]), edges) == 1
        assert make_depth_label(np.array([25.0]), edges) == 25  # final bin closed


class TestCalibrator:
    def test_separable_two_class(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(60, 4)) * 0.1 + np.array([1, 0, 0, 0])
        b = rng.normal(size=(60, 4)) * 0.1 + np.array([0, 1, 0, 0])
        codes = np.vstack([a, b])
        labels = np.array([1] * 60 + [2] * 60)
        edges = np.array([0.0, 0.5, 1.0])
        fit = fit_calibrator(codes, labels, edges, epochs=400, lr=1.0, seed=0)
        acc = np.mean(predict_bins(fit.calibrator, codes) == labels)
        assert acc >= 0.99

    def test_zero_lr_keeps_weights(self):
        rng = np.random.default_rng(2)
        codes = rng.normal(size=(20, 3))
        labels = rng.integers(1, 3, size=20)
        edges = np.array([0.0, 0.5, 1.0])
        fit = fit_calibrator(codes, labels, edges, epochs=10, lr=0.0, seed=3)
        ref = fit_calibrator(codes, labels, edges, epochs=0, lr=1.0, seed=3)
        np.testing.assert_array_equal(fit.calibrator.weights, ref.calibrator.weights)

    def test_random_labels_chance_accuracy(self):
        rng = np.random.default_rng(3)
        codes = rng.normal(size=(400, 5))
        labels = rng.integers(1, 5, size=400)
        edges = np.linspace(0, 1, 5)
        fit = fit_calibrator(codes, labels, edges, epochs=100, lr=0.2, seed=4)
        acc = np.mean(predict_bins(fit.calibrator, codes) == labels)
        # chance is 0.25; binomial three-sigma on 400 samples is ~0.07,
        # plus slack for training-set overfit on noise
        assert acc < 0.45

    def test_loss_decreases(self):
        rng = np.random.default_rng(4)
        codes = rng.normal(size=(100, 4))
        labels = (codes[:, 0] > 0).astype(int) + 1
        edges = np.array([0.0, 0.5, 1.0])
        fit = fit_calibrator(codes, labels, edges, epochs=50, lr=0.5, seed=5)
        assert np.mean(fit.loss_trace[-10:]) < np.mean(fit.loss_trace[:10])

    def test_confidences_sum_to_one(self):
        rng = np.random.default_rng(5)
        codes = rng.normal(size=(30, 4))
        labels = rng.integers(1, 26, size=30)
        edges = np.arange(26.0)
        fit = fit_calibrator(codes, labels, edges, epochs=5, lr=0.1, seed=6)
        p = predict_proba(fit.calibrator, codes)
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)
        assert p.shape == (30, 25)

    def test_label_out_of_range(self):
        with pytest.raises(ValueError):
            fit_calibrator(np.zeros((3, 2)), np.array([0, 1, 2]), np.array([0.0, 1.0, 2.0]))

    def test_determinism(self):
        rng = np.random.default_rng(6)
        codes = rng.normal(size=(50, 4))
        labels = rng.integers(1, 4, size=50)
        edges = np.linspace(0, 1, 4)
        a = fit_calibrator(codes, labels, edges, epochs=20, lr=0.3, seed=7)
        b = fit_calibrator(codes, labels, edges, epochs=20, lr=0.3, seed=7)
        np.testing.assert_array_equal(a.calibrator.weights, b.calibrator.weights)


def make_grid_fixture():
    from stereosync.synth import gen_random_dot_stereogram
    from stereosync.corpus import sample_stereo_patches, stack_pairs
    from stereosync.whitening import fit_pca_whitening

    seqs = [gen_random_dot_stereogram(72, 48, d, 0.5, seed=40 + d) for d in (0, 2)]
    samples = sample_stereo_patches(seqs, 8, 8, 1, 400, seed=1)
    x, y = stack_pairs(samples)
    white = fit_pca_whitening(np.vstack([x, y]))
    bank = sae.init_bank(12, white.output_dim, seed=2)
    return seqs[0], bank, white


class TestDepthMap:
    def test_grid_dimensions(self):
        seq, bank, white = make_grid_fixture()
        edges = np.linspace(0, 1, 26)
        cal = depth.DepthCalibrator(np.zeros((25, 12)), np.zeros(25), edges)
        dm = depth.predict_depth_map(bank, cal, seq, white, 8, 8, stride=1)
        assert dm.shape == (48 - 8 + 1, 72 - 8 + 1)
        dm4 = depth.predict_depth_map(bank, cal, seq, white, 8, 8, stride=4)
        assert dm4.shape == ((48 - 8) // 4 + 1, (72 - 8) // 4 + 1)

    def test_labels_in_range(self):
        seq, bank, white = make_grid_fixture()
        rng = np.random.default_rng(7)
        cal = depth.DepthCalibrator(rng.normal(size=(25, 12)), rng.normal(size=25),
                                    np.linspace(0, 1, 26))
        dm = depth.predict_depth_map(bank, cal, seq, white, 8, 8, stride=4)
        assert dm.labels.min() >= 1 and dm.labels.max() <= 25

    def test_constant_input_uniform_labels(self):
        from stereosync.video import StereoSequence

        _, bank, white = make_grid_fixture()
        rng = np.random.default_rng(8)
        cal = depth.DepthCalibrator(rng.normal(size=(25, 12)), rng.normal(size=25),
                                    np.linspace(0, 1, 26))
        flat = StereoSequence(np.full((40, 60), 0.5), np.full((40, 60), 0.5))
        dm = depth.predict_depth_map(bank, cal, flat, white, 8, 8, stride=4)
        assert np.unique(dm.labels).size == 1

    def test_mask_depth_map(self):
        labels = np.arange(1, 13).reshape(3, 4)
        dm = DepthMap(labels, 25, 4, 8, 8)
        allpass = mask_depth_map(dm, np.ones((3, 4), dtype=bool))
        assert np.array_equal(allpass.labels, labels)
        allfail = mask_depth_map(dm, np.zeros((3, 4), dtype=bool))
        assert np.all(allfail.labels == 0)
        with pytest.raises(ValueError):
            mask_depth_map(dm, np.ones((2, 4), dtype=bool))

    def test_pgm_export_scale(self, tmp_path):
        labels = np.array([[1, 25], [13, 0]])
        dm = DepthMap(labels, 25, 4, 8, 8)
        depth.save_depth_map_pgm(tmp_path / "d.pgm", dm)
        img = read_pgm(tmp_path / "d.pgm")
        np.testing.assert_allclose(img * 255, [[10, 250], [130, 0]], atol=1e-9)

    def test_end_to_end_modal_label_matches_disparity(self):
        # train on stereograms, then the modal predicted label on a fresh
        # constant-disparity pair must be the calibrated label for it
        from stereosync.corpus import sample_stereo_patches, stack_pairs
        from stereosync.synth import gen_random_dot_stereogram
        from stereosync.whitening import fit_pca_whitening
        from _oracles import recover_disparity_xcorr

        train_seqs = [
            gen_random_dot_stereogram(80, 56, d, 0.5, seed=60 + 4 * i + d,
                                      margin=6, dot_size=2)
            for i in range(6)
            for d in (0, 2, 4)
        ]
        samples = sample_stereo_patches(train_seqs, 12, 12, 1, 6000,
                                        require_ground_truth=True, seed=3,
                                        full_ground_truth=True)
        x, y = stack_pairs(samples)
        white = fit_pca_whitening(np.vstack([x, y]), variance_keep=0.8)
        cfg = sae.TrainConfig(q=32, lam=0.5, learning_rate=0.005, momentum=0.9,
                              batch_size=100, epochs=12, seed=4)
        bank = sae.train(cfg, white.transform(x), white.transform(y), mode="D").bank
        codes = sae.encode(bank, "D", white.transform(x), white.transform(y))
        means = np.array([s.ground_truth[s.ground_truth != 0].mean() for s in samples])
        edges = fit_depth_bins(means, 3, method="linear")
        labels = np.array([make_depth_label(s.ground_truth, edges) for s in samples])
        cal = fit_calibrator(codes, labels, edges, epochs=500, lr=1.0, seed=5).calibrator

        for d in (0, 2, 4):
            probe = gen_random_dot_stereogram(80, 56, d, 0.5, seed=900 + d,
                                              margin=6, dot_size=2)
            # the generator's label is confirmed by exhaustive cross-correlation
            assert recover_disparity_xcorr(
                probe.left[0][8:-8, 8:-8], probe.right[0][8:-8, 8:-8], 6) == d
            dm = depth.predict_depth_map(bank, cal, probe, white, 12, 12, stride=4)
            want = make_depth_label(probe.ground_truth[0], edges)
            modal = np.bincount(dm.labels.ravel()).argmax()
            assert modal == want

    def test_calibrator_serialization(self, tmp_path):
        rng = np.random.default_rng(9)
        cal = depth.DepthCalibrator(rng.normal(size=(25, 6)), rng.normal(size=25),
                                    np.linspace(0, 2, 26))
        depth.save_calibrator(tmp_path, cal)
        back = depth.load_calibrator(tmp_path)
        np.testing.assert_allclose(back.weights, cal.weights, rtol=1e-6)
        np.testing.assert_allclose(back.bin_edges, cal.bin_edges, rtol=1e-6)
