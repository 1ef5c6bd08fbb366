import numpy as np
import pytest

from stereosync.whitening import (
    DegenerateDataError,
    fit_pca_reduction,
    fit_pca_whitening,
    load_whitening,
    save_whitening,
)

from _oracles import charpoly_eigenvalues


class TestWhitening:
    def test_hand_example_identity_covariance(self):
        # covariance of these four points is exactly the identity
        samples = np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
        t = fit_pca_whitening(samples, epsilon=0.0)
        z = t.transform(samples)
        cov = z.T @ z / len(z)
        np.testing.assert_allclose(cov, np.eye(2), atol=1e-12)
        # with unit covariance the projection is a rotation: norms preserved
        assert abs((t.transform(np.array([1.0, 1.0])) ** 2).sum() - 2.0) < 1e-9

    def test_axis_aligned_data_gives_signed_permutation(self):
        rng = np.random.default_rng(0)
        scale = np.array([3.0, 1.0, 0.2])
        samples = rng.normal(size=(4000, 3)) * scale
        t = fit_pca_whitening(samples, epsilon=0.0)
        # each projection row should align with one axis
        for row in t.projection:
            mags = np.abs(row) / np.linalg.norm(row)
            assert mags.max() > 0.99

    def test_whitened_covariance_identity(self):
        rng = np.random.default_rng(1)
        mix = rng.normal(size=(6, 6))
        samples = rng.normal(size=(3000, 6)) @ mix + rng.normal(size=6)
        t = fit_pca_whitening(samples, epsilon=0.0)
        z = t.transform(samples)
        cov = z.T @ z / len(z)
        np.testing.assert_allclose(cov, np.eye(6), atol=1e-4)

    def test_mean_maps_to_zero(self):
        rng = np.random.default_rng(2)
        samples = rng.normal(size=(100, 4)) + 3.0
        t = fit_pca_whitening(samples)
        np.testing.assert_allclose(t.transform(t.mean), 0.0, atol=1e-12)

    def test_identity_transform_passthrough(self):
        from stereosync.whitening import WhiteningTransform

        t = WhiteningTransform(np.zeros(3), np.eye(3), np.ones(3), 0.0, rescaled=True)
        v = np.array([1.0, -2.0, 0.5])
        np.testing.assert_allclose(t.transform(v), v)

    def test_degenerate_data(self):
        samples = np.ones((10, 3)) * 4.2
        with pytest.raises(DegenerateDataError):
            fit_pca_whitening(samples)

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            fit_pca_whitening(np.ones((1, 3)))

    def test_eigenvalue_ordering_and_orthogonality(self):
        rng = np.random.default_rng(3)
        samples = rng.normal(size=(500, 5)) @ rng.normal(size=(5, 5))
        t = fit_pca_whitening(samples, epsilon=0.0)
        assert np.all(np.diff(t.eigenvalues) <= 1e-12)
        gram = t.projection @ t.projection.T
        np.testing.assert_allclose(gram, np.diag(np.diag(gram)), atol=1e-8)

    @pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
    def test_eigenvalues_match_charpoly_bisection(self, d):
        rng = np.random.default_rng(10 + d)
        samples = rng.normal(size=(200, d)) @ rng.normal(size=(d, d))
        t = fit_pca_whitening(samples, epsilon=0.0)
        x = samples - samples.mean(axis=0)
        cov = x.T @ x / len(x)
        roots = charpoly_eigenvalues(cov)
        assert len(roots) == d
        np.testing.assert_allclose(t.eigenvalues, roots, atol=1e-6)


class TestReduction:
    def test_full_rank_reconstruction(self):
        rng = np.random.default_rng(4)
        samples = rng.normal(size=(300, 4))
        t = fit_pca_reduction(samples, 4)
        v = rng.normal(size=4)
        np.testing.assert_allclose(t.inverse_transform(t.transform(v)), v, atol=1e-6)

    def test_planar_data_reconstructs_exactly(self):
        rng = np.random.default_rng(5)
        basis = rng.normal(size=(2, 3))
        coeffs = rng.normal(size=(400, 2))
        samples = coeffs @ basis + np.array([1.0, 2.0, 3.0])
        t = fit_pca_reduction(samples, 2)
        recon = t.inverse_transform(t.transform(samples))
        np.testing.assert_allclose(recon, samples, atol=1e-6)

    def test_component_variance_ordering(self):
        rng = np.random.default_rng(6)
        samples = rng.normal(size=(500, 5)) * np.array([5, 4, 3, 2, 1])
        t = fit_pca_reduction(samples, 5)
        z = t.transform(samples)
        variances = z.var(axis=0)
        assert np.all(np.diff(variances) <= 1e-9)

    def test_rows_unit_norm_orthonormal(self):
        rng = np.random.default_rng(7)
        t = fit_pca_reduction(rng.normal(size=(300, 6)), 4)
        np.testing.assert_allclose(t.projection @ t.projection.T, np.eye(4), atol=1e-8)


def test_serialization_round_trip(tmp_path):
    rng = np.random.default_rng(8)
    t = fit_pca_whitening(rng.normal(size=(100, 5)), d_keep=3)
    save_whitening(tmp_path, t)
    back = load_whitening(tmp_path)
    assert back.rescaled == t.rescaled
    assert back.output_dim == 3
    np.testing.assert_allclose(back.projection, t.projection, rtol=1e-6)
    np.testing.assert_allclose(back.mean, t.mean, rtol=1e-6)
