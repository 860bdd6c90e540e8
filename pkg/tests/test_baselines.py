import numpy as np
import pytest

from splr.baselines import baseline_laplacian_score, baseline_variance_rank, laplacian_scores


class TestVariance:
    def test_constant_last(self, rng):
        X = np.hstack([rng.random((20, 3)), np.full((20, 1), 4.0)])
        assert baseline_variance_rank(X).order[-1] == 3

    def test_scaled_copies(self, rng):
        base = rng.normal(size=(30, 1))
        X = np.hstack([base * 1, base * 3, base * 2])
        np.testing.assert_array_equal(baseline_variance_rank(X).order, [1, 2, 0])

    def test_matches_direct(self, rng):
        X = rng.random((25, 6))
        r = baseline_variance_rank(X, 4)
        np.testing.assert_array_equal(r.order, np.argsort(-X.var(axis=0))[:4])


class TestLaplacianScore:
    def test_constant_feature_worst(self, rng):
        X = np.hstack([rng.random((20, 3)), np.ones((20, 1))])
        assert np.isinf(laplacian_scores(X)[3])
        assert baseline_laplacian_score(X).order[-1] == 3

    def test_smooth_beats_noise(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            t = np.sort(rng.uniform(0, 10, 80))
            coords = np.column_stack([t, np.zeros(80)])
            smooth = np.sin(t / 2.0)
            noise = rng.normal(size=80)
            X = np.column_stack([coords[:, 0], smooth, noise])
            s = laplacian_scores(X, k=5, sigma=10.0)
            assert s[1] < s[2]

    def test_deterministic(self, rng):
        X = rng.random((30, 5))
        np.testing.assert_array_equal(
            baseline_laplacian_score(X).order, baseline_laplacian_score(X.copy()).order
        )

    def test_k_too_large(self, rng):
        with pytest.raises(ValueError):
            baseline_laplacian_score(rng.random((5, 2)), k=5)
