"""Reference rankers for the benchmark harness."""
from __future__ import annotations

import numpy as np

from .ranking import FeatureRanking, rank_by_scores


def _values(X):
    return X.values if hasattr(X, "values") and not isinstance(X, np.ndarray) else np.asarray(X, dtype=float)


def baseline_variance_rank(X, N: int | None = None) -> FeatureRanking:
    ranking = rank_by_scores(_values(X).var(axis=0), descending=True)
    return ranking if N is None else ranking.truncated(N)


def heat_kernel_knn_graph(X, k: int = 5, sigma: float = 10.0) -> np.ndarray:
    """Symmetric k-nearest-neighbour graph with weights exp(-d^2 / (2 sigma^2))."""
    data = _values(X)
    n = data.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"neighbour count k={k} must satisfy 1 <= k < n={n}")
    sq = (data * data).sum(1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * data @ data.T, 0.0)
    masked = d2.copy()
    np.fill_diagonal(masked, np.inf)
    nbrs = np.argsort(masked, axis=1, kind="stable")[:, :k]
    mask = np.zeros((n, n), dtype=bool)
    mask[np.repeat(np.arange(n), k), nbrs.ravel()] = True
    mask |= mask.T
    return np.where(mask, np.exp(-d2 / (2.0 * sigma * sigma)), 0.0)


def laplacian_scores(X, k: int = 5, sigma: float = 10.0) -> np.ndarray:
    """Per-feature Laplacian score; smaller means better locality preservation.

    Features with zero weighted variance score ``inf``.
    """
    data = _values(X)
    A = heat_kernel_knn_graph(data, k, sigma)
    deg = A.sum(axis=1)
    centred = data - (deg @ data) / deg.sum()
    spread = (deg[:, None] * centred * centred).sum(axis=0)
    # f^T L f = f^T D f - f^T A f
    smooth = spread - np.einsum("ij,ij->j", centred, A @ centred)
    scores = np.full(data.shape[1], np.inf)
    ok = spread > 1e-12 * max(1.0, spread.max())
    scores[ok] = smooth[ok] / spread[ok]
    return scores


def baseline_laplacian_score(X, N: int | None = None, k: int = 5,
                             sigma: float = 10.0) -> FeatureRanking:
    ranking = rank_by_scores(laplacian_scores(X, k, sigma), descending=False)
    return ranking if N is None else ranking.truncated(N)
