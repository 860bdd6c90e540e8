"""Feature rankings shared by the solver and the baseline rankers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FeatureRanking:
    """Features ordered best-first.

    ``scores[j]`` is the raw score of feature ``j`` (indexed by feature, not
    by rank). ``descending`` records whether larger scores are better.
    """

    order: np.ndarray
    scores: np.ndarray
    descending: bool = True

    def top(self, N: int) -> np.ndarray:
        if not 1 <= N <= self.order.size:
            raise ValueError(f"N must be in [1, {self.order.size}], got {N}")
        return self.order[:N].copy()

    def truncated(self, N: int) -> "FeatureRanking":
        return FeatureRanking(self.top(N), self.scores, self.descending)


def rank_by_scores(scores, descending: bool = True) -> FeatureRanking:
    """Stable sort of ``scores``; ties go to the lower feature index.

    NaN scores rank last regardless of direction.
    """
    scores = np.asarray(scores, dtype=float)
    key = np.where(np.isnan(scores), np.inf, -scores if descending else scores)
    order = np.argsort(key, kind="stable")
    return FeatureRanking(order=order, scores=scores, descending=descending)
