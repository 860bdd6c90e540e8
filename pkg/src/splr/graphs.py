"""Feature-similarity and sample-graph construction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataMatrix


def _as_array(X) -> np.ndarray:
    return X.values if isinstance(X, DataMatrix) else np.asarray(X, dtype=float)


def _cosine_gram(A: np.ndarray) -> np.ndarray:
    # columns of A normalized to unit length; zero columns stay zero
    norms = np.linalg.norm(A, axis=0)
    unit = np.divide(A, norms, out=np.zeros_like(A), where=norms > 0)
    G = unit.T @ unit
    G = 0.5 * (G + G.T)
    np.fill_diagonal(G, (norms > 0).astype(float))
    return np.clip(G, 0.0, 1.0) if np.all(A >= 0) else G


@dataclass(frozen=True)
class SampleGraph:
    """Cosine sample affinity ``Z`` with degrees and Laplacian ``L = D - Z``."""

    Z: np.ndarray
    degree: np.ndarray

    @property
    def D(self) -> np.ndarray:
        return np.diag(self.degree)

    @property
    def L(self) -> np.ndarray:
        return np.diag(self.degree) - self.Z


def build_feature_similarity(X) -> np.ndarray:
    """d x d matrix of cosine similarities between feature columns.

    Columns are scaled to unit length before taking the Gram product, so
    for nonnegative data every entry lies in [0, 1].
    """
    return _cosine_gram(_as_array(X))


def build_sample_graph(X) -> SampleGraph:
    Z = _cosine_gram(_as_array(X).T)
    return SampleGraph(Z=Z, degree=Z.sum(axis=1))
