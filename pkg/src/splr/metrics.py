"""Clustering accuracy (with optimal label matching), NMI, and the
repeated-restart evaluation of a feature subset."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .clustering import Partition, kmeans, pam

CLUSTERERS = {"kmeans": kmeans, "pam": pam}


def _labels(p) -> np.ndarray:
    return p.assignments if isinstance(p, Partition) else np.asarray(p, dtype=int)


def contingency(pred, truth) -> np.ndarray:
    """Counts table indexed by (predicted cluster, true class)."""
    a, b = _labels(pred), _labels(truth)
    if a.shape != b.shape:
        raise ValueError(f"partitions differ in length: {a.size} vs {b.size}")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai.ravel(), bi.ravel()), 1)
    return table


@dataclass(frozen=True)
class LabelMatch:
    mapping: dict
    agreement: int


def match_labels(pred, truth) -> LabelMatch:
    """Relabel predicted clusters to maximize agreement with ``truth``.

    Solved as an assignment problem on the contingency table, zero padded
    when the two label counts differ. Predicted clusters left without a
    partner map to ``None``.
    """
    a, b = _labels(pred), _labels(truth)
    table = contingency(a, b)
    pred_ids, true_ids = np.unique(a), np.unique(b)
    size = max(table.shape)
    padded = np.zeros((size, size), dtype=np.int64)
    padded[: table.shape[0], : table.shape[1]] = table
    rows, cols = linear_sum_assignment(padded, maximize=True)
    mapping = {}
    for r, c in zip(rows, cols):
        if r < pred_ids.size:
            mapping[pred_ids[r].item()] = true_ids[c].item() if c < true_ids.size else None
    return LabelMatch(mapping=mapping, agreement=int(padded[rows, cols].sum()))


def acc(pred, truth) -> float:
    a = _labels(pred)
    return match_labels(a, truth).agreement / a.size


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def nmi(pred, truth) -> float:
    """I(P, Q) / sqrt(H(P) H(Q)) in nats; 0 if either partition is trivial."""
    table = contingency(pred, truth).astype(float)
    n = table.sum()
    hp, hq = _entropy(table.sum(axis=1)), _entropy(table.sum(axis=0))
    if hp == 0.0 or hq == 0.0:
        return 0.0
    pij = table / n
    outer = np.outer(table.sum(axis=1), table.sum(axis=0)) / (n * n)
    nz = pij > 0
    mi = float((pij[nz] * np.log(pij[nz] / outer[nz])).sum())
    return float(np.clip(mi / np.sqrt(hp * hq), 0.0, 1.0))


@dataclass
class MetricSummary:
    acc_mean: float
    acc_std: float
    nmi_mean: float
    nmi_std: float
    acc_values: list
    nmi_values: list

    @classmethod
    def from_values(cls, accs, nmis) -> "MetricSummary":
        accs = [float(x) for x in accs]
        nmis = [float(x) for x in nmis]
        return cls(
            acc_mean=float(np.mean(accs)), acc_std=float(np.std(accs)),
            nmi_mean=float(np.mean(nmis)), nmi_std=float(np.std(nmis)),
            acc_values=accs, nmi_values=nmis,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "MetricSummary":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__})

    def table_row(self, scale: float = 100.0) -> str:
        """``ACC mean±std  NMI mean±std`` rounded to two decimals."""
        return (
            f"{self.acc_mean * scale:.2f}±{self.acc_std * scale:.2f}  "
            f"{self.nmi_mean * scale:.2f}±{self.nmi_std * scale:.2f}"
        )


def evaluate_subset(X, features, labels, clusterer: str = "kmeans",
                    restarts: int = 20, seed: int = 0) -> MetricSummary:
    """Cluster ``X[:, features]`` ``restarts`` times and summarize ACC/NMI.

    The cluster count is the number of true classes; restart ``r`` uses
    seed ``seed + r``.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if clusterer not in CLUSTERERS:
        raise ValueError(f"unknown clusterer {clusterer!r}; choose from {sorted(CLUSTERERS)}")
    values = X.values if hasattr(X, "values") and not isinstance(X, np.ndarray) else np.asarray(X, dtype=float)
    features = np.asarray(features, dtype=int)
    if features.size == 0 or features.min() < 0 or features.max() >= values.shape[1]:
        raise ValueError("feature indices out of range")
    truth = np.asarray(getattr(labels, "labels", labels), dtype=int)
    if truth.size != values.shape[0]:
        raise ValueError("labels do not match the sample count")
    c = np.unique(truth).size
    sub = values[:, features]
    run = CLUSTERERS[clusterer]
    accs, nmis = [], []
    for r in range(restarts):
        part = run(sub, c, seed + r)
        accs.append(acc(part, truth))
        nmis.append(nmi(part, truth))
    return MetricSummary.from_values(accs, nmis)
