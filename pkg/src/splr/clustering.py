"""k-means and k-medoids (PAM) used to score selected feature subsets."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_LLOYD_ROUNDS = 300


@dataclass(frozen=True)
class Partition:
    assignments: np.ndarray
    c: int

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=int)
        if a.ndim != 1:
            raise ValueError("assignments must be 1-D")
        if a.size and (a.min() < 0 or a.max() >= self.c):
            raise ValueError(f"assignments must lie in 0..{self.c - 1}")
        object.__setattr__(self, "assignments", a)

    @property
    def n(self) -> int:
        return self.assignments.size

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        labels = np.asarray(labels)
        _, dense = np.unique(labels, return_inverse=True)
        dense = dense.ravel()
        return cls(dense, int(dense.max()) + 1 if dense.size else 0)


def _check(data: np.ndarray, c: int) -> np.ndarray:
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if not 1 <= c <= data.shape[0]:
        raise ValueError(f"cluster count {c} must be between 1 and n={data.shape[0]}")
    if not np.all(np.isfinite(data)):
        raise ValueError("data must be finite")
    return data


def _sq_dists(data: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (
        (data * data).sum(1)[:, None]
        - 2.0 * data @ centers.T
        + (centers * centers).sum(1)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeanspp(data: np.ndarray, c: int, rng: np.random.Generator) -> np.ndarray:
    # greedy variant: draw 2 + ln(c) candidates per step, keep the one that
    # lowers the total squared distance the most
    n = data.shape[0]
    trials = 2 + int(np.log(c))
    chosen = [int(rng.integers(n))]
    closest = _sq_dists(data, data[chosen])[:, 0]
    for _ in range(1, c):
        total = closest.sum()
        if total > 0:
            cand = rng.choice(n, size=trials, p=closest / total)
        else:
            # every point coincides with a chosen center
            cand = rng.choice(np.setdiff1d(np.arange(n), chosen), size=1)
        pots = np.minimum(closest[None, :], _sq_dists(data[cand], data))
        best = int(pots.sum(axis=1).argmin())
        chosen.append(int(cand[best]))
        closest = pots[best]
    return data[chosen].copy()


def kmeans(data, c: int, seed: int = 0) -> Partition:
    """Lloyd's algorithm from k-means++ seeding.

    Runs until the assignment stops changing or 300 rounds elapse. A cluster
    that empties is reseeded at the point farthest from its current center.
    """
    data = _check(data, c)
    rng = np.random.default_rng(seed)
    centers = _kmeanspp(data, c, rng)
    labels = None
    for _ in range(MAX_LLOYD_ROUNDS):
        d2 = _sq_dists(data, centers)
        new = d2.argmin(axis=1)
        counts = np.bincount(new, minlength=c)
        for k in np.flatnonzero(counts == 0):
            own = d2[np.arange(data.shape[0]), new]
            # only steal from clusters that keep at least one member
            donors = counts[new] > 1
            far = int(np.argmax(np.where(donors, own, -1.0)))
            counts[new[far]] -= 1
            new[far] = k
            counts[k] = 1
            d2[far] = 0.0
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for k in range(c):
            centers[k] = data[labels == k].mean(axis=0)
    return Partition(labels, c)


def _pairwise(data: np.ndarray) -> np.ndarray:
    return np.sqrt(_sq_dists(data, data))


def pam_medoids(data, c: int, seed: int = 0):
    """BUILD + SWAP k-medoids on Euclidean dissimilarities.

    Returns ``(medoids, costs)`` where ``costs`` holds the total
    within-cluster dissimilarity after BUILD and after every accepted swap.
    The seed only fixes the scan order, which decides between equal-cost
    candidates.
    """
    data = _check(data, c)
    n = data.shape[0]
    dist = _pairwise(data)
    scan = np.random.default_rng(seed).permutation(n)

    medoids = [int(scan[np.argmin(dist[scan].sum(axis=1))])]
    nearest = dist[:, medoids[0]].copy()
    while len(medoids) < c:
        cand = np.setdiff1d(scan, medoids, assume_unique=True)
        cand = scan[np.isin(scan, cand)]
        gain = np.maximum(nearest[:, None] - dist[:, cand], 0.0).sum(axis=0)
        best = int(cand[np.argmax(gain)])
        medoids.append(best)
        nearest = np.minimum(nearest, dist[:, best])
    costs = [float(nearest.sum())]

    while True:
        med = np.array(medoids)
        dm = dist[:, med]
        order = np.argsort(dm, axis=1, kind="stable")
        first = dm[np.arange(n), order[:, 0]]
        second = dm[np.arange(n), order[:, 1]] if c > 1 else np.full(n, np.inf)
        non = scan[~np.isin(scan, med)]
        if non.size == 0:
            break
        best_cost, best_swap = costs[-1], None
        for slot in range(c):
            others = np.where(order[:, 0] == slot, second, first)
            totals = np.minimum(dist[:, non], others[:, None]).sum(axis=0)
            j = int(np.argmin(totals))
            if totals[j] < best_cost - 1e-12 * max(1.0, abs(best_cost)):
                best_cost, best_swap = float(totals[j]), (slot, int(non[j]))
        if best_swap is None:
            break
        medoids[best_swap[0]] = best_swap[1]
        costs.append(best_cost)
    return np.array(medoids), costs


def pam(data, c: int, seed: int = 0) -> Partition:
    data = _check(data, c)
    medoids, _ = pam_medoids(data, c, seed)
    labels = _pairwise(data)[:, medoids].argmin(axis=1)
    # a medoid always belongs to its own cluster even when duplicated
    labels[medoids] = np.arange(c)
    return Partition(labels, c)
