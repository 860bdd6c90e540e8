"""One-sided Wilcoxon signed-rank test for paired metric samples."""
from __future__ import annotations

import math

import numpy as np
from scipy.stats import rankdata

EXACT_MAX_N = 12


def _signed_ranks(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired samples must be 1-D and of equal length")
    diff = a - b
    diff = diff[diff != 0]
    if diff.size == 0:
        raise ValueError("all differences zero")
    ranks = rankdata(np.abs(diff))
    return diff, ranks


def _exact_upper_tail(ranks: np.ndarray, t_plus: float) -> float:
    """P(T+ >= t_plus) under random signs, by counting subset sums.

    Midranks are multiples of 1/2, so the doubled ranks are integers.
    """
    doubled = np.rint(2 * ranks).astype(int)
    counts = np.zeros(doubled.sum() + 1, dtype=object)
    counts[0] = 1
    for r in doubled:
        counts[r:] = counts[r:] + counts[:-r]
    target = int(round(2 * t_plus))
    return float(counts[target:].sum()) / float(2 ** doubled.size)


def wilcoxon_signed_rank(a, b, alternative: str = "greater",
                         method: str = "auto") -> float:
    """p-value for H1: ``a`` tends to exceed ``b`` (``greater``) or the reverse.

    Zero differences are dropped. With ``method="auto"``, up to 12 remaining
    pairs use the exact permutation distribution of the positive-rank sum and
    larger samples use the normal approximation with the tie-corrected
    variance. ``"exact"`` and ``"normal"`` force one or the other.
    """
    if alternative not in ("greater", "less"):
        raise ValueError("alternative must be 'greater' or 'less'")
    if method not in ("auto", "exact", "normal"):
        raise ValueError("method must be 'auto', 'exact' or 'normal'")
    diff, ranks = _signed_ranks(a, b)
    if alternative == "less":
        diff = -diff
    n = diff.size
    t_plus = float(ranks[diff > 0].sum())
    if method == "exact" or (method == "auto" and n <= EXACT_MAX_N):
        return _exact_upper_tail(ranks, t_plus)
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - (tie_counts**3 - tie_counts).sum() / 48.0
    z = (t_plus - mean) / math.sqrt(var)
    return float(0.5 * math.erfc(z / math.sqrt(2)))
