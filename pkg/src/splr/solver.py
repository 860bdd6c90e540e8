"""Self-paced, low-redundancy subspace feature selection.

The model factorizes a nonnegative data matrix as ``X ~ X W H`` with a
d x K projection ``W`` and a K x d reconstruction ``H``, and minimizes

    sum_i v_i ||x_i - x_i W H||^2            (self-paced reconstruction)
  + sum_i gamma^2 / (v_i + gamma / eta)      (mixture pace regularizer)
  + lambda1 * tr(S^T W 1 W^T)                (feature redundancy)
  + lambda2 * tr(W^T X^T L X W)              (sample-graph smoothness)
  + alpha * sum_i ||w_i||_2^(1/2)            (row sparsity)
  + lambda3 / 2 * ||W^T W - I||_F^2          (soft orthogonality)

by alternating a closed-form update of the sample weights ``v`` with
multiplicative updates of ``H`` and ``W``. Features are ranked by the
squared row norms of ``W``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .data import DataMatrix
from .graphs import SampleGraph, build_feature_similarity, build_sample_graph
from .ranking import FeatureRanking, rank_by_scores
from .self_paced import PaceParams, mixture_penalty, update_weights

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 1.0
    lambda1: float = 1.0
    lambda2: float = 1.0
    lambda3: float = 1.0
    gamma: float = 2.0
    mu: float = 1.05
    eta0: float | None = None
    K: int | None = None
    max_iter: int = 1500
    tol: float = 1e-6
    eps: float = 1e-8
    seed: int = 0
    guard: bool = True

    def __post_init__(self):
        for name in ("alpha", "lambda1", "lambda2", "lambda3"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if not self.mu >= 1:
            raise ValueError("mu must be >= 1")
        if self.eta0 is not None and not self.eta0 > 0:
            raise ValueError("eta0 must be > 0")
        if self.K is not None and self.K < 1:
            raise ValueError("K must be >= 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tol > 0 or not self.eps > 0:
            raise ValueError("tol and eps must be > 0")

    def subspace_dim(self, d: int) -> int:
        K = min(200, d) if self.K is None else self.K
        if K > d:
            raise ValueError(f"K={K} exceeds the feature count d={d}")
        return K

    def with_(self, **changes) -> "SolverConfig":
        return replace(self, **changes)


@dataclass
class SolverState:
    W: np.ndarray
    H: np.ndarray
    v: np.ndarray
    eta: float
    iter: int = 0
    obj_history: list = field(default_factory=list)
    eta_history: list = field(default_factory=list)
    v_history: list | None = None
    converged: bool = False


def _values(X) -> np.ndarray:
    return X.values if isinstance(X, DataMatrix) else np.asarray(X, dtype=float)


def _laplacian(graph) -> np.ndarray:
    return graph.L if isinstance(graph, SampleGraph) else np.asarray(graph, dtype=float)


def row_weight_diag(W: np.ndarray, eps: float) -> np.ndarray:
    """Diagonal of M, ``1 / max(||w_i||^(3/2), eps)``, as a length-d vector."""
    return 1.0 / np.maximum(np.linalg.norm(W, axis=1) ** 1.5, eps)


def l2_half_norm(W: np.ndarray) -> float:
    """``||W||_{2,1/2}^{1/2}``, i.e. the sum of square-rooted row norms."""
    return float(np.sqrt(np.linalg.norm(W, axis=1)).sum())


def per_sample_losses(X, W, H) -> np.ndarray:
    Xv = _values(X)
    R = Xv - (Xv @ W) @ H
    return np.einsum("ij,ij->i", R, R)


def weighted_data(X, v) -> np.ndarray:
    return np.sqrt(np.asarray(v, dtype=float))[:, None] * _values(X)


def objective_terms(X, state: SolverState, S, graph, cfg: SolverConfig) -> dict:
    Xv = _values(X)
    W, H, v = state.W, state.H, state.v
    if W.shape != (Xv.shape[1], H.shape[0]) or H.shape[1] != Xv.shape[1] or v.shape != (Xv.shape[0],):
        raise ValueError(
            f"shape mismatch: X {Xv.shape}, W {W.shape}, H {H.shape}, v {v.shape}"
        )
    L = _laplacian(graph)
    XW = Xv @ W
    rowsum = W.sum(axis=1)
    K = W.shape[1]
    gram = W.T @ W - np.eye(K)
    return {
        "reconstruction": float(v @ per_sample_losses(Xv, W, H)),
        "self_paced": float(mixture_penalty(v, cfg.gamma, state.eta).sum()),
        "redundancy": cfg.lambda1 * float(rowsum @ S @ rowsum),
        "manifold": cfg.lambda2 * float(np.einsum("ij,ij->", XW, L @ XW)),
        "sparsity": cfg.alpha * l2_half_norm(W),
        "orthogonality": 0.5 * cfg.lambda3 * float(np.sum(gram * gram)),
    }


def objective(X, state: SolverState, S, graph, cfg: SolverConfig) -> float:
    return float(sum(objective_terms(X, state, S, graph, cfg).values()))


def update_v(state: SolverState, losses, cfg: SolverConfig) -> np.ndarray:
    return update_weights(losses, PaceParams(state.eta, cfg.gamma, cfg.mu))


def update_H(state: SolverState, G: np.ndarray, eps: float = 1e-8) -> np.ndarray:
    WtA = state.W.T @ (G.T @ G)
    return state.H * WtA / ((WtA @ state.W) @ state.H + eps)


def _w_factors(state, G, X, S, graph, cfg):
    # numerator / denominator of the multiplicative W step, without eps
    W, H = state.W, state.H
    Xv = _values(X)
    A = G.T @ G
    XW = Xv @ W
    if isinstance(graph, SampleGraph):
        Z, deg = graph.Z, graph.degree
    else:
        L = np.asarray(graph, dtype=float)
        deg = np.diag(L).copy()
        Z = np.diag(deg) - L
    num = A @ H.T + cfg.lambda2 * (Xv.T @ (Z @ XW)) + cfg.lambda3 * W
    den = (
        A @ W @ (H @ H.T)
        + 0.25 * cfg.alpha * row_weight_diag(W, cfg.eps)[:, None] * W
        + cfg.lambda1 * (S @ W.sum(axis=1))[:, None]
        + cfg.lambda2 * (Xv.T @ (deg[:, None] * XW))
        + cfg.lambda3 * W @ (W.T @ W)
    )
    return num, den


def update_W(state: SolverState, G, X, S, graph, cfg: SolverConfig) -> np.ndarray:
    """One multiplicative step on W.

    The Laplacian enters split as ``L = D - Z``: the ``Z`` part sits in the
    numerator and the degree part in the denominator so both stay
    nonnegative.
    """
    num, den = _w_factors(state, G, X, S, graph, cfg)
    return state.W * num / (den + cfg.eps)


def guarded_update_W(state: SolverState, G, X, S, graph, cfg: SolverConfig,
                     current: float, max_halvings: int = 30):
    """Multiplicative W step with an exponent backtrack.

    Tries ``W * ratio**s`` for s = 1, 1/2, 1/4, ... and keeps the first
    candidate whose objective does not exceed ``current``. With s = 1 this is
    exactly :func:`update_W`. ``W * log(ratio)`` is a descent direction, so a
    small enough exponent always succeeds unless the step is already
    numerically zero, in which case W is left unchanged.

    Rows whose ``||w_i||^(3/2)`` falls below ``eps`` (where the row weight
    saturates) are set exactly to zero; the square-root penalty makes that a
    strict decrease for such rows, and zero rows stay zero afterwards.
    Returns ``(W, objective, exponent)``.
    """
    num, den = _w_factors(state, G, X, S, graph, cfg)
    ratio = num / (den + cfg.eps)
    W0 = state.W
    s = 1.0
    for _ in range(max_halvings + 1):
        cand = W0 * ratio if s == 1.0 else W0 * ratio**s
        cand[np.linalg.norm(cand, axis=1) ** 1.5 < cfg.eps] = 0.0
        state.W = cand
        obj = objective(X, state, S, graph, cfg)
        if obj <= current:
            return state.W, obj, s
        s *= 0.5
    state.W = W0
    return W0, current, 0.0


def gradients(X, state: SolverState, S, graph, cfg: SolverConfig):
    """Gradients of the penalized objective in ``W`` and ``H`` at fixed ``v``."""
    G = weighted_data(X, state.v)
    WtA = state.W.T @ (G.T @ G)
    grad_H = 2.0 * ((WtA @ state.W) @ state.H - WtA)
    num, den = _w_factors(state, G, X, S, graph, cfg)
    return 2.0 * (den - num), grad_H


def initial_eta(losses: np.ndarray) -> float:
    """Pace that leaves roughly the 10% highest-loss samples weighted 0."""
    eta = float(np.sqrt(np.percentile(losses, 90)))
    return eta if eta > 0 else 1.0


def init_state(X, cfg: SolverConfig, H0=None) -> SolverState:
    Xv = _values(X)
    d = Xv.shape[1]
    K = cfg.subspace_dim(d)
    W = np.ones((d, K))
    if H0 is None:
        H = np.random.default_rng(cfg.seed).random((K, d))
    else:
        H = np.array(H0, dtype=float)
        if H.shape != (K, d):
            raise ValueError(f"H0 must have shape {(K, d)}, got {H.shape}")
    eta = cfg.eta0 if cfg.eta0 is not None else initial_eta(per_sample_losses(Xv, W, H))
    return SolverState(W=W, H=H, v=np.ones(Xv.shape[0]), eta=eta)


def fit(X, cfg: SolverConfig, *, H0=None, track_weights: bool = False,
        S=None, graph=None) -> SolverState:
    """Run the alternating v -> H -> W -> eta loop until convergence.

    Stops once the relative objective change drops below ``cfg.tol`` or
    after ``cfg.max_iter`` sweeps. ``obj_history[t]`` is the objective after
    sweep ``t`` evaluated at the pace ``eta_history[t]`` used in that sweep.
    """
    Xv = _values(X)
    if Xv.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    if np.any(Xv < 0):
        raise ValueError("X must be nonnegative; scale it first")
    if S is None:
        S = build_feature_similarity(Xv)
    if graph is None:
        graph = build_sample_graph(Xv)
    state = init_state(Xv, cfg, H0)
    eta0 = state.eta
    if track_weights:
        state.v_history = []

    for t in range(cfg.max_iter):
        state.eta = eta0 * cfg.mu**t
        state.v = update_v(state, per_sample_losses(Xv, state.W, state.H), cfg)
        G = weighted_data(Xv, state.v)
        state.H = update_H(state, G, cfg.eps)
        if cfg.guard:
            before = objective(Xv, state, S, graph, cfg)
            state.W, obj, _ = guarded_update_W(state, G, Xv, S, graph, cfg, before)
        else:
            state.W = update_W(state, G, Xv, S, graph, cfg)
            obj = objective(Xv, state, S, graph, cfg)
        state.iter = t + 1

        state.obj_history.append(obj)
        state.eta_history.append(state.eta)
        if track_weights:
            state.v_history.append(state.v.copy())
        if t > 0:
            prev = state.obj_history[-2]
            if abs(obj - prev) / max(1.0, abs(prev)) < cfg.tol:
                state.converged = True
                break
    log.debug("fit stopped after %d sweeps (converged=%s)", state.iter, state.converged)
    state.eta = eta0 * cfg.mu**state.iter
    return state


def rank_features(state_or_W, N: int | None = None) -> FeatureRanking:
    """Order features by ``sum_j W_ij^2``, largest first."""
    W = state_or_W.W if isinstance(state_or_W, SolverState) else np.asarray(state_or_W)
    ranking = rank_by_scores((W * W).sum(axis=1), descending=True)
    return ranking if N is None else ranking.truncated(N)
