"""Self-paced regularizers and their closed-form sample weights.

Each function returns ``argmin_{v in [0, 1]} v * loss + f(v)`` for one
regularizer ``f``. The pace ``eta`` plays the role of an age threshold:
growing it admits harder (higher-loss) samples.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PaceParams:
    eta: float
    gamma: float = 2.0
    mu: float = 1.05

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not self.mu >= 1:
            raise ValueError(f"mu must be >= 1, got {self.mu}")

    def grown(self) -> "PaceParams":
        return PaceParams(self.eta * self.mu, self.gamma, self.mu)


def weight_hard(loss: float, eta: float) -> float:
    return 1.0 if loss < eta else 0.0


def weight_linear(loss: float, eta: float) -> float:
    return 1.0 - loss / eta if loss < eta else 0.0


def mixture_penalty(v, gamma: float, eta: float):
    """The mixture regularizer ``gamma^2 / (v + gamma / eta)``."""
    return gamma * gamma / (np.asarray(v, dtype=float) + gamma / eta)


def _mixture(losses: np.ndarray, gamma: float, eta: float) -> np.ndarray:
    lower = (eta * gamma / (eta + gamma)) ** 2
    upper = eta * eta
    v = np.zeros_like(losses)
    v[losses <= lower] = 1.0
    mid = (losses > lower) & (losses < upper)
    v[mid] = gamma * (1.0 / np.sqrt(losses[mid]) - 1.0 / eta)
    # rounding near the branch edges may step a hair outside [0, 1]
    return np.clip(v, 0.0, 1.0)


def weight_mixture(loss: float, p: PaceParams) -> float:
    """Closed-form weight under the mixture regularizer.

    Saturates at 1 for ``loss <= (eta*gamma / (eta+gamma))**2`` and at 0 for
    ``loss >= eta**2``; between the two it is ``gamma * (1/sqrt(loss) - 1/eta)``.
    """
    return float(_mixture(np.array([float(loss)]), p.gamma, p.eta)[0])


def update_weights(losses, p: PaceParams) -> np.ndarray:
    losses = np.asarray(losses, dtype=float)
    if np.any(~np.isfinite(losses)) or np.any(losses < 0):
        raise ValueError("losses must be finite and nonnegative")
    return _mixture(losses, p.gamma, p.eta)
