"""Stability metrics over per-fold coefficient vectors.

Supports are exact nonzero sets (the prox produces exact zeros), so no
magnitude cutoff appears anywhere here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedMetricError
from .fusedprox import support


@dataclass(frozen=True)
class StabilityInput:
    X: np.ndarray  # full design, features x samples
    betas: np.ndarray  # K x d, one row per fold

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        betas = np.asarray(self.betas, dtype=np.float64)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "betas", betas)
        if betas.ndim != 2 or betas.shape[0] < 2:
            raise ValueError("betas must be a K x d array with K >= 2")
        if X.ndim != 2 or X.shape[0] != betas.shape[1]:
            raise ValueError(
                f"X has {X.shape[0]} feature rows but betas have {betas.shape[1]}"
            )


def estimation_stability(inp: StabilityInput) -> float:
    """Mean squared deviation of fold predictions from the mean-coefficient
    prediction, normalized by the mean coefficient's squared norm.

    Smaller is more stable; zero iff all folds predict identically.
    """
    mean_beta = inp.betas.mean(axis=0)
    denom = float(mean_beta @ mean_beta)
    if denom == 0.0:
        raise UndefinedMetricError(
            "estimation stability is undefined: mean coefficient vector is zero"
        )
    k = inp.betas.shape[0]
    total = 0.0
    for row in inp.betas:
        dev = inp.X.T @ (row - mean_beta)
        total += float(dev @ dev)
    return total / (k * denom)


def multiset_dice(supports) -> float:
    """K * |intersection| / sum of sizes over K support sets.

    1 iff all supports are equal and nonempty, 0 iff the intersection is
    empty; undefined when every support is empty.
    """
    supports = [set(s) for s in supports]
    if len(supports) < 2:
        raise ValueError("need at least two supports")
    total = sum(len(s) for s in supports)
    if total == 0:
        raise UndefinedMetricError(
            "multiset Dice is undefined: all supports are empty"
        )
    common = set.intersection(*supports)
    return len(supports) * len(common) / total


def supports_of(betas) -> list[set[int]]:
    """Exact nonzero supports, one per row."""
    return [support(row) for row in np.asarray(betas)]
