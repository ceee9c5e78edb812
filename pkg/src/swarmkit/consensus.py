"""Weighted consensus points and the smooth memory switch.

The consensus point is the exponentially weighted ensemble average

    x_bar = sum_i x_i exp(-alpha F(x_i)) / sum_j exp(-alpha F(x_j)),

which concentrates on the cost minimizer as alpha grows (Laplace principle).
For large alpha the naive weights underflow or overflow, so a stabilized
variant subtracts the minimal cost before exponentiating; the two forms are
mathematically identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConsensusParams",
    "MemorySwitchParams",
    "weighted_consensus",
    "memory_switch",
    "argmin_point",
]

#: Above this sharpness the stabilized weights are always used.
FORCE_STABILIZED_ALPHA = 100.0


@dataclass(frozen=True)
class ConsensusParams:
    """Sharpness alpha >= 0 of the consensus weights.

    When ``stabilized`` the weights are computed after subtracting the
    minimal cost, which keeps them finite for any alpha.  Stabilization is
    forced for alpha > 100 regardless of the flag, since the naive form is
    numerically unsafe there.
    """

    alpha: float
    stabilized: bool = True

    def __post_init__(self):
        if not np.isfinite(self.alpha) or self.alpha < 0.0:
            raise ValueError(f"alpha must be a nonnegative real, got {self.alpha}")


@dataclass(frozen=True)
class MemorySwitchParams:
    """Sigmoid steepness beta and relaxation rate nu of the memory update."""

    beta: float
    nu: float

    def __post_init__(self):
        if self.beta <= 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.nu <= 0.0:
            raise ValueError(f"nu must be positive, got {self.nu}")


def weighted_consensus(points: np.ndarray, costs: np.ndarray, params: ConsensusParams) -> np.ndarray:
    """Exponentially weighted average of an (N, d) ensemble.

    The result lies in the convex hull of the points.  Raises on an empty
    ensemble or non-finite costs.
    """
    points = np.asarray(points, dtype=float)
    costs = np.asarray(costs, dtype=float)
    if points.ndim != 2:
        raise ValueError(f"points must be an (N, d) array, got shape {points.shape}")
    n = points.shape[0]
    if n == 0:
        raise ValueError("cannot take the consensus of an empty ensemble")
    if costs.shape != (n,):
        raise ValueError(f"costs must have shape ({n},), got {costs.shape}")
    if not np.all(np.isfinite(costs)):
        raise ValueError("costs must be finite")
    if params.stabilized or params.alpha > FORCE_STABILIZED_ALPHA:
        weights = np.exp(-params.alpha * (costs - costs.min()))
    else:
        weights = np.exp(-params.alpha * costs)
    total = weights.sum()
    return weights @ points / total


def memory_switch(cost_x, cost_y, params: MemorySwitchParams):
    """Smooth replacement test 1 + tanh(beta (F(y) - F(x))), in [0, 2].

    Close to 2 when the candidate x improves on the memory y, close to 0
    when it does not.  Accepts scalars or arrays.
    """
    return 1.0 + np.tanh(params.beta * (np.asarray(cost_y) - np.asarray(cost_x)))


def argmin_point(points: np.ndarray, costs: np.ndarray) -> np.ndarray:
    """Point of minimal cost; ties broken by lowest index."""
    points = np.asarray(points, dtype=float)
    costs = np.asarray(costs, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError(f"points must be a nonempty (N, d) array, got shape {points.shape}")
    if costs.shape != (points.shape[0],):
        raise ValueError(f"costs must have shape ({points.shape[0]},), got {costs.shape}")
    return points[int(np.argmin(costs))].copy()
