from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ThetaBelowMinLoss


@dataclass
class HackingInterval:
    """Range of a summary statistic over a set of admissible models.

    ``witness_lower`` / ``witness_upper`` are concrete parameter vectors that
    attain the bounds; ``info`` holds method-specific extras (solver flags,
    traces, layouts).
    """

    lower: float
    upper: float
    stat_at_min_loss: float
    theta: float
    witness_lower: np.ndarray
    witness_upper: np.ndarray
    info: dict[str, Any] = field(default_factory=dict)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= value <= self.upper + tol

    def to_dict(self) -> dict[str, Any]:
        return {
            "lower": float(self.lower),
            "upper": float(self.upper),
            "stat_at_min_loss": float(self.stat_at_min_loss),
            "theta": float(self.theta),
            "witness_lower": np.asarray(self.witness_lower, dtype=float).ravel().tolist(),
            "witness_upper": np.asarray(self.witness_upper, dtype=float).ravel().tolist(),
        }


def check_theta(theta: float, min_loss: float) -> float:
    """Return the usable budget, clamping float-resolution undershoot.

    A budget below ``min_loss`` by less than ``1e-12 * (1 + min_loss)`` is
    treated as equal to it; anything further below is infeasible.
    """
    theta = float(theta)
    if not np.isfinite(theta):
        raise ThetaBelowMinLoss(f"theta must be finite, got {theta}")
    if theta >= min_loss:
        return theta
    if min_loss - theta <= 1e-12 * (1.0 + abs(min_loss)):
        return float(min_loss)
    raise ThetaBelowMinLoss(f"theta={theta:.12g} is below the minimum achievable loss {min_loss:.12g}")
