"""The r -> infinity limit of one particle on [0, 1].

The momentum scaled as ``P = z^(r-1)`` keeps a conserved slope
``z = max(u/q, u/(1-q))``, so ``u_hat = z min(Q, 1 - Q)``: exponential
growth up to the midpoint, then exponential approach to the wall.  The gap
``1 - Q`` is returned directly because ``Q`` itself rounds to 1 long before
the gap does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["InfinityOnePoint", "infinity_onepoint_trajectory", "infinity_slope"]


def infinity_slope(q: float, u: float) -> float:
    """``z = max(u/q, u/(1-q))`` for one point with ``u_hat >= 0``."""
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    if u < 0:
        # the sign convention for mixed-sign slopes is not settled
        raise ValueError("only non-negative velocities are supported")
    return max(u / q, u / (1 - q))


@dataclass(frozen=True)
class InfinityOnePoint:
    z: float
    Q0: float

    def __post_init__(self) -> None:
        if not 0 < self.Q0 < 1:
            raise ValueError("Q0 must lie in (0, 1)")
        if self.z < 0:
            raise ValueError("z must be non-negative")

    @property
    def midpoint_time(self) -> float:
        """Time at which the point passes 1/2 (0 if it starts at or beyond it)."""
        if self.Q0 >= 0.5:
            return 0.0
        return math.log(0.5 / self.Q0) / self.z if self.z > 0 else math.inf

    def gap(self, t):
        """``1 - Q(t)``, strictly positive for every finite t."""
        t = np.asarray(t, dtype=float)
        if self.Q0 >= 0.5:
            out = (1 - self.Q0) * np.exp(-self.z * t)
        else:
            th = self.midpoint_time
            early = 1 - self.Q0 * np.exp(self.z * np.minimum(t, th))
            late = 0.5 * np.exp(-self.z * np.maximum(t - th, 0.0))
            out = np.where(t <= th, early, late)
        return out if out.ndim else float(out)

    def position(self, t):
        t = np.asarray(t, dtype=float)
        if self.Q0 >= 0.5:
            out = 1 - np.asarray(self.gap(t))
        else:
            th = self.midpoint_time
            out = np.where(t <= th, self.Q0 * np.exp(self.z * np.minimum(t, th)), 1 - self.gap(t))
        return out if out.ndim else float(out)

    def velocity(self, t):
        Q = np.asarray(self.position(t))
        out = self.z * np.minimum(Q, np.asarray(self.gap(t)))
        return out if out.ndim else float(out)


def infinity_onepoint_trajectory(z: float, Q0: float, t):
    """``Q1(t)`` of the limiting one-point motion."""
    return InfinityOnePoint(z, Q0).position(t)
