"""Piecewise-linear states of the r-Hunter-Saxton particle system.

A state is a set of interior nodes ``a < Q_1 < ... < Q_n < b`` carrying
momenta ``P``.  The velocity ``u`` is the piecewise-linear interpolant of the
nodal values ``u_hat`` with ``u(a) = u(b) = 0``; every formula below is written
in terms of the per-interval slopes ``s_i``.
"""

from __future__ import annotations

import warnings
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numba import njit

__all__ = [
    "DegenerateGeometryError",
    "Domain1D",
    "ParticleState",
    "VelocityProfile",
    "check_exponent",
    "energy",
    "interpolate_initial",
    "ipow",
    "momentum_from_velocity",
    "slopes",
]

#: intervals narrower than this fraction of ``b - a`` are treated as collapsed
MIN_WIDTH_FRACTION = 1e-12


class DegenerateGeometryError(ValueError):
    """Two consecutive nodes are (numerically) coincident."""


def check_exponent(r: int) -> int:
    if int(r) != r or r < 2 or int(r) % 2:
        raise ValueError(f"exponent r must be an even integer >= 2, got {r!r}")
    return int(r)


@dataclass(frozen=True)
class Domain1D:
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self) -> None:
        if not self.a < self.b:
            raise ValueError(f"domain requires a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a


def _frozen(x) -> np.ndarray:
    arr = np.array(x, dtype=float).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ParticleState:
    """Phase point ``(Q, P)`` of the particle system at time ``t``."""

    Q: np.ndarray
    P: np.ndarray
    domain: Domain1D = field(default_factory=Domain1D)
    t: float = 0.0

    def __post_init__(self) -> None:
        Q, P = _frozen(self.Q), _frozen(self.P)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "P", P)
        if Q.size < 1:
            raise ValueError("a particle state needs at least one point")
        if Q.shape != P.shape:
            raise ValueError(f"Q and P differ in length ({Q.size} vs {P.size})")
        if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(P))):
            raise ValueError("non-finite entries in Q or P")
        if not (Q[0] > self.domain.a and Q[-1] < self.domain.b and np.all(np.diff(Q) > 0)):
            raise ValueError("positions must be strictly increasing inside (a, b)")

    @property
    def n(self) -> int:
        return self.Q.size

    @property
    def nodes(self) -> np.ndarray:
        """Positions with the pinned endpoints, ``a, Q_1, ..., Q_n, b``."""
        return np.concatenate(([self.domain.a], self.Q, [self.domain.b]))


@dataclass(frozen=True)
class VelocityProfile:
    """Nodal velocities ``u_hat_0 .. u_hat_{n+1}`` on ``nodes``; ends are zero."""

    u: np.ndarray
    nodes: np.ndarray

    def __post_init__(self) -> None:
        u, nodes = _frozen(self.u), _frozen(self.nodes)
        if u.shape != nodes.shape or u.size < 3:
            raise ValueError("velocity profile needs n + 2 >= 3 matching values and nodes")
        if u[0] != 0.0 or u[-1] != 0.0:
            raise ValueError("boundary velocities must be exactly zero")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def from_interior(cls, u_interior, nodes) -> VelocityProfile:
        return cls(np.concatenate(([0.0], np.asarray(u_interior, dtype=float), [0.0])), nodes)

    @property
    def interior(self) -> np.ndarray:
        return self.u[1:-1]

    def __call__(self, x):
        """Evaluate the piecewise-linear interpolant."""
        return np.interp(x, self.nodes, self.u)


# -- integer powers ----------------------------------------------------------


@njit(cache=True)
def _ipow_scalar(x: float, k: int) -> float:
    result = 1.0
    base = x
    while k > 0:
        if k & 1:
            result *= base
        base *= base
        k >>= 1
    return result


def ipow(x, k: int):
    """``x**k`` for a non-negative integer ``k`` by repeated squaring.

    With ``k`` odd this is the signed power ``sign(x) |x|**k`` used for the
    fluxes ``|s|^(r-2) s``; with ``k`` even it is ``|x|**k``.
    """
    if k < 0:
        raise ValueError("negative exponent")
    x = np.asarray(x, dtype=float)
    result = np.ones_like(x)
    base = x.copy()
    while k:
        if k & 1:
            result = result * base
        k >>= 1
        if k:
            base = base * base
    return result if result.ndim else float(result)


# -- slopes, energy, momenta -------------------------------------------------


def _widths(nodes: np.ndarray, length: float) -> np.ndarray:
    dq = np.diff(nodes)
    if np.any(dq < MIN_WIDTH_FRACTION * length):
        i = int(np.argmin(dq))
        raise DegenerateGeometryError(f"interval {i} has width {dq[i]:.3e}")
    return dq


def _check_pair(state: ParticleState, vel: VelocityProfile) -> None:
    if vel.u.size != state.n + 2:
        raise ValueError(f"velocity has {vel.u.size - 2} interior values, state has {state.n}")


def slopes(state: ParticleState, vel: VelocityProfile) -> np.ndarray:
    """Per-interval slopes ``s_0 .. s_n`` of the interpolant."""
    _check_pair(state, vel)
    nodes = state.nodes
    return np.diff(vel.u) / _widths(nodes, state.domain.length)


def energy(state: ParticleState, vel: VelocityProfile, r: int) -> float:
    """``sum_i dQ_i |s_i|^r / r``, the W^{1,r} Lagrangian of the interpolant."""
    r = check_exponent(r)
    s = slopes(state, vel)
    dq = np.diff(state.nodes)
    return float(np.sum(dq * ipow(s, r)) / r)


def momentum_from_velocity(state: ParticleState, vel: VelocityProfile, r: int) -> np.ndarray:
    """Jump of the flux ``|u_x|^(r-2) u_x`` across each node, with a minus sign.

    ``P_i = s_{i-1}^(r-1) - s_i^(r-1)``, the inverse of the velocity solve.
    """
    r = check_exponent(r)
    m = ipow(slopes(state, vel), r - 1)
    return m[:-1] - m[1:]


def interpolate_initial(
    u0: Callable[[np.ndarray], np.ndarray],
    n: int,
    domain: Domain1D | None = None,
    r: int = 2,
    *,
    boundary_tol: float = 1e-10,
) -> tuple[ParticleState, VelocityProfile]:
    """Sample ``u0`` at ``n`` equispaced interior nodes.

    ``n = 99`` on [0, 1] reproduces the 101-node interpolation of a smooth
    profile (99 particles plus two pinned endpoints).
    """
    r = check_exponent(r)
    if n < 1:
        raise ValueError("need at least one interior point")
    domain = domain or Domain1D()
    nodes = np.linspace(domain.a, domain.b, n + 2)
    ends = np.asarray(u0(np.array([domain.a, domain.b])), dtype=float)
    if np.any(np.abs(ends) > boundary_tol):
        warnings.warn(
            f"u0 does not vanish at the boundary ({ends[0]:.3g}, {ends[1]:.3g}); clamping to 0",
            stacklevel=2,
        )
    u_int = np.asarray(u0(nodes[1:-1]), dtype=float)
    vel = VelocityProfile.from_interior(u_int, nodes)
    placeholder = ParticleState(nodes[1:-1], np.zeros(n), domain)
    P = momentum_from_velocity(placeholder, vel, r)
    return ParticleState(nodes[1:-1], P, domain), vel
