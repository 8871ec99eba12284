"""A single particle on [0, 1]: energy conservation gives u_hat as a function of Q.

With slopes ``u/Q`` and ``-u/(1-Q)`` the energy is
``E = u^r (Q^(1-r) + (1-Q)^(1-r)) / r``, so for a positive velocity

    u_hat(Q) = (r E / (Q^(1-r) + (1-Q)^(1-r)))^(1/r),

and the motion follows from the scalar ODE ``dQ/dt = u_hat(Q)``.  Near the
wall ``eps = 1 - Q`` obeys ``d eps/dt ~ -(E r)^(1/r) eps^((r-1)/r)``, which
reaches zero at a finite time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from ..core import check_exponent

__all__ = [
    "OnePointModel",
    "onepoint_asymptotic_velocity",
    "onepoint_collision_time",
    "onepoint_epsilon",
    "onepoint_position",
    "onepoint_time",
    "onepoint_vanishing_time",
    "onepoint_velocity",
]


@dataclass(frozen=True)
class OnePointModel:
    E: float
    r: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", check_exponent(self.r))
        if not self.E >= 0:
            raise ValueError("energy must be non-negative")

    @classmethod
    def from_state(cls, q: float, u: float, r: int) -> OnePointModel:
        """Model through the point ``(q, u_hat)``."""
        r = check_exponent(r)
        if not 0 < q < 1:
            raise ValueError("q must lie in (0, 1)")
        # interval form q |u/q|^r + (1-q) |u/(1-q)|^r avoids overflowing q^(1-r)
        return cls((q * abs(u / q) ** r + (1 - q) * abs(u / (1 - q)) ** r) / r, r)


def onepoint_velocity(Q1, model: OnePointModel):
    """Positive root ``u_hat(Q1)``; evaluated in logs so large r cannot overflow."""
    Q = np.asarray(Q1, dtype=float)
    if np.any((Q <= 0) | (Q >= 1)):
        raise ValueError("Q1 must lie in (0, 1)")
    r = model.r
    if model.E == 0:
        out = np.zeros_like(Q)
    else:
        logD = np.logaddexp((1 - r) * np.log(Q), (1 - r) * np.log1p(-Q))
        out = np.exp((math.log(r * model.E) - logD) / r)
    return out if out.ndim else float(out)


def onepoint_vanishing_time(eps0: float, model: OnePointModel) -> float:
    """``t* = r eps0^(1/r) / (E r)^(1/r)`` of the near-wall asymptotic law."""
    if model.E == 0:
        return math.inf
    r = model.r
    return r * eps0 ** (1 / r) / (model.E * r) ** (1 / r)


def onepoint_epsilon(t, eps0: float, model: OnePointModel):
    """Near-wall gap ``eps(t) = (eps0^(1/r) - (E r)^(1/r) t / r)^r``.

    Returns ``(eps, past)`` where ``past`` flags ``t > t*``; past the
    vanishing time the gap is reported as 0.
    """
    r = model.r
    tt = np.asarray(t, dtype=float)
    base = eps0 ** (1 / r) - (model.E * r) ** (1 / r) * tt / r
    eps = np.where(base > 0, np.maximum(base, 0.0) ** r, 0.0)
    past = tt > onepoint_vanishing_time(eps0, model)
    if eps.ndim == 0:
        return float(eps), bool(past)
    return eps, past


def onepoint_asymptotic_velocity(eps, model: OnePointModel):
    """``(E r)^(1/r) eps^((r-1)/r)``, the leading term of ``u_hat`` as Q -> 1."""
    r = model.r
    return (model.E * r) ** (1 / r) * np.asarray(eps, dtype=float) ** ((r - 1) / r)


def _regular_part(q, model: OnePointModel):
    """``(1-q)^((r-1)/r) / u_hat(q)``, smooth up to the wall."""
    r = model.r
    return ((((1 - q) / q) ** (r - 1) + 1) / (r * model.E)) ** (1 / r)


def _wall_integral(lo: float, model: OnePointModel) -> float:
    """``int_lo^1 dq / u_hat(q)`` with the endpoint singularity as a quadrature weight."""
    if lo >= 1:
        return 0.0
    r = model.r
    val, _ = integrate.quad(_regular_part, lo, 1.0, args=(model,), weight="alg",
                            wvar=(0.0, -(r - 1) / r), epsabs=1e-15, epsrel=1e-14, limit=400)
    return val


def onepoint_time(Q, Q0: float, model: OnePointModel) -> float:
    """Time to move from ``Q0`` to ``Q`` (``Q0 <= Q <= 1``) under ``dQ/dt = u_hat(Q)``."""
    if not 0 < Q0 < 1:
        raise ValueError("Q0 must lie in (0, 1)")
    if Q < Q0 or Q > 1:
        raise ValueError("a positive velocity moves the point right, up to the wall at 1")
    if Q == Q0:
        return 0.0
    if model.E == 0:
        return math.inf
    return _wall_integral(Q0, model) - _wall_integral(Q, model)


def onepoint_collision_time(Q0: float, model: OnePointModel) -> float:
    """Finite time at which the point reaches the wall at 1."""
    if model.E == 0:
        return math.inf
    return _wall_integral(Q0, model)


def onepoint_position(t: float, Q0: float, model: OnePointModel) -> float:
    """``Q(t)`` by inverting ``onepoint_time``; a reference for integrator tests."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0 or model.E == 0:
        return Q0
    if t >= onepoint_collision_time(Q0, model):
        raise ValueError("t is at or past the collision time")
    return optimize.brentq(lambda q: onepoint_time(q, Q0, model) - t, Q0, 1.0, xtol=1e-16, rtol=1e-15,
                           maxiter=400)
