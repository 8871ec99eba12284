"""Classical solutions of the Cauchy problem by characteristics.

Labels ``xi`` in ``[a, b]`` move with the flow, ``X_t = U``, and the label
stretch solves ``V = X_xi = (1 + t u0'(xi) / r)^r`` in closed form.  With the
free gauge ``H`` set to zero,

    X(xi, t) = xi + t u0(a) + int_a^xi (V - 1) ds,
    U(xi, t) = u0(a) + int_a^xi u0'(s) (1 + t u0'(s) / r)^(r-1) ds,

so the left end moves with ``u0(a)`` (normally zero) while the right end
drifts: the Cauchy problem has no boundary condition at b.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate, optimize
from scipy.special import binom

from ..core import Domain1D, check_exponent
from .differences import rhs2_lhs

__all__ = [
    "BlowupExceededError",
    "CharacteristicSolution",
    "DomainError",
    "binomial_map",
    "blowup_time",
    "characteristic_map",
    "classical_evaluate",
    "classical_residual",
]


class BlowupExceededError(ValueError):
    """Requested time is at or past the blow-up time."""


class DomainError(ValueError):
    """Evaluation point outside the region where the closed form is defined."""


def _vectorized(f: Callable) -> Callable:
    def g(x):
        x = np.asarray(x, dtype=float)
        try:
            y = np.asarray(f(x), dtype=float)
            if y.shape == x.shape:
                return y
        except (TypeError, ValueError):
            pass
        return np.vectorize(lambda s: float(f(s)))(x)

    return g


def blowup_time(du0: Callable, r: int, domain: Domain1D | None = None, *, samples: int = 100_000) -> float:
    """``T = r / sup(-u0')``, or ``inf`` when ``u0`` is non-decreasing.

    The supremum comes from a dense sample refined by a bounded scalar
    search around the best sample.
    """
    r = check_exponent(r)
    domain = domain or Domain1D()
    x = np.linspace(domain.a, domain.b, samples)
    g = -_vectorized(du0)(x)
    i = int(np.argmax(g))
    best = float(g[i])
    lo, hi = x[max(i - 1, 0)], x[min(i + 1, samples - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda s: float(du0(s)), bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-14})
        best = max(best, -float(res.fun))
    return r / best if best > 0 else math.inf


@dataclass(frozen=True)
class CharacteristicSolution:
    u0: Callable
    du0: Callable
    r: int
    domain: Domain1D = field(default_factory=Domain1D)
    epsabs: float = 1e-10  # quadrature tolerance (absolute)

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", check_exponent(self.r))

    @cached_property
    def T(self) -> float:
        return blowup_time(self.du0, self.r, self.domain)

    def _check_time(self, t: float) -> None:
        if t < 0:
            raise ValueError("characteristics are only set up for t >= 0")
        if t >= self.T:
            raise BlowupExceededError(f"t = {t} is not before the blow-up time {self.T}")


def _quad(f, lo, hi, epsabs):
    if hi == lo:
        return 0.0
    with warnings.catch_warnings():
        # tight tolerances end at roundoff, which quad reports as a warning
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=min(epsabs, 1e-10), limit=200)
    return val


def _stretch_minus_one(cs: CharacteristicSolution, s: float, t: float) -> float:
    y = t * cs.du0(s) / cs.r
    return math.expm1(cs.r * math.log1p(y))  # (1 + y)^r - 1 without cancellation


def _position(cs: CharacteristicSolution, xi: float, t: float) -> float:
    a = cs.domain.a
    return xi + t * float(cs.u0(a)) + _quad(lambda s: _stretch_minus_one(cs, s, t), a, xi, cs.epsabs)


def _velocity(cs: CharacteristicSolution, xi: float, t: float) -> float:
    a, r = cs.domain.a, cs.r

    def integrand(s):
        d = cs.du0(s)
        return d * (1.0 + t * d / r) ** (r - 1)

    return float(cs.u0(a)) + _quad(integrand, a, xi, cs.epsabs)


def characteristic_map(cs: CharacteristicSolution, xi: float, t: float) -> tuple[float, float, float]:
    """``(X, U, V)`` for the label ``xi`` at time ``t < T``."""
    cs._check_time(t)
    xi = float(xi)
    if not cs.domain.a <= xi <= cs.domain.b:
        raise DomainError(f"label {xi} outside [{cs.domain.a}, {cs.domain.b}]")
    V = (1.0 + t * cs.du0(xi) / cs.r) ** cs.r
    return _position(cs, xi, t), _velocity(cs, xi, t), float(V)


def binomial_map(cs: CharacteristicSolution, xi: float, t: float) -> tuple[float, float]:
    """``(X, U)`` from the expansion in ``C_k = binom(r, k) / r^k`` and
    ``G_k(xi) = int_a^xi u0'^k`` (with ``G_1 = u0``).  A cross-check of
    ``characteristic_map``; it cancels badly for large r.
    """
    cs._check_time(t)
    a, r = cs.domain.a, cs.r
    X = float(xi)
    U = 0.0
    for k in range(1, r + 1):
        C = binom(r, k) / r**k
        if k == 1:
            G = float(cs.u0(xi))
        else:
            G = _quad(lambda s, k=k: cs.du0(s) ** k, a, xi, cs.epsabs)
        X += C * t**k * G
        U += k * C * t ** (k - 1) * G
    return X, U


def _label(cs: CharacteristicSolution, x: float, t: float, xtol: float) -> float:
    """Solve ``X(xi, t) = x`` by Newton on the monotone map, safeguarded by bisection."""
    a, b = cs.domain.a, cs.domain.b
    lo, hi = a, b
    f_lo = _position(cs, lo, t) - x
    f_hi = _position(cs, hi, t) - x
    tol = 1e-12 * max(1.0, abs(x))
    if f_lo > tol or f_hi < -tol:
        raise DomainError(f"x = {x} outside [{f_lo + x}, {f_hi + x}] at t = {t}")
    if f_lo >= 0:
        return lo
    if f_hi <= 0:
        return hi
    xi = lo + (hi - lo) * (-f_lo) / (f_hi - f_lo)
    for _ in range(200):
        f = _position(cs, xi, t) - x
        if f > 0:
            hi = xi
        else:
            lo = xi
        V = (1.0 + t * cs.du0(xi) / cs.r) ** cs.r
        step = f / V if V > 0 else math.inf
        nxt = xi - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - xi) <= xtol or hi - lo <= xtol:
            return nxt
        xi = nxt
    return xi


def classical_evaluate(cs: CharacteristicSolution, x, t: float, *, xtol: float = 1e-10):
    """``u(x, t)`` of the classical solution, for x in ``[X(a, t), X(b, t)]``."""
    cs._check_time(t)
    xs = np.asarray(x, dtype=float)
    out = np.array([_velocity(cs, _label(cs, float(v), t, xtol), t) for v in xs.ravel()])
    return out.reshape(xs.shape) if xs.ndim else float(out[0])


def classical_residual(cs: CharacteristicSolution, xs, t: float, h: float, *, xtol: float = 1e-14):
    """rHS2 left side of the classical solution on ``xs`` by 4th-order differences.

    For the Cauchy problem it should vanish; its spread across ``xs`` falls
    like ``h^4`` until the root-finding tolerance takes over.
    """
    return rhs2_lhs(lambda y, tt: classical_evaluate(cs, y, tt, xtol=xtol), xs, t, cs.r, h)
