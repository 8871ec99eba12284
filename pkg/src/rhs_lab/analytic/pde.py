"""Grid solvers for the Cauchy problem, independent of the characteristic formulas.

Away from ``u_x = 0`` the equation is equivalent to the slope form
``v_t + u v_x = -v^2 / r`` with ``v = u_x`` and ``u(x) = u(a) + int_a^x v``.

``eulerian_solve`` is a method-of-lines discretisation of that form on a fixed
grid.  It is accurate while the solution is resolved, which near blow-up
stops being true long before T (the steep region shrinks like
``(1 - t/T)^(r + 1/2)``), so blow-up times come from ``lagrangian_blowup``:
cells that move with the flow and carry their flux ``v^(r-1)``.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, solve_ivp

from ..core import Domain1D, check_exponent

__all__ = ["LagrangianBlowup", "eulerian_solve", "lagrangian_blowup"]


def eulerian_solve(u0: Callable, du0: Callable, r: int, t: float, *, n: int = 10_000,
                   domain: Domain1D | None = None, rtol: float = 1e-10, atol: float = 1e-12):
    """Solve on ``n`` uniform cells up to time ``t``; return ``(x, u(x, t))``.

    Centered second-order differences in x, an adaptive explicit Runge-Kutta
    method in time.  The left end must be a stagnation point (``u0(a) = 0``);
    the right end is an outflow boundary whenever ``u > 0`` there.
    """
    r = check_exponent(r)
    domain = domain or Domain1D()
    if abs(float(u0(domain.a))) > 1e-12:
        raise ValueError("the fixed-grid solver needs u0(a) = 0")
    x = np.linspace(domain.a, domain.b, n + 1)
    h = x[1] - x[0]
    v0 = np.asarray(du0(x), dtype=float)

    def rhs(_, v):
        u = cumulative_trapezoid(v, dx=h, initial=0.0)
        return -u * np.gradient(v, h, edge_order=2) - v * v / r

    sol = solve_ivp(rhs, (0.0, t), v0, method="DOP853", rtol=rtol, atol=atol, t_eval=[t])
    if not sol.success:
        raise RuntimeError(f"method-of-lines integration failed: {sol.message}")
    return x, cumulative_trapezoid(sol.y[:, -1], dx=h, initial=0.0)


@dataclass
class LagrangianBlowup:
    time: float | None  # first time max|v| reaches the cap, None if never
    max_slope: float
    cells: int


def lagrangian_blowup(u0: Callable, r: int, *, n: int = 2000, domain: Domain1D | None = None,
                      cap: float = 1e4, t_max: float = 1e3) -> LagrangianBlowup:
    """Estimate the blow-up time as the first time ``max|u_x|`` reaches ``cap``.

    The cells start as a uniform partition with slopes from differences of
    ``u0``; each carries ``m = v^(r-1)`` with ``dm/dt = -(r-1)/r |v|^r``
    while its nodes move with the reconstructed ``u``.
    """
    r = check_exponent(r)
    domain = domain or Domain1D()
    X0 = np.linspace(domain.a, domain.b, n + 1)
    U0 = np.asarray(u0(X0), dtype=float)
    s0 = np.diff(U0) / np.diff(X0)
    m0 = np.sign(s0) * np.abs(s0) ** (r - 1)
    ua = U0[0]
    inv = 1.0 / (r - 1)

    def unpack(y):
        X, m = y[: n + 1], y[n + 1 :]
        return X, np.sign(m) * np.abs(m) ** inv

    def rhs(_, y):
        X, s = unpack(y)
        u = ua + np.concatenate(([0.0], np.cumsum(s * np.diff(X))))
        return np.concatenate((u, -(r - 1) / r * np.abs(s) ** r))

    def hit(_, y):
        return cap - np.max(np.abs(unpack(y)[1]))

    hit.terminal = True
    hit.direction = -1
    sol = solve_ivp(rhs, (0.0, t_max), np.concatenate((X0, m0)), method="RK45",
                    rtol=1e-10, atol=1e-12, events=hit)
    smax = float(np.max(np.abs(unpack(sol.y[:, -1])[1])))
    t_hit = float(sol.t_events[0][0]) if sol.t_events[0].size else None
    return LagrangianBlowup(t_hit, smax, n)
