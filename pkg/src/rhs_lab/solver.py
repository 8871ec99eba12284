"""Momentum-to-velocity map ``u_hat = U(P, Q)``.

The nodal velocities minimise the strictly convex function

    phi(u) = sum_i dQ_i |s_i|^r / r - sum_i P_i u_i

whose gradient is ``-F`` with ``F_i = P_i + s_i^(r-1) - s_{i-1}^(r-1)``.  The
Hessian is symmetric tridiagonal, so each Newton step costs one O(n) Thomas
sweep.  Steps are damped by Armijo backtracking on ``phi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath
import numpy as np
from numba import njit

from .core import (
    MIN_WIDTH_FRACTION,
    DegenerateGeometryError,
    Domain1D,
    ParticleState,
    VelocityProfile,
    _ipow_scalar,
    check_exponent,
)

__all__ = [
    "backward_error",
    "LineSearchError",
    "SingularJacobianError",
    "SolveReport",
    "SolverConfig",
    "SolverFailure",
    "newton_step",
    "objective",
    "residual",
    "solve_state",
    "solve_velocity",
]

OK, MAX_ITER, SINGULAR, LINE_SEARCH = 0, 1, 2, 3
ARMIJO_C = 1e-4
BACKTRACK = 0.5
MIN_STEP = 1e-14


class SingularJacobianError(ArithmeticError):
    """The tridiagonal Hessian has a vanishing pivot (e.g. all slopes zero, r > 2)."""


class LineSearchError(ArithmeticError):
    """Backtracking could not find a decrease of the convex objective."""


class SolverFailure(RuntimeError):
    def __init__(self, message: str, report: SolveReport):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-12
    max_iter: int = 100
    damping: float = 1.0
    regularization: float = 0.0
    continuation: bool = True
    polish: bool = True

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.regularization < 0:
            raise ValueError("regularization must be >= 0")


@dataclass
class SolveReport:
    """``final_residual`` is the componentwise backward error (see ``_residual``)."""

    iterations: int = 0
    final_residual: float = 0.0
    continuation_path: list[int] = field(default_factory=list)
    absolute_residual: float = 0.0
    regularized: bool = False


# -- kernels -----------------------------------------------------------------


@njit(cache=True)
def _residual(u, P, nodes, r, F):
    """Fill ``F`` and return ``(max|F|, backward_error)``.

    The backward error is ``max_i |F_i| / (|P_i| + |m_{i-1}| + |m_i| + H_ii max|u|)``
    with fluxes ``m = s^(r-1)`` and Hessian diagonal ``H_ii``: the relative
    perturbation of momenta, fluxes and velocities that would make ``u`` exact.
    A global absolute test is meaningless here: for large r the fluxes span
    dozens of decades across one profile.
    """
    n = P.size
    umax = 0.0
    for k in range(u.size):
        umax = max(umax, abs(u[k]))
    dq = nodes[1] - nodes[0]
    s = (u[1] - u[0]) / dq
    m_prev = _ipow_scalar(s, r - 1)
    a_prev = (r - 1) * _ipow_scalar(s, r - 2) / dq
    res = 0.0
    err = 0.0
    for i in range(n):
        dq = nodes[i + 2] - nodes[i + 1]
        s = (u[i + 2] - u[i + 1]) / dq
        m = _ipow_scalar(s, r - 1)
        a = (r - 1) * _ipow_scalar(s, r - 2) / dq
        F[i] = P[i] + m - m_prev
        res = max(res, abs(F[i]))
        scale = abs(P[i]) + abs(m) + abs(m_prev) + (a + a_prev) * umax
        if F[i] != 0.0:
            err = max(err, abs(F[i]) / scale if scale > 0.0 else np.inf)
        m_prev = m
        a_prev = a
    return res, err


@njit(cache=True)
def _objective(u, P, nodes, r):
    """Return ``(phi, noise)``; ``noise`` bounds the rounding error of ``phi``."""
    lag = 0.0
    for k in range(nodes.size - 1):
        dq = nodes[k + 1] - nodes[k]
        lag += dq * _ipow_scalar((u[k + 1] - u[k]) / dq, r) / r
    work = 0.0
    mag = 0.0
    for i in range(P.size):
        work += P[i] * u[i + 1]
        mag += abs(P[i] * u[i + 1])
    return lag - work, 16.0 * 2.220446049250313e-16 * (lag + mag)


@njit(cache=True)
def _conductances(u, nodes, r, a):
    """``a_k = (r-1)|s_k|^(r-2)/dQ_k``; the Hessian is ``D^T diag(a) D``."""
    for k in range(a.size):
        dq = nodes[k + 1] - nodes[k]
        a[k] = (r - 1) * _ipow_scalar((u[k + 1] - u[k]) / dq, r - 2) / dq


@njit(cache=True)
def _hessian(u, nodes, r, delta, diag, off):
    n = diag.size
    a = np.empty(n + 1)
    _conductances(u, nodes, r, a)
    for i in range(n):
        diag[i] = a[i] + a[i + 1] + delta
        if i < n - 1:
            off[i] = -a[i + 1]


@njit(cache=True)
def _chain_solve(a, delta, rhs, x):
    """Solve ``(D^T diag(a) D + delta I) x = rhs``; False on a vanishing pivot.

    This is the Thomas algorithm with the pivots written as
    ``p_i = a_{i+1} + delta + q_i``, ``q_i = a_i (q_{i-1} + delta) / p_{i-1}``
    (``q_0 = a_0``): the left part of the chain acts as a series conductance.
    Every term is non-negative, so pivots keep full relative accuracy even
    when the conductances span many decades, where the textbook form
    ``diag_i - off_{i-1}^2 / p_{i-1}`` cancels catastrophically.
    """
    n = rhs.size
    c = np.empty(n)
    d = np.empty(n)
    q = a[0]
    piv = 1.0
    for i in range(n):
        if i > 0:
            q = a[i] * (q + delta) / piv
        piv = a[i + 1] + delta + q
        if not (piv > 0.0 and piv < np.inf):
            return False
        c[i] = -a[i + 1] / piv
        d[i] = (rhs[i] + (a[i] * d[i - 1] if i > 0 else 0.0)) / piv
    x[n - 1] = d[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return True


@njit(cache=True)
def _step(u, P, nodes, r, delta, damping, F):
    """One damped Newton step in place.  ``F`` must hold the current residual."""
    n = P.size
    a = np.empty(n + 1)
    d = np.empty(n)
    _conductances(u, nodes, r, a)
    if not _chain_solve(a, delta, F, d):
        return SINGULAR
    slope = 0.0  # directional derivative of phi along d is -F.d
    for i in range(n):
        slope -= F[i] * d[i]
    phi0, noise = _objective(u, P, nodes, r)
    trial = u.copy()
    t = damping
    while t >= MIN_STEP:
        for i in range(n):
            trial[i + 1] = u[i + 1] + t * d[i]
        phi, _ = _objective(trial, P, nodes, r)
        if phi <= phi0 + ARMIJO_C * t * slope + noise:
            for i in range(n):
                u[i + 1] = trial[i + 1]
            return OK
        t *= BACKTRACK
    return LINE_SEARCH


@njit(cache=True)
def _newton(u, P, nodes, r, delta, damping, tol, max_iter, polish):
    F = np.empty(P.size)
    res, err = _residual(u, P, nodes, r, F)
    it = 0
    while err > tol:
        if it >= max_iter:
            return MAX_ITER, it, res, err
        status = _step(u, P, nodes, r, delta, damping, F)
        if status != OK:
            return status, it, res, err
        it += 1
        res, err = _residual(u, P, nodes, r, F)
    if polish and it > 0 and res > 0.0:
        # One more step once converged.  Modes with tiny Hessian eigenvalues
        # (nearly flat intervals, large r) are barely constrained by the
        # backward-error test; a Newton step from here pins them down to
        # rounding level.  Kept only if it does not make things worse.
        keep = u.copy()
        if _step(u, P, nodes, r, delta, 1.0, F) == OK:
            res2, err2 = _residual(u, P, nodes, r, F)
            if err2 <= err:
                return OK, it, res2, err2
        u[:] = keep
        _residual(u, P, nodes, r, F)
    return OK, it, res, err


@njit(cache=True)
def _linear_solve(P, nodes):
    """The r = 2 solution: one tridiagonal solve."""
    n = P.size
    u = np.zeros(n + 2)
    F = P.copy()
    d = np.empty(n)
    a = np.empty(n + 1)
    _conductances(u, nodes, 2, a)
    _chain_solve(a, 0.0, F, d)
    u[1:-1] = d
    return u


@njit(cache=True)
def _flux_start(P, nodes, r):
    """Initial iterate from the scalar reduction of the jump conditions.

    The jump conditions fix the fluxes up to one constant,
    ``m_i = mu - (P_1 + ... + P_i)``; ``mu`` is the root of the increasing
    function ``sum_i dQ_i m_i^(1/(r-1))`` (the velocity returns to zero at b),
    found by bisection on ``[min C, max C]``.
    """
    n = P.size
    C = np.zeros(n + 1)
    for i in range(n):
        C[i + 1] = C[i] + P[i]
    lo = C.min()
    hi = C.max()
    inv = 1.0 / (r - 1)
    for _ in range(200):
        mu = 0.5 * (lo + hi)
        if mu <= lo or mu >= hi:
            break
        g = 0.0
        for k in range(n + 1):
            m = mu - C[k]
            g += (nodes[k + 1] - nodes[k]) * (m ** inv if m >= 0.0 else -((-m) ** inv))
        if g > 0.0:
            hi = mu
        else:
            lo = mu
    mu = 0.5 * (lo + hi)
    u = np.zeros(n + 2)
    for k in range(n + 1):
        m = mu - C[k]
        u[k + 1] = u[k] + (nodes[k + 1] - nodes[k]) * (m ** inv if m >= 0.0 else -((-m) ** inv))
    # close the profile at b; the prefix sums of P carry rounding
    length = nodes[-1] - nodes[0]
    defect = u[-1]
    for k in range(n + 2):
        u[k] -= defect * (nodes[k] - nodes[0]) / length
    u[-1] = 0.0
    return u


@njit(cache=True)
def _ray_rescale(u, P, nodes, r):
    """Scale ``u`` to the minimiser of ``phi`` along the ray through ``u``."""
    phi_r, _ = _objective(u, P * 0.0, nodes, r)  # = l_hat(u)
    work = 0.0
    for i in range(P.size):
        work += P[i] * u[i + 1]
    if work <= 0.0 or phi_r <= 0.0:
        return
    alpha = (work / (r * phi_r)) ** (1.0 / (r - 1))
    for i in range(u.size):
        u[i] *= alpha


def _flux_start_extended(P, nodes, r: int) -> np.ndarray:
    """``_flux_start`` evaluated in extended precision.

    For large r the fluxes on nearly flat intervals are many decades below the
    prefix sums of P, so double-precision prefix sums lose them entirely.
    """
    dps = 40 + 3 * r
    with mpmath.workdps(dps):
        q = [mpmath.mpf(float(x)) for x in nodes]
        dq = [q[k + 1] - q[k] for k in range(len(q) - 1)]
        C = [mpmath.mpf(0)]
        for p in P:
            C.append(C[-1] + mpmath.mpf(float(p)))
        inv = mpmath.mpf(1) / (r - 1)

        def slope(m):
            return mpmath.sign(m) * abs(m) ** inv

        def closure(mu):
            return mpmath.fsum(dq[k] * slope(mu - C[k]) for k in range(len(C)))

        lo, hi = min(C), max(C)
        for _ in range(int(3.33 * dps) + 60):
            mu = (lo + hi) / 2
            if closure(mu) > 0:
                hi = mu
            else:
                lo = mu
        u = [mpmath.mpf(0)]
        for k in range(len(C) - 1):
            u.append(u[-1] + dq[k] * slope(mu - C[k]))
        return np.array([float(x) for x in u] + [0.0])


# -- public API --------------------------------------------------------------


def _nodes(Q, domain: Domain1D) -> np.ndarray:
    nodes = np.concatenate(([domain.a], np.asarray(Q, dtype=float), [domain.b]))
    dq = np.diff(nodes)
    if np.any(dq < MIN_WIDTH_FRACTION * domain.length):
        i = int(np.argmin(dq))
        raise DegenerateGeometryError(f"interval {i} has width {dq[i]:.3e}")
    return nodes


def _full(u_interior) -> np.ndarray:
    return np.concatenate(([0.0], np.asarray(u_interior, dtype=float), [0.0]))


def residual(u_interior, P, Q, r: int, domain: Domain1D | None = None) -> np.ndarray:
    """``F_i = P_i + s_i^(r-1) - s_{i-1}^(r-1)``; zero at the solution."""
    r = check_exponent(r)
    P = np.asarray(P, dtype=float)
    F = np.empty(P.size)
    _residual(_full(u_interior), P, _nodes(Q, domain or Domain1D()), r, F)
    return F


def backward_error(u_interior, P, Q, r: int, domain: Domain1D | None = None) -> float:
    r = check_exponent(r)
    P = np.asarray(P, dtype=float)
    F = np.empty(P.size)
    return _residual(_full(u_interior), P, _nodes(Q, domain or Domain1D()), r, F)[1]


def objective(u_interior, P, Q, r: int, domain: Domain1D | None = None) -> float:
    r = check_exponent(r)
    phi, _ = _objective(_full(u_interior), np.asarray(P, dtype=float), _nodes(Q, domain or Domain1D()), r)
    return phi


def newton_step(u_interior, P, Q, r: int, *, domain: Domain1D | None = None, delta: float = 0.0,
                damping: float = 1.0) -> tuple[np.ndarray, float]:
    """Take one damped Newton step; return the new iterate and its ``max|F|``."""
    r = check_exponent(r)
    P = np.asarray(P, dtype=float)
    nodes = _nodes(Q, domain or Domain1D())
    u = _full(u_interior)
    F = np.empty(P.size)
    _residual(u, P, nodes, r, F)
    status = _step(u, P, nodes, r, float(delta), float(damping), F)
    if status == SINGULAR:
        raise SingularJacobianError("vanishing pivot in the tridiagonal Hessian")
    if status == LINE_SEARCH:
        raise LineSearchError("no sufficient decrease along the Newton direction")
    res, _ = _residual(u, P, nodes, r, F)
    return u[1:-1].copy(), res


def solve_velocity(
    P,
    Q,
    r: int,
    cfg: SolverConfig | None = None,
    *,
    domain: Domain1D | None = None,
    guess=None,
) -> tuple[VelocityProfile, SolveReport]:
    """Solve the discrete r-Laplace jump conditions for the nodal velocities.

    ``guess`` (interior values) warm-starts Newton; cold starts begin from the
    scalar flux reduction, redone in extended precision if Newton stalls.  As a
    last resort the solve is repeated by continuation through r = 2, 4, ..., r,
    each stage starting from the previous solution scaled to the best multiple
    for the new exponent.

    For large r the map is ill-conditioned where slopes nearly vanish:
    velocities differing by 1e-2 can both be exact for the same rounded P.
    The returned profile has componentwise backward error ``<= cfg.tol``.
    """
    r = check_exponent(r)
    cfg = cfg or SolverConfig()
    domain = domain or Domain1D()
    P = np.ascontiguousarray(P, dtype=float)
    nodes = _nodes(Q, domain)
    if P.size != nodes.size - 2:
        raise ValueError("P and Q differ in length")
    if not np.all(np.isfinite(P)):
        raise ValueError("non-finite momenta")
    report = SolveReport()
    if not np.any(P):
        return VelocityProfile(np.zeros(nodes.size), nodes), report

    fallback = 1e-10 * max(1.0, float(np.max(np.abs(P))))

    def attempt(u, rr):
        delta = cfg.regularization
        status, it, res, err = _newton(u, P, nodes, rr, delta, cfg.damping, cfg.tol, cfg.max_iter, cfg.polish)
        report.iterations += it
        if status in (SINGULAR, LINE_SEARCH) and delta == 0.0:
            report.regularized = True
            status, it, res, err = _newton(u, P, nodes, rr, fallback, cfg.damping, cfg.tol, cfg.max_iter, cfg.polish)
            report.iterations += it
        report.final_residual = err
        report.absolute_residual = res
        return status

    if guess is not None:
        u = _full(guess)
    else:
        u = _flux_start(P, nodes, r)
    status = attempt(u, r)

    if status != OK and guess is None and r > 2:
        u = _flux_start_extended(P, nodes, r)
        status = attempt(u, r)

    if status != OK and cfg.continuation and r > 2:
        u = _linear_solve(P, nodes)
        report.continuation_path.append(2)
        for rr in range(4, r + 1, 2):
            _ray_rescale(u, P, nodes, rr)
            status = attempt(u, rr)
            report.continuation_path.append(rr)
            if status != OK:
                break

    if status != OK:
        reason = {MAX_ITER: "iteration limit", SINGULAR: "singular Hessian",
                  LINE_SEARCH: "line search failure"}[status]
        raise SolverFailure(f"velocity solve failed ({reason}, residual {report.final_residual:.3e})", report)
    return VelocityProfile(u, nodes), report


def solve_state(state: ParticleState, r: int, cfg: SolverConfig | None = None, guess=None):
    return solve_velocity(state.P, state.Q, r, cfg, domain=state.domain, guess=guess)
