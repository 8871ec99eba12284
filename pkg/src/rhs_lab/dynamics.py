"""Time integration of the particle system with classical RK4.

``dQ_i/dt = u_i`` and ``dP_i/dt = (r-1)/r (|s_i|^r - |s_{i-1}|^r)`` where
``u = U(P, Q)`` is re-solved at every stage.  This is ``-dH/dQ_i`` for
``H = P.u - l_hat(u, Q)``; note the order of the two slopes, which is what
conserves ``H`` and reduces at r = 2 to ``-P_i (s_{i-1} + s_i) / 2``.

Along this flow every interval satisfies

    d/dt s_k^(r-1) + (r-1)/r |s_k|^r = c(t)

with one constant for all k.  Trajectories record the spread of the left side
across intervals, from five-point differences over the recorded samples, and the
closed form ``c(t) = -(r-1)^2/r * sum dQ s^2 / sum dQ |s|^(2-r)`` obtained by
solving the time-differentiated jump conditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .core import (
    MIN_WIDTH_FRACTION,
    DegenerateGeometryError,
    ParticleState,
    VelocityProfile,
    _ipow_scalar,
    check_exponent,
    ipow,
)
from .solver import OK, SolverConfig, SolverFailure, _flux_start, _newton, _residual, solve_velocity

__all__ = [
    "BLOWUP",
    "COMPLETED",
    "DYNAMICS_TOL",
    "SOLVER_FAILURE",
    "IntegratorConfig",
    "OrderingViolation",
    "Trajectory",
    "energy_drift",
    "integrate",
    "momentum_rate",
    "rhs",
    "rk4_step",
    "stencil_weights",
    "weak_terms",
    "weak_constant",
]

#: default velocity-solve tolerance inside time stepping.  The looser solver
#: default leaves ~1e-13 absolute error in u, which on an interval about to
#: collapse is a 1e-6 relative error in its rate of change.
DYNAMICS_TOL = 1e-14

COMPLETED = "completed"
BLOWUP = "blowup"
SOLVER_FAILURE = "solver_failure"


class OrderingViolation(DegenerateGeometryError):
    """An RK4 stage produced positions that are not strictly increasing in (a, b)."""


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_end: float = 1.0
    record_every: int = 10
    blowup_slope_cap: float = 1e6
    blowup_gap_floor: float | None = None  # None -> 1e-8 (b - a)
    record_times: tuple[float, ...] = ()  # extra samples, rounded to the step grid

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be >= 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if not self.blowup_slope_cap > 0:
            raise ValueError("blowup_slope_cap must be positive")
        if self.blowup_gap_floor is not None and not self.blowup_gap_floor >= 0:
            raise ValueError("blowup_gap_floor must be >= 0")

    def gap_floor(self, length: float) -> float:
        return 1e-8 * length if self.blowup_gap_floor is None else self.blowup_gap_floor


@dataclass
class Trajectory:
    """Recorded samples of one integration.

    Arrays are indexed by sample: ``Q[k]``, ``P[k]`` have n entries, ``u[k]``
    has n + 2 (including the pinned ends).  ``c_spread`` and ``c_value`` are
    the spread and median of the weak-form terms differenced over neighbouring
    samples (``nan`` with fewer than three samples), so they only mean something
    when every step or so is recorded; ``c_exact`` is the closed-form constant.
    """

    r: int
    domain: object
    t: np.ndarray
    Q: np.ndarray
    P: np.ndarray
    u: np.ndarray
    energy: np.ndarray
    c_spread: np.ndarray
    c_value: np.ndarray
    c_exact: np.ndarray
    max_slope: np.ndarray
    termination: str = COMPLETED
    blowup_time: float | None = None
    blowup_reason: str | None = None
    message: str = ""
    stats: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.t.size

    @property
    def n(self) -> int:
        return self.Q.shape[1]

    def nodes(self, k: int) -> np.ndarray:
        return np.concatenate(([self.domain.a], self.Q[k], [self.domain.b]))

    def state(self, k: int) -> ParticleState:
        return ParticleState(self.Q[k], self.P[k], self.domain, float(self.t[k]))

    def velocity(self, k: int) -> VelocityProfile:
        return VelocityProfile(self.u[k], self.nodes(k))

    def slopes(self) -> np.ndarray:
        """Per-sample interval slopes, shape ``(samples, n + 1)``."""
        ends = np.ones((len(self), 1))
        nodes = np.hstack([self.domain.a * ends, self.Q, self.domain.b * ends])
        return np.diff(self.u, axis=1) / np.diff(nodes, axis=1)

    def before(self, max_slope: float) -> np.ndarray:
        """Mask of the leading samples with ``max|s| <= max_slope``."""
        return np.logical_and.accumulate(self.max_slope <= max_slope)


# -- kernels -----------------------------------------------------------------


@njit(cache=True)
def _pdot(u, nodes, r, out):
    c = (r - 1) / r
    dq = nodes[1] - nodes[0]
    e_prev = _ipow_scalar((u[1] - u[0]) / dq, r)
    for i in range(out.size):
        dq = nodes[i + 2] - nodes[i + 1]
        e = _ipow_scalar((u[i + 2] - u[i + 1]) / dq, r)
        out[i] = c * (e - e_prev)
        e_prev = e


@njit(cache=True)
def _shape(u, nodes, r, m, e):
    """Fill fluxes into ``m`` and ``|s|^r`` into ``e``; return ``(E, max|s|, min dQ, c)``."""
    E = 0.0
    smax = 0.0
    gap = np.inf
    num = 0.0
    den = 0.0
    for k in range(nodes.size - 1):
        dq = nodes[k + 1] - nodes[k]
        s = (u[k + 1] - u[k]) / dq
        m[k] = _ipow_scalar(s, r - 1)
        e[k] = m[k] * s
        E += dq * e[k] / r
        smax = max(smax, abs(s))
        gap = min(gap, dq)
        num += dq * s * s
        if r == 2:
            den += dq
        elif s != 0.0:
            den += dq / _ipow_scalar(abs(s), r - 2)
        else:
            den = np.inf
    c = 0.0  # an exactly flat interval forces c = 0 for r > 2
    if 0.0 < den < np.inf:
        c = -(r - 1.0) * (r - 1.0) / r * num / den
    return E, smax, gap, c


# -- single evaluations ------------------------------------------------------


def _nodes_checked(Q, domain) -> np.ndarray:
    nodes = np.empty(Q.size + 2)
    nodes[0] = domain.a
    nodes[1:-1] = Q
    nodes[-1] = domain.b
    dq = np.diff(nodes)
    if not np.all(dq > MIN_WIDTH_FRACTION * domain.length):
        i = int(np.argmin(dq))
        raise OrderingViolation(f"interval {i} has width {dq[i]:.3e}")
    return nodes


class _Solver:
    """Velocity solves for time stepping, with counters for the run summary.

    Newton starts from the better (by backward error) of the flux reduction
    and the previous stage's profile.  The flux reduction holds each interval
    flux to full relative precision, which the primal residual cannot (it
    subtracts fluxes of very different size), so when it is accurate it keeps
    modes controlled only by nearly flat intervals, mirror symmetry for one,
    exact.  For large r and many points the flat intervals drown in rounding
    of the prefix sums of P, and the previous profile is the better start.
    """

    def __init__(self, r: int, cfg: SolverConfig, domain):
        self.r, self.cfg, self.domain = r, cfg, domain
        self.solves = 0
        self.iterations = 0
        self.max_iterations = 0
        self.cold_restarts = 0

    def _newton(self, u, P, nodes):
        cfg = self.cfg
        status, it, _, _ = _newton(u, P, nodes, self.r, cfg.regularization, cfg.damping,
                                   cfg.tol, cfg.max_iter, cfg.polish)
        self.iterations += it
        self.max_iterations = max(self.max_iterations, it)
        return status

    def __call__(self, Q, P, guess) -> np.ndarray:
        nodes = _nodes_checked(Q, self.domain)
        self.solves += 1
        if not np.any(P):
            return np.zeros(nodes.size)
        u = _flux_start(P, nodes, self.r)
        alt = None
        if guess is not None:
            alt = guess.copy()
            alt[0] = alt[-1] = 0.0
            F = np.empty(P.size)
            if _residual(alt, P, nodes, self.r, F)[1] < _residual(u, P, nodes, self.r, F)[1]:
                u, alt = alt, u
        if self._newton(u, P, nodes) == OK:
            return u
        if alt is not None and self._newton(alt, P, nodes) == OK:
            return alt
        self.cold_restarts += 1
        vel, rep = solve_velocity(P, Q, self.r, self.cfg, domain=self.domain)
        self.iterations += rep.iterations
        self.max_iterations = max(self.max_iterations, rep.iterations)
        return np.array(vel.u)

    def stats(self) -> dict:
        return {
            "solves": self.solves,
            "newton_iterations": self.iterations,
            "max_newton_iterations": self.max_iterations,
            "cold_restarts": self.cold_restarts,
        }


def _full(guess):
    return None if guess is None else np.concatenate(([0.0], np.asarray(guess, dtype=float), [0.0]))


def momentum_rate(u, nodes, r: int) -> np.ndarray:
    """``dP/dt`` on a solved profile (full nodal arrays including the ends)."""
    r = check_exponent(r)
    u = np.asarray(u, dtype=float)
    out = np.empty(u.size - 2)
    _pdot(u, np.asarray(nodes, dtype=float), r, out)
    return out


def rhs(state: ParticleState, r: int, cfg: SolverConfig | None = None, *, guess=None):
    """Return ``(dQ/dt, dP/dt, velocity)`` at ``state``."""
    r = check_exponent(r)
    solve = _Solver(r, cfg or SolverConfig(tol=DYNAMICS_TOL), state.domain)
    u = solve(np.array(state.Q), np.array(state.P), _full(guess))
    vel = VelocityProfile(u, state.nodes)
    return vel.interior.copy(), momentum_rate(vel.u, vel.nodes, r), vel


def weak_constant(vel: VelocityProfile, r: int) -> float:
    """Closed-form ``c(t)`` shared by all intervals of a solved profile."""
    r = check_exponent(r)
    k = vel.u.size - 1
    return _shape(np.array(vel.u), np.array(vel.nodes), r, np.empty(k), np.empty(k))[3]


def _rk4(Q, P, dt, solve, r, domain, u1):
    """One RK4 step from ``(Q, P)`` whose solved velocity is ``u1``."""
    n = Q.size
    kq = np.empty((4, n))
    kp = np.empty((4, n))
    kq[0] = u1[1:-1]
    _pdot(u1, _nodes_checked(Q, domain), r, kp[0])
    u = u1
    for j, h in ((1, 0.5 * dt), (2, 0.5 * dt), (3, dt)):
        Qs = Q + h * kq[j - 1]
        Ps = P + h * kp[j - 1]
        u = solve(Qs, Ps, u)
        kq[j] = u[1:-1]
        _pdot(u, _nodes_checked(Qs, domain), r, kp[j])
    Qn = Q + dt / 6.0 * (kq[0] + 2.0 * kq[1] + 2.0 * kq[2] + kq[3])
    Pn = P + dt / 6.0 * (kp[0] + 2.0 * kp[1] + 2.0 * kp[2] + kp[3])
    _nodes_checked(Qn, domain)
    return Qn, Pn, u


def rk4_step(state: ParticleState, r: int, dt: float, cfg: SolverConfig | None = None,
             *, guess=None) -> ParticleState:
    """Advance ``state`` by one classical RK4 step (``dt`` may be negative).

    Raises ``OrderingViolation`` if any stage leaves the ordered configuration
    and ``SolverFailure`` if a velocity solve fails.
    """
    r = check_exponent(r)
    solve = _Solver(r, cfg or SolverConfig(tol=DYNAMICS_TOL), state.domain)
    Q = np.array(state.Q)
    P = np.array(state.P)
    u1 = solve(Q, P, _full(guess))
    Qn, Pn, _ = _rk4(Q, P, dt, solve, r, state.domain, u1)
    return ParticleState(Qn, Pn, state.domain, state.t + dt)


# -- weak-form differencing --------------------------------------------------


def stencil_weights(t, width: int = 5) -> tuple[np.ndarray, np.ndarray]:
    """Differentiation weights on the sample times ``t`` (any spacing).

    Each sample gets the derivative of the polynomial through ``width``
    consecutive samples, centered where possible and one-sided at the two
    ends.  Returns ``(start, W)``: sample ``j`` uses samples
    ``start[j] .. start[j] + width - 1`` with weights ``W[j]``.  Fewer samples
    than ``width`` shrink the stencil to all of them.
    """
    t = np.asarray(t, dtype=float)
    N = t.size
    if N < 2:
        raise ValueError("need at least two samples to differentiate")
    width = min(width, N)
    j = np.arange(N)
    start = np.clip(j - width // 2, 0, N - width)
    T = t[start[:, None] + np.arange(width)]  # (N, width)
    x = t
    W = np.zeros((N, width))
    for p in range(width):
        for k in range(width):
            if k == p:
                continue
            term = 1.0 / (T[:, p] - T[:, k])
            for q in range(width):
                if q != p and q != k:
                    term = term * (x - T[:, q]) / (T[:, p] - T[:, q])
            W[:, p] += term
    return start, W


def weak_terms(t, s, r: int) -> np.ndarray:
    """``w_k = d/dt s_k^(r-1) + (r-1)/r |s_k|^r`` on sampled slopes ``s[sample, k]``.

    The time derivative uses five-point stencils on the samples, so it is
    only as good as the sampling is fine: record every step for a check.
    """
    r = check_exponent(r)
    s = np.asarray(s, dtype=float)
    m = ipow(s, r - 1)
    start, W = stencil_weights(t)
    width = W.shape[1]
    mdot = np.zeros_like(m)
    for p in range(width):
        mdot += W[:, p, None] * m[start + p]
    return mdot + (r - 1) / r * m * s


# -- trajectories ------------------------------------------------------------


def integrate(initial: ParticleState, r: int, icfg: IntegratorConfig | None = None,
              scfg: SolverConfig | None = None, *, guess=None) -> Trajectory:
    """Integrate until ``icfg.t_end`` or blow-up; failures end up in ``termination``.

    Blow-up is declared when ``min dQ`` drops below the gap floor, ``max|s|``
    exceeds the slope cap, or a step would reorder the particles (collision
    inside the step).  ``blowup_time`` is linearly interpolated between the
    two steps bracketing the threshold crossing; for a collision inside a
    step it is the end of that step.
    """
    r = check_exponent(r)
    icfg = icfg or IntegratorConfig()
    scfg = scfg or SolverConfig(tol=DYNAMICS_TOL)
    domain = initial.domain
    floor = icfg.gap_floor(domain.length)
    dt = icfg.dt
    nsteps = int(math.floor(icfg.t_end / dt + 1e-9))
    if icfg.t_end - nsteps * dt > 1e-9 * dt:
        nsteps += 1  # a short final step lands exactly on t_end
    t_last = initial.t + icfg.t_end
    forced = {int(round(tt / dt)) for tt in icfg.record_times if 0 <= tt <= icfg.t_end + 0.5 * dt}

    solve = _Solver(r, scfg, domain)
    rec: dict[str, list] = {k: [] for k in ("t", "Q", "P", "u", "E", "c", "smax")}
    m = np.empty(initial.n + 1)
    e = np.empty(initial.n + 1)

    termination = COMPLETED
    reason = None
    t_blow = None
    message = ""
    Q = np.array(initial.Q, dtype=float)
    P = np.array(initial.P, dtype=float)
    t = initial.t
    try:
        u = solve(Q, P, _full(guess))
    except SolverFailure as exc:
        u = None
        termination, message = SOLVER_FAILURE, str(exc)
    prev = None
    k = 0
    while u is not None:
        E, smax, gap, c = _shape(u, _nodes_checked(Q, domain), r, m, e)
        last = k == nsteps
        hit = gap < floor or smax > icfg.blowup_slope_cap
        if last or hit or k % icfg.record_every == 0 or k in forced:
            for key, val in (("t", t), ("Q", Q), ("P", P), ("u", u), ("E", E), ("c", c), ("smax", smax)):
                rec[key].append(val)
        if hit:
            termination = BLOWUP
            if smax > icfg.blowup_slope_cap:
                reason = "slope_cap"
                t_blow = _cross(prev, (t, smax), icfg.blowup_slope_cap, 1)
            else:
                reason = "gap_floor"
                t_blow = _cross(prev, (t, gap), floor, 2)
            break
        if last:
            break
        t_next = initial.t + (k + 1) * dt if k + 1 < nsteps else t_last
        try:
            Qn, Pn, u4 = _rk4(Q, P, t_next - t, solve, r, domain, u)
            un = solve(Qn, Pn, u4)
        except OrderingViolation as exc:
            termination, reason, t_blow = BLOWUP, "collision", t_next
            message = str(exc)
            break
        except SolverFailure as exc:
            termination, message = SOLVER_FAILURE, str(exc)
            break
        prev = (t, smax, gap)
        Q, P, u, t = Qn, Pn, un, t_next
        k += 1

    n = initial.n
    t_rec = np.array(rec["t"], dtype=float)
    u_rec = np.array(rec["u"]).reshape(-1, n + 2)
    Q_rec = np.array(rec["Q"]).reshape(-1, n)
    spread = np.full(t_rec.size, np.nan)
    value = np.full(t_rec.size, np.nan)
    if t_rec.size >= 3:
        ends = np.ones((t_rec.size, 1))
        nodes = np.hstack([domain.a * ends, Q_rec, domain.b * ends])
        w = weak_terms(t_rec, np.diff(u_rec, axis=1) / np.diff(nodes, axis=1), r)
        spread = w.max(axis=1) - w.min(axis=1)
        value = np.median(w, axis=1)
    stats = solve.stats()
    stats["steps"] = k
    return Trajectory(
        r=r,
        domain=domain,
        t=t_rec,
        Q=Q_rec,
        P=np.array(rec["P"]).reshape(-1, n),
        u=u_rec,
        energy=np.array(rec["E"], dtype=float),
        c_spread=spread,
        c_value=value,
        c_exact=np.array(rec["c"], dtype=float),
        max_slope=np.array(rec["smax"], dtype=float),
        termination=termination,
        blowup_time=t_blow,
        blowup_reason=reason,
        message=message,
        stats=stats,
    )


def _cross(prev, cur, level, idx):
    """Time at which a quantity crosses ``level`` between two steps (linear)."""
    t1, v1 = cur
    if prev is None:
        return t1
    t0, v0 = prev[0], prev[idx]
    if v1 == v0:
        return t1
    return t0 + (t1 - t0) * (level - v0) / (v1 - v0)


def energy_drift(traj: Trajectory, mask=None) -> float:
    """``max_k |E_k - E_0| / max(E_0, tiny)`` over the (optionally masked) samples."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    E = traj.energy if mask is None else traj.energy[np.asarray(mask)]
    if E.size == 0:
        raise ValueError("mask selects no samples")
    E0 = traj.energy[0]
    return float(np.max(np.abs(E - E0)) / max(E0, np.finfo(float).tiny))
