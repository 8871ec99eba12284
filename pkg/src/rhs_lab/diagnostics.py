"""Checks tying particle trajectories to the PDE theory.

Every diagnostic is read-only over its trajectories.  Sweeps run one
integration per exponent on a thread pool; ``RHS_LAB_THREADS`` caps the pool.
"""

from __future__ import annotations

import os
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .analytic import OnePointModel, infinity_slope, onepoint_velocity
from .core import Domain1D, ParticleState, VelocityProfile, check_exponent, slopes
from .dynamics import BLOWUP, IntegratorConfig, Trajectory, energy_drift, integrate, momentum_rate, weak_terms
from .scenarios import Scenario

__all__ = [
    "TOL_WEAK",
    "BlowupRow",
    "BlowupSweep",
    "InfinityRow",
    "InfinitySweep",
    "InsufficientDataError",
    "MisuseError",
    "WeakFormReport",
    "blowup_scaling_sweep",
    "brute_force_velocity",
    "default_workers",
    "infinity_convergence_sweep",
    "r2_equivalence_check",
    "weak_constant_check",
]

TOL_WEAK = 1e-4


class InsufficientDataError(ValueError):
    pass


class MisuseError(ValueError):
    pass


def default_workers(jobs: int) -> int:
    """Thread count for a sweep of ``jobs`` runs, capped by ``RHS_LAB_THREADS``."""
    cap = os.environ.get("RHS_LAB_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise MisuseError(f"RHS_LAB_THREADS must be a positive integer, got {cap!r}") from None
    return max(1, min(jobs, limit))


def _pool_map(fn, items, max_workers):
    items = list(items)
    workers = max_workers or default_workers(len(items))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- weak form -----------------------------------------------------------------


@dataclass
class WeakFormReport:
    t: np.ndarray
    w: np.ndarray  # (samples, intervals)
    spread: np.ndarray
    c_estimate: np.ndarray
    energy_drift: float

    @property
    def relative_spread(self) -> np.ndarray:
        return self.spread / np.maximum(1.0, np.abs(self.c_estimate))

    def max_relative(self, mask=None) -> float:
        rel = self.relative_spread if mask is None else self.relative_spread[np.asarray(mask)]
        return float(np.max(rel)) if rel.size else 0.0

    def passes(self, tol: float = TOL_WEAK, mask=None) -> bool:
        return self.max_relative(mask) <= tol


def weak_constant_check(traj: Trajectory, r: int | None = None) -> WeakFormReport:
    """Per-interval ``w_i = d/dt s_i^(r-1) + (r-1)/r |s_i|^r`` and their spread.

    The derivative is differenced over the recorded samples (five-point
    stencils), so record every step for a meaningful check.
    """
    r = traj.r if r is None else check_exponent(r)
    if r != traj.r:
        raise MisuseError(f"trajectory was integrated with r = {traj.r}, not {r}")
    if len(traj) < 3:
        raise InsufficientDataError(f"need at least 3 samples, got {len(traj)}")
    w = weak_terms(traj.t, traj.slopes(), r)
    return WeakFormReport(
        t=traj.t.copy(),
        w=w,
        spread=w.max(axis=1) - w.min(axis=1),
        c_estimate=np.median(w, axis=1),
        energy_drift=energy_drift(traj),
    )


# -- r = 2 ---------------------------------------------------------------------


def r2_equivalence_check(state: ParticleState, vel: VelocityProfile, r: int = 2) -> float:
    """``max_i |dP_i/dt - (-P_i (s_{i-1} + s_i) / 2)|`` on a solved state."""
    if r != 2:
        raise MisuseError("the averaged-slope form of dP/dt only holds for r = 2")
    s = slopes(state, vel)
    general = momentum_rate(vel.u, vel.nodes, 2)
    averaged = -np.asarray(state.P) * (s[:-1] + s[1:]) / 2
    return float(np.max(np.abs(general - averaged)))


# -- solver oracle -------------------------------------------------------------


def brute_force_velocity(P, Q, r: int, domain: Domain1D | None = None) -> np.ndarray:
    """Interior velocities by generic quasi-Newton minimisation of the convex
    ``sum dQ |s|^r / r - P.u``, sharing no code with the Newton solver."""
    r = check_exponent(r)
    domain = domain or Domain1D()
    P = np.asarray(P, dtype=float)
    nodes = np.concatenate(([domain.a], np.asarray(Q, dtype=float), [domain.b]))
    dq = np.diff(nodes)

    def phi(u):
        s = np.diff(np.concatenate(([0.0], u, [0.0]))) / dq
        m = np.abs(s) ** (r - 2) * s
        return np.sum(dq * np.abs(s) ** r) / r - P @ u, m[:-1] - m[1:] - P

    res = optimize.minimize(phi, np.zeros(P.size), jac=True, method="BFGS",
                            options={"gtol": 1e-13, "maxiter": 20_000})
    return res.x


# -- blow-up scaling -----------------------------------------------------------


@dataclass
class BlowupRow:
    r: int
    blowup_time: float | None  # None: completed without blow-up
    reason: str | None
    energy_drift: float
    termination: str

    @property
    def blew_up(self) -> bool:
        return self.blowup_time is not None


@dataclass
class BlowupSweep:
    rows: list[BlowupRow]
    slope: float | None  # least-squares d t_blowup / d r over the rows that blew up

    @property
    def increasing(self) -> bool:
        times = [row.blowup_time for row in self.rows if row.blew_up]
        return len(times) == len(self.rows) and bool(np.all(np.diff(times) > 0))


ScenarioLike = Scenario | Callable[[int], tuple[ParticleState, VelocityProfile | None]]


def _initial(scenario: ScenarioLike, r: int):
    if isinstance(scenario, Scenario):
        return scenario.initial(r)
    return scenario(r)


def _default_config(scenario: ScenarioLike) -> IntegratorConfig:
    t_end = 60.0 if not isinstance(scenario, Scenario) else max(scenario.t_end, 60.0)
    return IntegratorConfig(dt=1e-3, t_end=t_end, record_every=10)


def blowup_scaling_sweep(scenario: ScenarioLike, r_list: Sequence[int], *, icfg: IntegratorConfig | None = None,
                         max_workers: int | None = None) -> BlowupSweep:
    """Blow-up time for each r (interpolated crossing of the slope cap or gap
    floor); runs that reach ``t_end`` are marked as non-blowup."""
    r_list = sorted(check_exponent(r) for r in r_list)
    if not r_list:
        raise MisuseError("empty r list")
    icfg = icfg or _default_config(scenario)

    def run(r):
        state, vel = _initial(scenario, r)
        traj = integrate(state, r, icfg, guess=None if vel is None else vel.interior)
        hit = traj.termination == BLOWUP
        return BlowupRow(r, traj.blowup_time if hit else None, traj.blowup_reason,
                         energy_drift(traj), traj.termination)

    rows = _pool_map(run, r_list, max_workers)
    pts = [(row.r, row.blowup_time) for row in rows if row.blew_up]
    slope = float(np.polyfit(*zip(*pts), 1)[0]) if len(pts) >= 2 else None
    return BlowupSweep(rows, slope)


# -- r -> infinity -------------------------------------------------------------


@dataclass
class InfinityRow:
    r: int
    deviation: float  # max over pre-blow-up samples of |u_r - z min(Q, 1 - Q)|
    at_half: float  # closed form |u_r(1/2) - z/2| on the run's energy level
    energy_drift: float
    blowup_time: float | None
    samples: int


@dataclass
class InfinitySweep:
    z: float
    rows: list[InfinityRow] = field(default_factory=list)

    @property
    def deviations(self) -> np.ndarray:
        return np.array([row.deviation for row in self.rows])

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.deviations) < 0))


def infinity_convergence_sweep(q0: float, u0: float, r_list: Sequence[int], t_grid=None, *,
                               dt: float = 1e-3, max_workers: int | None = None) -> InfinitySweep:
    """Distance of one-point ``(Q, u_hat)`` curves from the limit ``z min(Q, 1-Q)``.

    Each run starts at ``q0`` with momentum ``z^(r-1)``, ``z`` the larger of
    the two initial slopes.  ``t_grid`` lists the sample times (default: every
    10th step up to t = 60); only samples before blow-up count.
    """
    z = infinity_slope(q0, u0)
    r_list = sorted(check_exponent(r) for r in r_list)
    if not r_list:
        raise MisuseError("empty r list")
    if t_grid is None:
        icfg = IntegratorConfig(dt=dt, t_end=60.0, record_every=10)
    else:
        grid = np.asarray(t_grid, dtype=float)
        icfg = IntegratorConfig(dt=dt, t_end=float(grid.max()), record_every=10**9, record_times=tuple(grid))

    def run(r):
        state = ParticleState([q0], [z ** (r - 1)])
        traj = integrate(state, r, icfg)
        Q, u = traj.Q[:, 0], traj.u[:, 1]
        dev = float(np.max(np.abs(u - z * np.minimum(Q, 1 - Q))))
        if z == 0:
            half = 0.0
        else:
            half = abs(onepoint_velocity(0.5, OnePointModel.from_state(q0, u[0], r)) - 0.5 * z)
        hit = traj.termination == BLOWUP
        return InfinityRow(r, dev, float(half), energy_drift(traj), traj.blowup_time if hit else None, len(traj))

    return InfinitySweep(z, _pool_map(run, r_list, max_workers))
