"""Acceptance suite: one test group per numbered criterion.

Every measured value is printed, and the terminal summary shows one
PASS/FAIL line per criterion.  Parts that are known not to hold are marked
xfail (strict) and still reported as FAIL in the summary.
"""

import math
import time

import numpy as np
import pytest

from conftest import record
from rhs_lab.analytic import (
    CharacteristicSolution,
    InfinityOnePoint,
    OnePointModel,
    classical_evaluate,
    classical_residual,
    eulerian_solve,
    infinity_slope,
    lagrangian_blowup,
    onepoint_position,
    onepoint_velocity,
    symmetry_residual,
)
from rhs_lab.core import ParticleState
from rhs_lab.diagnostics import (
    blowup_scaling_sweep,
    brute_force_velocity,
    infinity_convergence_sweep,
    r2_equivalence_check,
    weak_constant_check,
)
from rhs_lab.dynamics import BLOWUP, IntegratorConfig, energy_drift, integrate, rk4_step
from rhs_lab.scenarios import BUILTIN
from rhs_lab.solver import solve_velocity

SCENARIOS = ("one_point", "symmetric", "chasing", "asymmetric", "smooth_sine")
R_SET = (2, 4, 8)
_RUNS = {}


def run(name, r, dt=1e-3):
    """Scenario trajectory recorded at every step (cached across criteria)."""
    key = (name, r, dt)
    if key not in _RUNS:
        sc = BUILTIN[name]
        st, vel = sc.initial(r)
        _RUNS[key] = integrate(st, r, IntegratorConfig(dt=dt, t_end=sc.t_end, record_every=1), guess=vel.interior)
    return _RUNS[key]


def away_from_blowup(traj):
    end = traj.blowup_time if traj.termination == BLOWUP else traj.t[-1]
    return traj.t <= 0.5 * end


def sine(r):
    return CharacteristicSolution(lambda x: np.sin(2 * np.pi * x), lambda x: 2 * np.pi * np.cos(2 * np.pi * x), r)


# -- 1 -----------------------------------------------------------------------------


def test_c1_solver_oracle():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 5))
        r = int(rng.choice([2, 4, 6]))
        Q = np.sort(rng.uniform(0, 1, n))
        P = rng.uniform(-2, 2, n)
        vel, _ = solve_velocity(P, Q, r)
        worst = max(worst, float(np.max(np.abs(vel.interior - brute_force_velocity(P, Q, r)))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 60
    record(1, "Newton solve vs brute-force convex minimiser", "50 instances", ok,
           f"max |diff| = {worst:.2e} (tol 1e-6), {elapsed:.1f} s (limit 60 s)")
    assert ok


# -- 2 -----------------------------------------------------------------------------


@pytest.mark.parametrize("r", R_SET)
@pytest.mark.parametrize("name", SCENARIOS)
def test_c2_energy_conservation(name, r):
    traj = run(name, r)
    mask = traj.before(1e2)
    drift = energy_drift(traj, mask)
    ok = drift <= 1e-6
    record(2, "energy drift <= 1e-6 while max|s| <= 100 (dt = 1e-3)", f"{name} r={r}", ok,
           f"drift {drift:.2e} over t <= {traj.t[mask][-1]:.3f}")
    assert ok


# -- 3 -----------------------------------------------------------------------------

WEAK_KNOWN_FAIL = {("smooth_sine", 4), ("smooth_sine", 8)}


def _weak_cases():
    for name in SCENARIOS:
        for r in R_SET:
            marks = ()
            if (name, r) in WEAK_KNOWN_FAIL:
                marks = pytest.mark.xfail(strict=True, reason=(
                    "an interval slope of the sine data passes through zero; there the exact c(t) dips over "
                    "about two steps, which sample differencing cannot resolve"))
            yield pytest.param(name, r, marks=marks, id=f"{name}-r{r}")


@pytest.mark.parametrize("name,r", list(_weak_cases()))
def test_c3_weak_form_spread(name, r):
    traj = run(name, r)
    rep = weak_constant_check(traj)
    mask = away_from_blowup(traj)
    val = rep.max_relative(mask)
    ok = val <= 1e-4
    record(3, "weak-form spread <= 1e-4 max(1,|c|) away from blow-up, 4th-order refinement", f"{name} r={r}", ok,
           f"max spread/max(1,|c|) = {val:.2e} on t <= {traj.t[mask][-1]:.3f}")
    assert ok


@pytest.mark.parametrize("r", R_SET)
@pytest.mark.parametrize("name", SCENARIOS)
def test_c3_refinement_order(name, r):
    if (name, r) in WEAK_KNOWN_FAIL:
        pytest.skip("no convergent spread to refine (see the spread test)")
    vals = []
    for dt in (4e-3, 2e-3):
        traj = run(name, r, dt)
        vals.append(weak_constant_check(traj).max_relative(away_from_blowup(traj)))
    if vals[1] < 1e-9:
        record(3, "", f"order {name} r={r}", True, f"spread {vals[1]:.1e} at the rounding floor, order not measurable")
        return
    ratio = vals[0] / vals[1]
    ok = 12.8 <= ratio <= 19.2
    record(3, "", f"order {name} r={r}", ok, f"dt 4e-3 -> 2e-3 ratio {ratio:.1f} (16 +- 20%)")
    assert ok


# -- 4 -----------------------------------------------------------------------------


def test_c4_r2_equivalence():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 7))
        Q = np.sort(rng.uniform(0.01, 0.99, n))
        if np.min(np.diff(np.concatenate(([0.0], Q, [1.0])))) < 1e-3:
            Q = (np.arange(n) + 1) / (n + 1)
        P = rng.uniform(-2, 2, n)
        vel, _ = solve_velocity(P, Q, 2)
        s = np.diff(vel.u) / np.diff(vel.nodes)
        scale = max(1.0, float(np.max(np.abs(P))) * float(np.max(np.abs(s))))
        worst = max(worst, r2_equivalence_check(ParticleState(Q, P), vel) / scale)
    ok = worst <= 1e-13
    record(4, "r = 2 momentum equations agree", "100 solved states", ok, f"max scaled diff {worst:.2e} (tol 1e-13)")
    assert ok


# -- 5 -----------------------------------------------------------------------------


def test_c5_one_point_closed_form():
    traj = run("one_point", 2)
    mask = traj.before(1e3)
    model = OnePointModel.from_state(0.1, 0.1, 2)
    err = float(np.max(np.abs(traj.u[mask, 1] - onepoint_velocity(traj.Q[mask, 0], model))))
    half = onepoint_velocity(0.5, model)
    ok = err <= 1e-6 and abs(half - 1 / 6) <= 1e-12
    record(5, "one-point trajectory on the energy curve", "(0.1, 0.1) r=2", ok,
           f"max |u - u_hat(Q)| = {err:.2e} over {mask.sum()} samples (tol 1e-6); u_hat(0.5) = {half:.12f}")
    assert ok


# -- 6 -----------------------------------------------------------------------------


@pytest.mark.parametrize("r", R_SET)
def test_c6_classical_blowup(r):
    est = lagrangian_blowup(lambda x: np.sin(2 * np.pi * x), r)
    T = r / (2 * math.pi)
    rel = abs(est.time / T - 1)
    ok = rel <= 0.10
    record(6, "blow-up time formula and increasing particle blow-up", f"sine classical r={r}", ok,
           f"estimate {est.time:.5f} vs T = {T:.5f} (rel {rel:.1e}, tol 0.10)")
    assert ok


def test_c6_particle_blowup_increasing():
    sweep = blowup_scaling_sweep(BUILTIN["one_point"], range(2, 21, 2))
    times = [row.blowup_time for row in sweep.rows]
    ok = sweep.increasing
    record(6, "", "one-point sweep r=2..20", ok,
           "t_blowup = " + ", ".join(f"{t:.3f}" for t in times) + f"; slope {sweep.slope:.3f} per unit r")
    assert ok


# -- 7 -----------------------------------------------------------------------------


def test_c7_characteristics_vs_pde():
    cs = sine(4)
    u_char = classical_evaluate(cs, 0.25, 0.1)
    x, u = eulerian_solve(cs.u0, cs.du0, 4, 0.1, n=10_000)
    u_pde = float(np.interp(0.25, x, u))
    diff = abs(u_char - u_pde)
    ok = diff <= 1e-4
    record(7, "characteristics vs method of lines; rHS2 residual x-independent", "u(0.25, 0.1) r=4", ok,
           f"|characteristics - MOL| = {diff:.2e} (tol 1e-4)")
    assert ok


def test_c7_residual_x_independent():
    cs = sine(4)
    xs = np.linspace(0.1, 0.4, 7)
    spreads = [float(np.ptp(classical_residual(cs, xs, 0.1, h))) for h in (0.02, 0.01, 0.005)]
    ratios = [spreads[i] / spreads[i + 1] for i in range(2)]
    ok = all(12.8 <= q <= 19.2 for q in ratios)
    record(7, "", "residual spread order", ok,
           "spread " + ", ".join(f"{s:.2e}" for s in spreads) + " ratios " + ", ".join(f"{q:.1f}" for q in ratios))
    assert ok


# -- 8 -----------------------------------------------------------------------------


def test_c8_infinity_limit():
    sweep = infinity_convergence_sweep(0.1, 0.1, range(2, 21, 2))
    limit = InfinityOnePoint(infinity_slope(0.1, 0.1), 0.1)
    gap = float(np.min(limit.gap(np.linspace(0.0, 50.0, 50_001))))
    ok = sweep.monotone and gap > 0
    record(8, "r -> infinity one-point limit", "deviation and limit", ok,
           "deviation " + ", ".join(f"{d:.4f}" for d in sweep.deviations)
           + f"; min 1 - Q_inf(t) on [0, 50] = {gap:.2e}")
    assert ok


# -- 9 -----------------------------------------------------------------------------

SYM_CASES = {"X1": (0.7,), "X2": (0.0, 1.0), "X3": (0.3,), "X6": (1.0, 1.0)}


@pytest.mark.parametrize("r", R_SET)
@pytest.mark.parametrize("family", sorted(SYM_CASES))
def test_c9_symmetry_order(family, r):
    res = [symmetry_residual(family, SYM_CASES[family], r, h=h) for h in (0.1, 0.05, 0.025)]
    if family == "X1":
        # exact solution: only rounding remains, no order to measure
        ok = max(res) < 1e-10
        detail = f"residual {max(res):.1e} (exact, rounding only)"
    else:
        ratios = [res[i] / res[i + 1] for i in range(2)]
        ok = all(12.8 <= q <= 19.2 for q in ratios)
        detail = "ratios " + ", ".join(f"{q:.1f}" for q in ratios)
    record(9, "symmetry solutions: 4th-order residuals, < 1e-8 at h = 1e-3", f"{family} r={r} order", ok, detail)
    assert ok


@pytest.mark.parametrize("family", sorted(SYM_CASES))
def test_c9_symmetry_small(family):
    res = symmetry_residual(family, SYM_CASES[family], 2, h=1e-3)
    ok = res < 1e-8
    record(9, "", f"{family} r=2 h=1e-3", ok, f"residual {res:.2e} (tol 1e-8)")
    assert ok


# -- 10 ----------------------------------------------------------------------------


@pytest.mark.parametrize("r", [2, 4])
def test_c10_rk4_order(r):
    st, _ = BUILTIN["one_point"].initial(r)
    model = OnePointModel.from_state(0.1, 0.1, r)
    exact = onepoint_position(4.0, 0.1, model)
    errs = []
    for dt in (0.04, 0.02, 0.01, 0.005):
        x = st
        for _ in range(round(4.0 / dt)):
            x = rk4_step(x, r, dt)
        errs.append(abs(x.Q[0] - exact))
    ratios = [errs[i] / errs[i + 1] for i in range(3)]
    ok = all(12.8 <= q <= 19.2 for q in ratios)
    record(10, "RK4 error ratio 16 +- 20% under dt halving", f"one point r={r} at t=4", ok,
           "errors " + ", ".join(f"{e:.2e}" for e in errs) + "; ratios " + ", ".join(f"{q:.2f}" for q in ratios))
    assert ok
