"""Integrate a single particle and compare it with its energy curve.

    python3 demos/one_point_energy_curve.py [r]
"""

from __future__ import annotations

import sys

import numpy as np

from rhs_lab.analytic import OnePointModel, onepoint_collision_time, onepoint_velocity
from rhs_lab.dynamics import IntegratorConfig, integrate
from rhs_lab.scenarios import BUILTIN


def main(r: int = 2) -> None:
    state, vel = BUILTIN["one_point"].initial(r)
    traj = integrate(state, r, IntegratorConfig(dt=1e-3, t_end=20.0, record_every=250), guess=vel.interior)
    model = OnePointModel.from_state(0.1, 0.1, r)
    print(f"r = {r}  E = {model.E:.6g}  collision time {onepoint_collision_time(0.1, model):.5f}")
    print(f"run ended by {traj.termination} at t = {traj.t[-1]:.4f}")
    print(f"{'t':>8} {'Q':>12} {'u_hat':>12} {'energy curve':>14} {'diff':>10}")
    for t, q, u in zip(traj.t, traj.Q[:, 0], traj.u[:, 1]):
        ref = onepoint_velocity(q, model)
        print(f"{t:8.3f} {q:12.8f} {u:12.8f} {ref:14.8f} {abs(u - ref):10.2e}")
    print("max |diff|:", float(np.max(np.abs(traj.u[:, 1] - onepoint_velocity(traj.Q[:, 0], model)))))


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 2)
