"""Blow-up time of the one-point and sine scenarios as r grows."""

from __future__ import annotations

import math

import numpy as np

from rhs_lab.analytic import lagrangian_blowup
from rhs_lab.diagnostics import blowup_scaling_sweep
from rhs_lab.scenarios import BUILTIN

R_LIST = range(2, 21, 2)

sweep = blowup_scaling_sweep(BUILTIN["one_point"], R_LIST)
print(" r   particle t_b   reason      classical sine T   Lagrangian estimate")
for row in sweep.rows:
    est = lagrangian_blowup(lambda x: np.sin(2 * np.pi * x), row.r)
    print(f"{row.r:2d}   {row.blowup_time:12.4f}   {row.reason or '-':10s}  {row.r / (2 * math.pi):16.5f}"
          f"   {est.time:.5f}")
print(f"strictly increasing: {sweep.increasing}, slope {sweep.slope:.3f} per unit r")
