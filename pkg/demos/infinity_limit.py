"""One-point curves approaching the r = infinity tent profile z min(Q, 1 - Q)."""

from __future__ import annotations

import numpy as np

from rhs_lab.analytic import InfinityOnePoint, infinity_slope
from rhs_lab.diagnostics import infinity_convergence_sweep

sweep = infinity_convergence_sweep(0.1, 0.1, range(2, 21, 2))
print(f"z = {sweep.z}")
for row in sweep.rows:
    print(f"r = {row.r:2d}  max deviation {row.deviation:.4f}  at Q = 1/2 {row.at_half:.4f}")
limit = InfinityOnePoint(infinity_slope(0.1, 0.1), 0.1)
ts = np.array([0.0, 1.0, 5.0, 10.0, 50.0])
print("limit gap 1 - Q(t):", ", ".join(f"t={t:g}: {g:.3e}" for t, g in zip(ts, limit.gap(ts))))
