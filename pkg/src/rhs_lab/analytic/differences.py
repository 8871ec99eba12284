"""Fourth-order central differences and the pointwise rHS2 residual."""

from __future__ import annotations

import numpy as np


def d1(f, x, h: float):
    """``f'(x)`` by the five-point central formula (error O(h^4))."""
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def d2(f, x, h: float):
    """``f''(x)`` by the five-point central formula (error O(h^4))."""
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


def rhs2_lhs(u, x, t: float, r: int, h: float):
    """``|u_x|^(r-2) u_xt + |u_x|^r / r + |u_x|^(r-2) u_xx u`` at ``(x, t)``.

    ``u(x, t)`` must accept an array ``x``.  Along a solution this equals an
    x-independent ``c(t)``; for the Cauchy problem ``c = 0``.
    """
    x = np.asarray(x, dtype=float)

    def ux_at(tt):
        return d1(lambda y: u(y, tt), x, h)

    ux = ux_at(t)
    uxx = d2(lambda y: u(y, t), x, h)
    uxt = d1(ux_at, t, h)
    w = np.abs(ux) ** (r - 2)
    return w * uxt + np.abs(ux) ** r / r + w * uxx * u(x, t)
