"""Closed-form invariant solutions from the Lie point symmetries.

``X1``: ``u = c1`` (constant).
``X2``: ``u = f(x)`` with ``f_x^2 + r f f_xx = 0``, ``f = c2 ((1+r) x - r c1)^(r/(1+r))``.
``X3``: ``u = x/t + f(t)``.  This solves the rHS2 form with
``c(t) = (1/r - 1) t^(-r)``, not the Cauchy problem with ``c = 0``.
``X6``: ``u = f(xi)``, ``xi = t x^(-1/r)``, with ``f`` solving the reduced
ODE ``-xi f ((4 + 3r - r^2) f' + r xi f'') + (r^2 - 4) f^2 - xi^2 f'^2 = 0``.

Residuals are taken with 4th-order central differences.  ``X4`` has no
known solution and ``X5`` needs an inverse hypergeometric function; both
report as unsupported.
"""

from __future__ import annotations

from collections.abc import Callable

import numpy as np

from ..core import check_exponent
from .characteristics import DomainError
from .differences import d1, d2, rhs2_lhs

__all__ = [
    "FAMILIES",
    "UnsupportedFamilyError",
    "default_window",
    "symmetry_residual",
    "symmetry_solution",
]

FAMILIES = ("X1", "X2", "X3", "X6")


class UnsupportedFamilyError(NotImplementedError):
    pass


def _family(name: str) -> str:
    name = name.upper()
    if name in ("X4", "X5"):
        raise UnsupportedFamilyError(f"{name}: no closed form is implemented for this reduction")
    if name not in FAMILIES:
        raise ValueError(f"unknown family {name!r}; expected one of {FAMILIES}")
    return name


def symmetry_solution(family: str, constants=(1.0, 1.0), r: int = 2, *, f: Callable | None = None) -> Callable:
    """Closed form of an invariant solution.

    ``X1`` and ``X3`` return ``u(x, t)``; ``X2`` returns ``f(x)`` and ``X6``
    returns ``f(xi)``.  ``constants`` is ``(c1, c2)`` (``X1`` uses c1 only);
    ``X3`` takes ``f(t)`` through ``f`` and defaults to ``f = c1``.
    Points where a fractional power would go complex raise ``DomainError``.
    """
    family = _family(family)
    r = check_exponent(r)
    c1, c2 = (tuple(constants) + (1.0,))[:2]

    if family == "X1":
        return lambda x, t: np.full(np.broadcast(np.asarray(x), np.asarray(t)).shape, float(c1))

    if family == "X2":
        def f2(x):
            base = (1 + r) * np.asarray(x, dtype=float) - r * c1
            if np.any(base <= 0):
                raise DomainError("X2 needs (1 + r) x > r c1")
            return c2 * base ** (r / (1 + r))
        return f2

    if family == "X3":
        shift = f if f is not None else (lambda t: c1)

        def u3(x, t):
            if np.any(np.asarray(t) <= 0):
                raise DomainError("X3 needs t > 0")
            return np.asarray(x, dtype=float) / t + shift(t)
        return u3

    def f6(xi):
        xi = np.asarray(xi, dtype=float)
        inner = c1 + xi**r
        if np.any(xi <= 0) or np.any(inner <= 0):
            raise DomainError("X6 needs xi > 0 and c1 + xi^r > 0")
        return c2 * np.exp((2 * r * np.log(inner) - (2 * r + 4) * np.log(xi)) / (2 * (r + 1)))
    return f6


def default_window(family: str) -> dict:
    """Sample grid inside the validity window used by the checks."""
    family = _family(family)
    if family == "X1":
        return {"x": np.linspace(0.0, 1.0, 11), "t": (0.5, 1.0)}
    if family == "X2":
        return {"x": np.linspace(0.5, 2.0, 31)}
    if family == "X3":
        return {"x": np.linspace(0.0, 1.0, 11), "t": (0.5, 1.0)}
    return {"x": np.linspace(0.5, 2.0, 31)}


def symmetry_residual(family: str, constants=(1.0, 1.0), r: int = 2, h: float = 1e-3,
                      window: dict | None = None, *, f: Callable | None = None) -> float:
    """Max absolute residual of the family's equation on ``window``.

    ``X1``, ``X3``: rHS2 left side minus its ``c(t)`` (0 and
    ``(1/r - 1) t^(-r)``) over the ``x`` samples at each ``t``.
    ``X2``: ``f_x^2 + r f f_xx``.  ``X6``: the reduced ODE in ``xi``.
    """
    family = _family(family)
    r = check_exponent(r)
    window = window or default_window(family)
    sol = symmetry_solution(family, constants, r, f=f)
    x = np.asarray(window["x"], dtype=float)

    if family in ("X1", "X3"):
        worst = 0.0
        for t in window["t"]:
            c = 0.0 if family == "X1" else (1.0 / r - 1.0) * t ** (-r)
            worst = max(worst, float(np.max(np.abs(rhs2_lhs(sol, x, t, r, h) - c))))
        return worst

    fx, fxx, fv = d1(sol, x, h), d2(sol, x, h), sol(x)
    if family == "X2":
        res = fx**2 + r * fv * fxx
    else:
        res = -x * fv * ((-(r**2) + 3 * r + 4) * fx + x * r * fxx) + (r**2 - 4) * fv**2 - x**2 * fx**2
    return float(np.max(np.abs(res)))
