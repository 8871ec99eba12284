"""Named initial data for runs and sweeps.

Point scenarios list ``(q, u_hat)`` pairs; the momenta follow from the
chosen exponent.  ``smooth_sine`` interpolates ``sin(2 pi x)`` on 101 nodes.
Custom scenarios take either pairs or a u0 expression in ``x``.
"""

from __future__ import annotations

import ast
from collections.abc import Callable
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Domain1D, ParticleState, VelocityProfile, check_exponent, interpolate_initial, momentum_from_velocity

__all__ = [
    "BUILTIN",
    "Scenario",
    "ScenarioError",
    "compile_expression",
    "get_scenario",
    "parse_points",
]


class ScenarioError(ValueError):
    """Unknown scenario or malformed scenario data."""


@dataclass(frozen=True)
class Scenario:
    name: str
    points: tuple[tuple[float, float], ...] | None = None
    u0: Callable | None = field(default=None, compare=False)
    expression: str | None = None  # source of u0, kept for summaries
    n: int = 99
    domain: Domain1D = field(default_factory=Domain1D)
    t_end: float = 10.0

    def __post_init__(self) -> None:
        if (self.points is None) == (self.u0 is None):
            raise ScenarioError("a scenario needs exactly one of points or u0")
        if self.points is not None:
            pts = tuple((float(q), float(u)) for q, u in self.points)
            qs = [q for q, _ in pts]
            if not pts or not all(self.domain.a < q < self.domain.b for q in qs) or np.any(np.diff(qs) <= 0):
                raise ScenarioError("points must be strictly increasing inside the domain")
            object.__setattr__(self, "points", pts)
        elif self.n < 1:
            raise ScenarioError("need at least one interior node")

    @property
    def size(self) -> int:
        return len(self.points) if self.points is not None else self.n

    def initial(self, r: int) -> tuple[ParticleState, VelocityProfile]:
        """Initial state and its (exact) velocity profile for exponent ``r``."""
        r = check_exponent(r)
        if self.points is None:
            return interpolate_initial(self.u0, self.n, self.domain, r)
        Q = np.array([q for q, _ in self.points])
        vel = VelocityProfile.from_interior([u for _, u in self.points],
                                            np.concatenate(([self.domain.a], Q, [self.domain.b])))
        P = momentum_from_velocity(ParticleState(Q, np.zeros(Q.size), self.domain), vel, r)
        return ParticleState(Q, P, self.domain), vel

    def with_t_end(self, t_end: float) -> Scenario:
        return replace(self, t_end=float(t_end))


def _sine(x):
    return np.sin(2 * np.pi * np.asarray(x, dtype=float))


BUILTIN: dict[str, Scenario] = {
    "one_point": Scenario("one_point", points=((0.1, 0.1),), t_end=10.0),
    "symmetric": Scenario("symmetric", points=((0.1, 0.1), (0.9, -0.1)), t_end=10.0),
    "chasing": Scenario("chasing", points=((0.1, 0.2), (0.2, 0.1)), t_end=6.0),
    "asymmetric": Scenario("asymmetric", points=((0.1, 0.2), (0.2, -0.125)), t_end=3.0),
    "smooth_sine": Scenario("smooth_sine", u0=_sine, expression="sin(2*pi*x)", n=99, t_end=4.0),
}


# -- custom data ---------------------------------------------------------------

_FUNCS = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "sinh", "cosh", "tanh",
                 "arctan", "minimum", "maximum", "sign")
}
_CONSTS = {"pi": np.pi, "e": np.e}
_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Constant, ast.Load,
          ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd)


def compile_expression(text: str) -> Callable:
    """Turn an arithmetic expression in ``x`` into a vectorised function.

    Only numbers, ``x``, ``pi``, ``e``, arithmetic operators and a fixed set of
    numpy functions are accepted; anything else is rejected before evaluation.
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ScenarioError(f"cannot parse u0 expression {text!r}: {exc.msg}") from None
    for node in ast.walk(tree):
        if not isinstance(node, _NODES):
            raise ScenarioError(f"disallowed syntax in u0 expression: {type(node).__name__}")
        if isinstance(node, ast.Name) and node.id not in _FUNCS and node.id not in _CONSTS and node.id != "x":
            raise ScenarioError(f"unknown name {node.id!r} in u0 expression")
        if isinstance(node, ast.Call) and not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS):
            raise ScenarioError("only whitelisted functions may be called")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ScenarioError("only numeric constants are allowed")
    code = compile(tree, "<u0>", "eval")

    def u0(x):
        x = np.asarray(x, dtype=float)
        val = eval(code, {"__builtins__": {}}, {**_FUNCS, **_CONSTS, "x": x})  # noqa: S307 - validated above
        return np.broadcast_to(np.asarray(val, dtype=float), x.shape).copy()

    return u0


def parse_points(text: str) -> tuple[tuple[float, float], ...]:
    """``"0.1:0.2, 0.2:-0.125"`` -> ``((0.1, 0.2), (0.2, -0.125))``."""
    pts = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            q, u = item.split(":")
            pts.append((float(q), float(u)))
        except ValueError:
            raise ScenarioError(f"bad point {item!r}; expected q:u") from None
    if not pts:
        raise ScenarioError("no points given")
    return tuple(pts)


def get_scenario(name: str, *, points: str | None = None, u0: str | None = None, n: int | None = None,
                 t_end: float | None = None) -> Scenario:
    """Built-in scenario by name, or ``custom`` from points / a u0 expression."""
    if name == "custom":
        if (points is None) == (u0 is None):
            raise ScenarioError("custom scenarios need exactly one of points or u0")
        if points is not None:
            sc = Scenario("custom", points=parse_points(points))
        else:
            sc = Scenario("custom", u0=compile_expression(u0), expression=u0, n=99 if n is None else n)
    elif name in BUILTIN:
        if points is not None or u0 is not None:
            raise ScenarioError(f"{name} has fixed initial data")
        sc = BUILTIN[name]
        if n is not None:
            if sc.points is not None:
                raise ScenarioError(f"{name} has a fixed number of points")
            sc = replace(sc, n=n)
    else:
        raise ScenarioError(f"unknown scenario {name!r}; expected one of {sorted(BUILTIN) + ['custom']}")
    return sc if t_end is None else sc.with_t_end(t_end)
