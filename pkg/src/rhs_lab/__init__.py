"""Particle solutions of the r-Hunter-Saxton equation, with analytic oracles and diagnostics."""

from .core import (
    DegenerateGeometryError,
    Domain1D,
    ParticleState,
    VelocityProfile,
    energy,
    interpolate_initial,
    momentum_from_velocity,
    slopes,
)
from .dynamics import IntegratorConfig, Trajectory, energy_drift, integrate, rhs, rk4_step, weak_constant
from .scenarios import BUILTIN, Scenario, get_scenario
from .solver import SolverConfig, SolverFailure, solve_state, solve_velocity

__all__ = [
    "BUILTIN",
    "DegenerateGeometryError",
    "Domain1D",
    "IntegratorConfig",
    "ParticleState",
    "Scenario",
    "SolverConfig",
    "SolverFailure",
    "Trajectory",
    "VelocityProfile",
    "energy",
    "energy_drift",
    "get_scenario",
    "integrate",
    "interpolate_initial",
    "momentum_from_velocity",
    "rhs",
    "rk4_step",
    "slopes",
    "solve_state",
    "solve_velocity",
    "weak_constant",
]

__version__ = "0.1.0"
