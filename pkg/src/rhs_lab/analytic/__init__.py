"""Closed-form and semi-analytic references for the particle system."""

from .characteristics import (
    BlowupExceededError,
    CharacteristicSolution,
    DomainError,
    binomial_map,
    blowup_time,
    characteristic_map,
    classical_evaluate,
    classical_residual,
)
from .infinity import InfinityOnePoint, infinity_onepoint_trajectory, infinity_slope
from .onepoint import (
    OnePointModel,
    onepoint_asymptotic_velocity,
    onepoint_collision_time,
    onepoint_epsilon,
    onepoint_position,
    onepoint_time,
    onepoint_vanishing_time,
    onepoint_velocity,
)
from .pde import LagrangianBlowup, eulerian_solve, lagrangian_blowup
from .symmetry import FAMILIES, UnsupportedFamilyError, default_window, symmetry_residual, symmetry_solution

__all__ = [
    "FAMILIES",
    "BlowupExceededError",
    "CharacteristicSolution",
    "DomainError",
    "InfinityOnePoint",
    "LagrangianBlowup",
    "OnePointModel",
    "UnsupportedFamilyError",
    "binomial_map",
    "blowup_time",
    "characteristic_map",
    "classical_evaluate",
    "classical_residual",
    "default_window",
    "eulerian_solve",
    "infinity_onepoint_trajectory",
    "infinity_slope",
    "lagrangian_blowup",
    "onepoint_asymptotic_velocity",
    "onepoint_collision_time",
    "onepoint_epsilon",
    "onepoint_position",
    "onepoint_time",
    "onepoint_vanishing_time",
    "onepoint_velocity",
    "symmetry_residual",
    "symmetry_solution",
]
