"""Lattice gas hydrodynamics: transport coefficients, boundary-driven
simulation, and large-deviation rate functionals."""

from ._latgas import (
    __version__,
    coefficients,
    current_rate,
    free_energy,
    phase_table,
    quasipotential_gap,
    solve_heat,
    stationary_stats,
)

__all__ = [
    "__version__",
    "coefficients",
    "current_rate",
    "free_energy",
    "phase_table",
    "quasipotential_gap",
    "solve_heat",
    "stationary_stats",
]
