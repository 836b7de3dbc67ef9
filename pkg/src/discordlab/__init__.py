"""Quantum discord and energy transport between two systems.

Discord and diagonal (Schmidt-basis) discord of bipartite states, the
two-qubit exchange model, short-time heat-flow/discord checks, and a
reduction of transient surface-temperature traces to a discord-production
rate.
"""

__version__ = "0.1.0"

from .correlations import (
    DiscordReport,
    OptimizerOptions,
    ProjectiveMeasurement,
    diagonal_discord,
    discord,
    measure,
    mutual_information,
    schmidt_basis,
)
from .states import (
    DensityMatrix,
    HermitianOperator,
    ThermalSpec,
    energy,
    thermal_state,
    von_neumann_entropy,
)

__all__ = [
    "DensityMatrix",
    "DiscordReport",
    "HermitianOperator",
    "OptimizerOptions",
    "ProjectiveMeasurement",
    "ThermalSpec",
    "diagonal_discord",
    "discord",
    "energy",
    "measure",
    "mutual_information",
    "schmidt_basis",
    "thermal_state",
    "von_neumann_entropy",
]
