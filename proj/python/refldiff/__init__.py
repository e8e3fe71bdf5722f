"""Simulation and verification toolkit for reflecting diffusions.

The compiled core exposes scenario loading, geometry and cone queries,
the path simulators, and the Monte Carlo resolvent estimators.
"""

from ._core import (  # noqa: F401
    Scenario,
    ScenarioError,
    NotInConeError,
    NotOnBoundaryError,
    matrix_game,
    default_workers,
    builtin_scenarios,
)

__all__ = [
    "Scenario",
    "ScenarioError",
    "NotInConeError",
    "NotOnBoundaryError",
    "matrix_game",
    "default_workers",
    "builtin_scenarios",
]
