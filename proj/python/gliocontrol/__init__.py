"""Forward, adjoint and optimal-control solvers for the glioma virotherapy model.

Fields are numpy arrays shaped like ``Grid.shape``; time series stack them
along a leading axis. Controls accept a scalar, one field, or ``steps`` fields.
"""

from ._core import (
    ConfigError,
    Grid,
    IterationError,
    ModelParams,
    Objective,
    SolverError,
    chronic_tracking,
    objective_and_gradient,
    optimize,
    run_config,
    simulate,
    terminal_mass,
    terminal_mass_dose,
)

__all__ = [
    "ConfigError",
    "Grid",
    "IterationError",
    "ModelParams",
    "Objective",
    "SolverError",
    "chronic_tracking",
    "objective_and_gradient",
    "optimize",
    "run_config",
    "simulate",
    "terminal_mass",
    "terminal_mass_dose",
]
