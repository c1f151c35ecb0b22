"""1D reaction-diffusion integrator with no-flux boundaries."""

from .grid import Field, Grid1D
from .kernels import get_backend
from .mms import (
    ConvergenceStudy,
    manufactured_solution,
    spatial_order_study,
    temporal_order_study,
)
from .solver import (
    SimConfig,
    Trajectory,
    build_initial_field,
    discrete_laplacian,
    integrate,
    mass_integral,
    stable_dt,
    steady_state_residual,
    step_explicit,
    step_imex,
)

__all__ = [
    "ConvergenceStudy",
    "Field",
    "Grid1D",
    "SimConfig",
    "Trajectory",
    "build_initial_field",
    "discrete_laplacian",
    "get_backend",
    "integrate",
    "manufactured_solution",
    "mass_integral",
    "spatial_order_study",
    "stable_dt",
    "steady_state_residual",
    "step_explicit",
    "step_imex",
    "temporal_order_study",
]
