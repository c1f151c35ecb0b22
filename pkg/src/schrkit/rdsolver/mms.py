"""Manufactured-solution convergence studies for the diffusion stencil and
the explicit stepper.

Target solution: u(t, x) = exp(-t) * (2 + cos(pi x / L)) on [0, L], which
satisfies the no-flux boundary conditions.  A separable source
f(t, x) = exp(-t) * g(x) makes it an exact solution of
u_t = d u_xx + f, so the measured error is pure discretisation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, SolverAbortError
from . import kernels
from .grid import Grid1D


def manufactured_solution(grid: Grid1D, t: float) -> np.ndarray:
    x = grid.nodes
    return math.exp(-t) * (2.0 + np.cos(np.pi * x / grid.length))


def _source_profile(grid: Grid1D, d: float) -> np.ndarray:
    x = grid.nodes
    k = np.pi / grid.length
    return -2.0 + (d * k * k - 1.0) * np.cos(k * x)


def solve_forced(grid: Grid1D, d: float, dt: float, t_end: float) -> np.ndarray:
    """Integrate the forced heat equation from the manufactured initial data."""
    u = manufactured_solution(grid, 0.0).copy()
    g = _source_profile(grid, d)
    nsteps = max(1, round(t_end / dt))
    status, _, _ = kernels.run_forced_heat(u, g, d, grid.dx, dt, nsteps, 0.0)
    if status != kernels.STATUS_OK:
        raise SolverAbortError("forced heat integration became non-finite "
                               "(dt too large for this grid?)")
    return u


def sup_error(grid: Grid1D, d: float, dt: float, t_end: float) -> float:
    u = solve_forced(grid, d, dt, t_end)
    return float(np.max(np.abs(u - manufactured_solution(grid, t_end))))


@dataclass(frozen=True)
class ConvergenceStudy:
    """Errors and observed orders for a refinement sequence."""

    kind: str                     # "spatial" | "temporal"
    levels: tuple[float, ...]     # mx values or dt values
    errors: tuple[float, ...]
    orders: tuple[float, ...]     # per consecutive level pair


def _observed_orders(errors, ratios) -> tuple[float, ...]:
    return tuple(
        math.log(errors[i] / errors[i + 1]) / math.log(ratios[i])
        for i in range(len(errors) - 1))


def spatial_order_study(
    mx_levels: tuple[int, ...] = (20, 40, 80),
    d: float = 0.1,
    length: float = 2.0,
    dt: float = 5e-6,
    t_end: float = 0.5,
) -> ConvergenceStudy:
    """L-infinity error against the manufactured solution per grid level.

    dt must be small enough that the first-order time error is negligible
    next to the second-order spatial error on the finest grid.
    """
    if len(mx_levels) < 3:
        raise DomainError("need at least 3 refinement levels")
    errors = tuple(sup_error(Grid1D(length, mx), d, dt, t_end) for mx in mx_levels)
    ratios = tuple(mx_levels[i + 1] / mx_levels[i] for i in range(len(mx_levels) - 1))
    return ConvergenceStudy("spatial", tuple(float(m) for m in mx_levels),
                            errors, _observed_orders(errors, ratios))


def temporal_order_study(
    dt_levels: tuple[float, ...] = (4e-3, 2e-3, 1e-3),
    d: float = 0.1,
    length: float = 2.0,
    mx: int = 40,
    t_end: float = 0.5,
) -> ConvergenceStudy:
    """L-infinity error per time-step level on a fixed grid."""
    if len(dt_levels) < 3:
        raise DomainError("need at least 3 refinement levels")
    grid = Grid1D(length, mx)
    errors = tuple(sup_error(grid, d, dt, t_end) for dt in dt_levels)
    ratios = tuple(dt_levels[i] / dt_levels[i + 1] for i in range(len(dt_levels) - 1))
    return ConvergenceStudy("temporal", dt_levels, errors,
                            _observed_orders(errors, ratios))
