"""Finite-difference time integration of both reaction-diffusion models.

Space: second-order central stencil on a uniform grid, no-flux boundaries
via ghost-node reflection (preserves the discrete conservation identity
exactly).  Time: forward Euler by default, or an IMEX stepper that treats
diffusion implicitly and removes the diffusion time-step restriction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from ..errors import DomainError, LayoutError, SolverAbortError
from ..kinetics import (
    Model,
    ModelParams,
    jacobian_basic,
    jacobian_extended,
    reaction_basic_rates,
    reaction_extended_rates,
)
from . import kernels
from .grid import Field, Grid1D

TERMINATED_T_END = "reached-t_end"
TERMINATED_STEADY = "steady-state"
TERMINATED_ABORT = "aborted"

# early-stop rule: residual below 1e-8*max(1,Lambda) for this many
# consecutive samples
_STEADY_SAMPLES = 10


def discrete_laplacian(u: np.ndarray, grid: Grid1D) -> np.ndarray:
    """Second-order Laplacian with reflecting (no-flux) boundary nodes."""
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.mx + 1,):
        raise LayoutError(
            f"expected {grid.mx + 1} nodal values, got shape {u.shape}")
    idx2 = 1.0 / (grid.dx * grid.dx)
    up = np.empty_like(u)
    um = np.empty_like(u)
    up[:-1] = u[1:]
    up[-1] = u[-2]
    um[1:] = u[:-1]
    um[0] = u[1]
    return (up - 2.0 * u + um) * idx2


def reaction_field_rates(f: Field, p: ModelParams) -> np.ndarray:
    """Reaction terms evaluated nodewise over a whole field."""
    if f.model is Model.BASIC:
        return np.stack(reaction_basic_rates(*f.data, p))
    return np.stack(reaction_extended_rates(*f.data, p))


def stable_dt(p: ModelParams, grid: Grid1D, model: Model = Model.BASIC) -> float:
    """Sufficient (not necessary) explicit time-step bound.

    min(dx^2 / (2 d), 0.1 / rho) where rho is a crude reaction stiffness
    estimate: the max absolute row sum of the Jacobian at the drug-free
    point.
    """
    diffusion_bound = math.inf if p.d == 0.0 else grid.dx ** 2 / (2.0 * p.d)
    s_free = p.lambda_recruit / p.eta1 if p.eta1 > 0.0 else 0.0
    y = (s_free,) + (0.0,) * (model.ncomp - 1)
    jac = jacobian_basic(p, y) if model is Model.BASIC else jacobian_extended(p, y)
    rho = float(np.max(np.sum(np.abs(jac), axis=1)))
    reaction_bound = math.inf if rho == 0.0 else 0.1 / rho
    return min(diffusion_bound, reaction_bound)


def _run_steps(f: Field, p: ModelParams, dt: float, nsteps: int,
               stepper: str, clamp_tol: float):
    pv = kernels.pack_params(p)
    if stepper == "explicit":
        return kernels.run_explicit(f.data, pv, p.d, f.grid.dx, dt, nsteps, clamp_tol)
    if stepper == "imex":
        return kernels.run_imex(f.data, pv, p.d, f.grid.dx, dt, nsteps, clamp_tol)
    raise DomainError(f"unknown stepper {stepper!r}")


def _abort_message(status: int, min_seen: float) -> str:
    if status == kernels.STATUS_NEGATIVE:
        return (f"state went negative beyond the clamp tolerance "
                f"(min value {min_seen:.3e})")
    return "state became non-finite"


def _single_step(f: Field, p: ModelParams, dt: float, stepper: str,
                 clamp_tol: float) -> Field:
    if dt <= 0.0:
        raise DomainError("dt must be > 0")
    out = f.copy()
    status, _, _ = _run_steps(out, p, dt, 1, stepper, clamp_tol)
    if status != kernels.STATUS_OK:
        raise SolverAbortError(_abort_message(status, out.min_value()))
    out.t = f.t + dt
    return out


def step_explicit(f: Field, p: ModelParams, dt: float,
                  clamp_tol: float = 1e-12) -> Field:
    """One forward-Euler step; raises SolverAbortError on invalid states."""
    return _single_step(f, p, dt, "explicit", clamp_tol)


def step_imex(f: Field, p: ModelParams, dt: float,
              clamp_tol: float = 1e-12) -> Field:
    """One implicit-diffusion / explicit-reaction step."""
    return _single_step(f, p, dt, "imex", clamp_tol)


def mass_integral(f: Field) -> np.ndarray:
    """Trapezoid integral of each compartment over the domain."""
    return np.array([f.grid.integrate(row) for row in f.data])


def steady_state_residual(f: Field, p: ModelParams) -> float:
    """Sup-norm of d*lap_h(u) + rates(u) over nodes and compartments."""
    rates = reaction_field_rates(f, p)
    lap = np.stack([discrete_laplacian(row, f.grid) for row in f.data])
    return float(np.max(np.abs(p.d * lap + rates)))


@dataclass(frozen=True)
class SimConfig:
    """Everything one integration needs."""

    params: ModelParams
    model: Model
    grid: Grid1D = dc_field(default_factory=Grid1D)
    initial: tuple[float, ...] | None = None
    initial_field: Field | None = None
    perturb_amplitude: float = 0.0
    perturb_mode: int = 1
    dt: float = 1e-2
    t_end: float = 500.0
    stride: int = 500
    stepper: str = "explicit"
    steady_stop: bool = False
    allow_unstable_dt: bool = False
    clamp_tol: float = 1e-12

    def __post_init__(self):
        if self.dt <= 0.0:
            raise DomainError("dt must be > 0")
        if self.t_end < self.dt:
            raise DomainError("t_end must be >= dt")
        if self.stride < 1:
            raise DomainError("stride must be >= 1")
        if self.stepper not in ("explicit", "imex"):
            raise DomainError(f"stepper must be 'explicit' or 'imex', "
                              f"got {self.stepper!r}")
        if self.initial is not None and len(self.initial) != self.model.ncomp:
            raise LayoutError(
                f"initial needs {self.model.ncomp} values, got {len(self.initial)}")

    @property
    def nsteps(self) -> int:
        return max(1, round(self.t_end / self.dt))


def build_initial_field(cfg: SimConfig) -> Field:
    """Either the explicitly supplied field, or homogeneous per-compartment
    values plus an optional Neumann-compatible cosine perturbation applied
    to every compartment."""
    if cfg.initial_field is not None:
        f = cfg.initial_field
        if f.grid != cfg.grid or f.model is not cfg.model:
            raise LayoutError("initial field does not match the configured "
                              "grid or model")
        if not f.is_finite() or f.data.min() < 0.0:
            raise DomainError("initial field must be finite and non-negative")
        out = f.copy()
        out.t = 0.0
        return out
    if cfg.initial is None:
        raise DomainError("config has no initial values")
    f = Field.homogeneous(cfg.grid, cfg.model, cfg.initial, t=0.0)
    if cfg.perturb_amplitude != 0.0:
        x = cfg.grid.nodes
        bump = cfg.perturb_amplitude * np.cos(
            cfg.perturb_mode * np.pi * x / cfg.grid.length)
        f.data += bump[None, :]
    if f.data.min() < 0.0:
        raise DomainError("initial data must be non-negative "
                          "(perturbation amplitude too large?)")
    return f


@dataclass
class Trajectory:
    """Sampled fields plus per-sample diagnostics."""

    times: np.ndarray
    fields: list[Field]
    masses: np.ndarray        # (nsamples, ncomp)
    min_values: np.ndarray    # per-sample field minimum (post clamp)
    residuals: np.ndarray     # steady-state residual per sample
    termination: str
    min_seen: float           # most negative value observed before clamping
    config: SimConfig
    backend: str
    abort_reason: str | None = None

    @property
    def final(self) -> Field:
        return self.fields[-1]


def integrate(cfg: SimConfig) -> Trajectory:
    """March the configured model from t=0 to t_end (or an early stop).

    Deterministic for a given config and backend.  On an invalid state the
    run stops with termination 'aborted'; the offending field is kept as
    the last (flagged) sample.
    """
    if cfg.stepper == "explicit":
        bound = stable_dt(cfg.params, cfg.grid, cfg.model)
        if cfg.dt > bound:
            if not cfg.allow_unstable_dt:
                raise DomainError(
                    f"dt = {cfg.dt:g} exceeds the explicit stability bound "
                    f"{bound:g}; shrink dt, use the imex stepper, or set "
                    f"allow_unstable_dt")
            warnings.warn(
                f"dt = {cfg.dt:g} exceeds the explicit stability bound {bound:g}",
                stacklevel=2)

    f = build_initial_field(cfg)
    times = [0.0]
    fields = [f.copy()]
    masses = [mass_integral(f)]
    min_values = [f.min_value()]
    residuals = [steady_state_residual(f, cfg.params)]

    n = cfg.nsteps
    min_seen = math.inf
    termination = TERMINATED_T_END
    abort_reason = None
    steady_tol = 1e-8 * max(1.0, cfg.params.lambda_recruit)
    steady_run = 0
    done = 0
    while done < n:
        chunk = min(cfg.stride, n - done)
        status, steps, chunk_min = _run_steps(
            f, cfg.params, cfg.dt, chunk, cfg.stepper, cfg.clamp_tol)
        done += steps
        min_seen = min(min_seen, chunk_min)
        t = done * cfg.dt
        times.append(t)
        fields.append(f.copy())
        if status != kernels.STATUS_OK:
            # diagnostic sample of the offending state
            masses.append(mass_integral(f))
            min_values.append(f.min_value())
            residuals.append(math.nan)
            termination = TERMINATED_ABORT
            abort_reason = _abort_message(status, chunk_min)
            break
        masses.append(mass_integral(f))
        min_values.append(f.min_value())
        res = steady_state_residual(f, cfg.params)
        residuals.append(res)
        if cfg.steady_stop:
            steady_run = steady_run + 1 if res < steady_tol else 0
            if steady_run >= _STEADY_SAMPLES:
                termination = TERMINATED_STEADY
                break

    for i, fld in enumerate(fields):
        fld.t = times[i]

    return Trajectory(
        times=np.asarray(times),
        fields=fields,
        masses=np.asarray(masses),
        min_values=np.asarray(min_values),
        residuals=np.asarray(residuals),
        termination=termination,
        min_seen=min_seen,
        config=cfg,
        backend=kernels.get_backend(),
        abort_reason=abort_reason,
    )
