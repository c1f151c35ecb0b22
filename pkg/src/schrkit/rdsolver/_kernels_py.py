"""NumPy implementation of the stepping kernels.

Fallback backend used when the compiled extension is unavailable (or when
SCHRKIT_PURE_PYTHON=1).  Arithmetic is written to mirror the compiled
kernels expression-by-expression so both backends agree to rounding noise.

Kernel contract (shared with the compiled module):

* state arrays are modified in place,
* return value is (status, steps_done, min_seen) with status
  0 = completed, 1 = negativity below -clamp_tol, 2 = non-finite values;
  on failure the offending state is left in place for diagnostics,
* after every accepted step, entries in [-clamp_tol, 0) are clamped to 0,
* min_seen is the most negative entry observed before clamping.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

STATUS_OK = 0
STATUS_NEGATIVE = 1
STATUS_NONFINITE = 2

# packed parameter-vector layout used by both backends
PVEC_SIZE = 17
(P_LAM, P_BETA, P_ETA1, P_ETA2, P_ETA3, P_ETA4, P_SIGMA, P_G1, P_G2,
 P_ETA5, P_ETA6, P_G3, P_G4, P_MU1, P_MU2, P_K1, P_K2) = range(PVEC_SIZE)


def _laplacian(u: np.ndarray, idx2: float) -> np.ndarray:
    up = np.empty_like(u)
    um = np.empty_like(u)
    up[:, :-1] = u[:, 1:]
    up[:, -1] = u[:, -2]
    um[:, 1:] = u[:, :-1]
    um[:, 0] = u[:, 1]
    return (up - 2.0 * u + um) * idx2


def _rates_basic(u: np.ndarray, pv: np.ndarray) -> np.ndarray:
    S, C, H, R = u
    lam, beta = pv[P_LAM], pv[P_BETA]
    a2 = pv[P_ETA2] + pv[P_SIGMA] + pv[P_G1]
    a3 = pv[P_ETA3] + pv[P_G2]
    bSC = beta * S * C
    return np.stack([
        lam - bSC - pv[P_ETA1] * S,
        bSC - a2 * C,
        -a3 * H + pv[P_SIGMA] * C,
        pv[P_G1] * C + pv[P_G2] * H - pv[P_ETA4] * R,
    ])


def _rates_extended(u: np.ndarray, pv: np.ndarray) -> np.ndarray:
    S, C, Uc, H, Uh, R = u
    lam, beta = pv[P_LAM], pv[P_BETA]
    a2 = pv[P_ETA2] + pv[P_SIGMA] + pv[P_G1]
    aH = pv[P_ETA3] + pv[P_G2]
    bUc = pv[P_MU2] + pv[P_ETA5] + pv[P_G3]
    bUh = pv[P_K2] + pv[P_ETA6] + pv[P_G4]
    bSC = beta * S * C
    return np.stack([
        lam - bSC - pv[P_ETA1] * S,
        bSC - a2 * C + pv[P_MU2] * Uc - pv[P_MU1] * C,
        pv[P_MU1] * C - bUc * Uc,
        -aH * H + pv[P_SIGMA] * C + pv[P_K2] * Uh - pv[P_K1] * H,
        pv[P_K1] * H - bUh * Uh,
        pv[P_G1] * C + pv[P_G2] * H - pv[P_ETA4] * R
        + pv[P_G3] * Uc + pv[P_G4] * Uh,
    ])


def _rates(u: np.ndarray, pv: np.ndarray) -> np.ndarray:
    return _rates_basic(u, pv) if u.shape[0] == 4 else _rates_extended(u, pv)


def _accept(u: np.ndarray, new: np.ndarray, clamp_tol: float,
            min_seen: float) -> tuple[int, float]:
    if not np.isfinite(new).all():
        u[...] = new
        return STATUS_NONFINITE, min_seen
    m = float(new.min())
    if m < min_seen:
        min_seen = m
    if m < -clamp_tol:
        u[...] = new
        return STATUS_NEGATIVE, min_seen
    new[new < 0.0] = 0.0
    u[...] = new
    return STATUS_OK, min_seen


def run_explicit(u: np.ndarray, pv: np.ndarray, d: float, dx: float,
                 dt: float, nsteps: int, clamp_tol: float):
    """Forward-Euler steps: u += dt * (d * lap_h(u) + rates(u))."""
    idx2 = 1.0 / (dx * dx)
    min_seen = np.inf
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(nsteps):
            lap = _laplacian(u, idx2)
            new = u + dt * (d * lap + _rates(u, pv))
            status, min_seen = _accept(u, new, clamp_tol, min_seen)
            if status != STATUS_OK:
                return status, k + 1, min_seen
    return STATUS_OK, nsteps, min_seen


def _banded_matrix(n: int, r: float) -> np.ndarray:
    ab = np.zeros((3, n))
    ab[1, :] = 1.0 + 2.0 * r
    ab[0, 1:] = -r
    ab[0, 1] = -2.0 * r
    ab[2, :-1] = -r
    ab[2, n - 2] = -2.0 * r
    return ab


def run_imex(u: np.ndarray, pv: np.ndarray, d: float, dx: float,
             dt: float, nsteps: int, clamp_tol: float):
    """Implicit diffusion / explicit reaction steps.

    Solves (I - dt*d*lap_h) u_new = u + dt*rates(u) per compartment via a
    direct banded solve of the Neumann tridiagonal system.
    """
    n = u.shape[1]
    r = dt * d / (dx * dx)
    ab = _banded_matrix(n, r)
    min_seen = np.inf
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(nsteps):
            rhs = u + dt * _rates(u, pv)
            if not np.isfinite(rhs).all():
                u[...] = rhs
                return STATUS_NONFINITE, k + 1, min_seen
            new = solve_banded((1, 1), ab, rhs.T).T
            status, min_seen = _accept(u, new, clamp_tol, min_seen)
            if status != STATUS_OK:
                return status, k + 1, min_seen
    return STATUS_OK, nsteps, min_seen


def run_forced_heat(u: np.ndarray, g: np.ndarray, d: float, dx: float,
                    dt: float, nsteps: int, t0: float):
    """Forward-Euler scalar diffusion with source exp(-t) * g(x).

    Drives the manufactured-solution convergence studies; no clamping.
    """
    idx2 = 1.0 / (dx * dx)
    for k in range(nsteps):
        t = t0 + k * dt
        up = np.empty_like(u)
        um = np.empty_like(u)
        up[:-1] = u[1:]
        up[-1] = u[-2]
        um[1:] = u[:-1]
        um[0] = u[1]
        lap = (up - 2.0 * u + um) * idx2
        new = u + dt * (d * lap + np.exp(-t) * g)
        if not np.isfinite(new).all():
            u[...] = new
            return STATUS_NONFINITE, k + 1, np.inf
        u[...] = new
    return STATUS_OK, nsteps, np.inf
