"""Local and global stability diagnostics.

Local: characteristic roots per Laplacian mode under no-flux boundary
conditions (closed forms for the basic model, dense eigenvalues of the
reduced Jacobian for the extended one), plus the transmission/transition
splitting behind the reproduction numbers.

Global: Lyapunov functionals evaluated by trapezoid quadrature along
sampled trajectories, with forward-difference slopes as a discrete
dissipation diagnostic.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, LayoutError, SchrkitError
from .kinetics import (
    CompartmentVector,
    EquilibriumPoint,
    Model,
    ModelParams,
    drug_free_equilibrium,
    effective_threshold_extended,
    jacobian,
    jacobian_basic,
    jacobian_extended,
    r0_basic,
    r0_extended,
)
from .rdsolver.grid import Field, Grid1D
from .rdsolver.solver import Trajectory

VERDICT_STABLE = "locally-asymptotically-stable"
VERDICT_UNSTABLE = "unstable"
VERDICT_INCONCLUSIVE = "inconclusive"

# roots closer than this to the imaginary axis give an inconclusive verdict
_VERDICT_MARGIN = 1e-12
# residual tolerance for dense eigenpairs ||A v - X v||
_EIG_RESIDUAL_TOL = 1e-10

DEFAULT_JMAX = 50


# ---------------------------------------------------------------------------
# Transmission/transition splitting.

@dataclass(frozen=True)
class NgmDecomposition:
    """Jacobian split J = transmission + transition, with the transmission
    part holding exactly the new-use (beta*S*C) derivative entries."""

    transmission: np.ndarray
    transition: np.ndarray
    evaluated_at: CompartmentVector

    @property
    def jacobian(self) -> np.ndarray:
        return self.transmission + self.transition


def ngm_decompose(p: ModelParams, y: CompartmentVector,
                  model: Model | None = None) -> NgmDecomposition:
    if model is None:
        model = y.model
    if y.model is not model:
        raise LayoutError(f"state layout {y.model.value} != requested {model.value}")
    jac = jacobian(p, y, model)
    S, C = y.values[0], y.values[1]
    t = np.zeros_like(jac)
    t[0, 0] = -p.beta * C
    t[0, 1] = -p.beta * S
    t[1, 0] = p.beta * C
    t[1, 1] = p.beta * S
    return NgmDecomposition(transmission=t, transition=jac - t, evaluated_at=y)


def reproduction_trace(p: ModelParams, model: Model) -> float:
    """trace(-T K^-1) at the drug-free state.

    For the basic model this equals r0_basic.  For the extended model it
    equals the exact invasion threshold (effective_threshold_extended) and
    matches r0_extended only when mu1*mu2 == 0.
    """
    e = drug_free_equilibrium(p, model)
    dec = ngm_decompose(p, e.point, model)
    k_inv = np.linalg.inv(dec.transition)
    return float(np.trace(-dec.transmission @ k_inv))


# ---------------------------------------------------------------------------
# Mode spectrum and characteristic roots.

@dataclass(frozen=True)
class ModeSpectrum:
    """Neumann Laplacian eigenvalues lambda_j = (j pi / L)^2 on an interval."""

    domain_length: float
    eigenvalues: tuple[float, ...]


def neumann_modes(length: float, j_max: int = DEFAULT_JMAX) -> ModeSpectrum:
    if length <= 0.0:
        raise DomainError(f"domain length must be > 0, got {length}")
    if j_max < 0:
        raise DomainError("j_max must be >= 0")
    lam = tuple((j * math.pi / length) ** 2 for j in range(j_max + 1))
    return ModeSpectrum(domain_length=length, eigenvalues=lam)


@dataclass(frozen=True)
class ModeRoots:
    """Characteristic values of one Laplacian mode."""

    mode_index: int
    lambda_j: float
    roots: tuple[complex, ...]
    alpha1: float | None = None   # drug-addiction case only
    alpha2: float | None = None

    @property
    def max_real_part(self) -> float:
        return max(r.real for r in self.roots)


def roots_drug_free(p: ModelParams, lambda_j: float,
                    mode_index: int = 0) -> ModeRoots:
    """Closed-form roots of the basic model linearised at the drug-free state."""
    r0 = r0_basic(p)
    shift = p.d * lambda_j
    a2 = p.eta2 + p.sigma + p.gamma1
    x1 = -shift - p.eta1
    x2 = -shift - a2 * (1.0 - r0)
    x3 = -shift - (p.eta3 + p.gamma2)
    return ModeRoots(mode_index, lambda_j,
                     (complex(x1), complex(x2), complex(x3)))


def roots_endemic(p: ModelParams, e: EquilibriumPoint, lambda_j: float,
                  mode_index: int = 0) -> ModeRoots:
    """Roots of the basic model linearised at the drug-addiction state:
    a quadratic in (X + d lambda_j) plus the decoupled H factor."""
    if e.point.model is not Model.BASIC:
        raise LayoutError("endemic mode roots need a basic-model equilibrium")
    if e.kind != "drug-addiction":
        raise DomainError("endemic mode roots need a drug-addiction equilibrium")
    S, C = e.point.values[0], e.point.values[1]
    a2 = p.eta2 + p.sigma + p.gamma1
    alpha1 = p.eta1 + a2 + p.beta * (C - S)
    alpha2 = (p.eta1 + p.beta * C) * a2 - p.eta1 * p.beta * S
    shift = p.d * lambda_j
    disc = cmath.sqrt(complex(alpha1 * alpha1 - 4.0 * alpha2))
    y_plus = (-alpha1 + disc) / 2.0
    y_minus = (-alpha1 - disc) / 2.0
    xh = complex(-shift - (p.eta3 + p.gamma2))
    return ModeRoots(mode_index, lambda_j,
                     (y_plus - shift, y_minus - shift, xh),
                     alpha1=float(alpha1), alpha2=float(alpha2))


def characteristic_residual(p: ModelParams, S: float, C: float,
                            x: complex, lambda_j: float) -> float:
    """|value| of the factored basic characteristic polynomial at x.

    (X + dl + eta3+gamma2) * [(X + dl + eta1 + beta C)
    (X + dl + eta2+sigma+gamma1 - beta S) + beta^2 S C] evaluated at the
    state (S, C) the linearisation used.
    """
    z = x + p.d * lambda_j
    a2 = p.eta2 + p.sigma + p.gamma1
    value = ((z + p.eta3 + p.gamma2)
             * ((z + p.eta1 + p.beta * C) * (z + a2 - p.beta * S)
                + p.beta ** 2 * S * C))
    return abs(value)


def _extended_mode_roots(p: ModelParams, e: EquilibriumPoint,
                         lambda_j: float, mode_index: int) -> ModeRoots:
    """Dense eigenvalues of the reduced (R-free) extended Jacobian shifted
    by -d lambda_j, with an eigenpair residual guard."""
    j5 = jacobian_extended(p, e.point)[:5, :5]
    a = j5 - p.d * lambda_j * np.eye(5)
    w, v = np.linalg.eig(a)
    resid = np.abs(a @ v - v * w[None, :]).max(axis=0)
    if np.any(resid > _EIG_RESIDUAL_TOL):
        raise SchrkitError(
            f"eigenpair residual {resid.max():.3e} exceeds {_EIG_RESIDUAL_TOL:g}")
    order = np.argsort(-w.real)
    return ModeRoots(mode_index, lambda_j, tuple(complex(x) for x in w[order]))


@dataclass(frozen=True)
class StabilityReport:
    """Per-mode characteristic roots and the resulting verdict."""

    model: Model
    kind: str
    r0: float
    r0_effective: float | None
    modes: tuple[ModeRoots, ...]
    verdict: str
    max_real_part: float


def classify(p: ModelParams, e: EquilibriumPoint, modes: ModeSpectrum,
             model: Model | None = None, threads: int = 1) -> StabilityReport:
    """Roots across all modes and the stability verdict.

    Roots within 1e-12 of the imaginary axis yield 'inconclusive' rather
    than a guess.  Mode evaluations are independent; with threads > 1 they
    run concurrently (result identical to the sequential order).
    """
    if model is None:
        model = e.point.model
    if e.point.model is not model:
        raise LayoutError("equilibrium layout does not match the model")
    if not modes.eigenvalues:
        raise DomainError("mode spectrum is empty")

    if model is Model.BASIC:
        if e.kind == "drug-free":
            def one(args):
                j, lam = args
                return roots_drug_free(p, lam, j)
        else:
            def one(args):
                j, lam = args
                return roots_endemic(p, e, lam, j)
        r0 = r0_basic(p)
        r0_eff = None
    else:
        def one(args):
            j, lam = args
            return _extended_mode_roots(p, e, lam, j)
        r0 = r0_extended(p)
        r0_eff = effective_threshold_extended(p)

    items = list(enumerate(modes.eigenvalues))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            mode_roots = tuple(pool.map(one, items))
    else:
        mode_roots = tuple(one(it) for it in items)

    worst = max(mr.max_real_part for mr in mode_roots)
    if worst < -_VERDICT_MARGIN:
        verdict = VERDICT_STABLE
    elif worst > _VERDICT_MARGIN:
        verdict = VERDICT_UNSTABLE
    else:
        verdict = VERDICT_INCONCLUSIVE

    return StabilityReport(model=model, kind=e.kind, r0=r0,
                           r0_effective=r0_eff, modes=mode_roots,
                           verdict=verdict, max_real_part=worst)


# ---------------------------------------------------------------------------
# Lyapunov functionals (trapezoid quadrature over the domain).

def _grid_of(f: Field, grid: Grid1D | None) -> Grid1D:
    if grid is not None and grid != f.grid:
        raise LayoutError("field was sampled on a different grid")
    return f.grid


def lyapunov_g1(f: Field, grid: Grid1D | None = None) -> float:
    """Integral of the cocaine-user density: the linear drug-free functional
    of the basic model."""
    if f.model is not Model.BASIC:
        raise LayoutError("g1 is defined for the basic model")
    return _grid_of(f, grid).integrate(f.compartment("C"))


def lyapunov_g2(f: Field, e: EquilibriumPoint,
                grid: Grid1D | None = None) -> float:
    """Volterra-type functional at the basic drug-addiction state:
    integral of (S - S* - S* ln(S/S*)) + (C - C* - C* ln(C/C*))."""
    if f.model is not Model.BASIC or e.point.model is not Model.BASIC:
        raise LayoutError("g2 is defined for the basic model")
    if e.kind != "drug-addiction":
        raise DomainError("g2 needs the drug-addiction equilibrium")
    S = f.compartment("S")
    C = f.compartment("C")
    if S.min() <= 0.0 or C.min() <= 0.0:
        raise DomainError("g2 needs strictly positive S and C")
    s_star, c_star = e.point.values[0], e.point.values[1]
    integrand = ((S - s_star - s_star * np.log(S / s_star))
                 + (C - c_star - c_star * np.log(C / c_star)))
    return _grid_of(f, grid).integrate(integrand)


def lyapunov_extended_free(f: Field, alphas,
                           grid: Grid1D | None = None) -> float:
    """Weighted linear functional C + a1 Uc + a2 H + a3 Uh of the extended
    model at the drug-free state."""
    if f.model is not Model.EXTENDED:
        raise LayoutError("this functional is defined for the extended model")
    a1, a2, a3 = (float(a) for a in alphas)
    if min(a1, a2, a3) <= 0.0:
        raise DomainError("weights must be strictly positive")
    integrand = (f.compartment("C") + a1 * f.compartment("Uc")
                 + a2 * f.compartment("H") + a3 * f.compartment("Uh"))
    return _grid_of(f, grid).integrate(integrand)


def lyapunov_extended_endemic(f: Field, e: EquilibriumPoint,
                              grid: Grid1D | None = None) -> float:
    """Squared-deviation functional of the extended model at the
    drug-addiction state, summed over S, C, Uc, H, Uh."""
    if f.model is not Model.EXTENDED or e.point.model is not Model.EXTENDED:
        raise LayoutError("this functional is defined for the extended model")
    star = np.asarray(e.point.values[:5])
    dev = f.data[:5] - star[:, None]
    return _grid_of(f, grid).integrate((dev * dev).sum(axis=0))


def free_state_coefficients(p: ModelParams, alphas) -> tuple[float, float, float, float]:
    """Collected coefficients of C, Uc, H, Uh in the time derivative of the
    weighted drug-free functional, evaluated at S = Lambda/eta1.

    Feasibility of making all four negative is exactly the condition that
    the mu2-corrected invasion threshold is below one.
    """
    a1, a2, a3 = (float(a) for a in alphas)
    s_free = p.lambda_recruit / p.eta1
    c_c = (p.beta * s_free - (p.eta2 + p.sigma + p.gamma1 + p.mu1)
           + a1 * p.mu1 + a2 * p.sigma)
    c_uc = p.mu2 - a1 * (p.mu2 + p.eta5 + p.gamma3)
    c_h = -a2 * (p.eta3 + p.gamma2 + p.kappa1) + a3 * p.kappa1
    c_uh = a2 * p.kappa2 - a3 * (p.kappa2 + p.eta6 + p.gamma4)
    return c_c, c_uc, c_h, c_uh


def choose_alphas(p: ModelParams) -> tuple[float, float, float] | None:
    """Positive weights making all four collected coefficients negative,
    found by a coarse grid search with local refinement; None if the
    inequalities are infeasible."""
    p.require_extended_analysis()
    s_free = p.lambda_recruit / p.eta1
    # the C coefficient contains beta*S_f - (...) plus non-negative alpha
    # terms, so a non-negative base excess is immediately infeasible
    if p.beta * s_free - (p.eta2 + p.sigma + p.gamma1 + p.mu1) >= 0.0:
        return None

    def margin(alphas) -> float:
        return -max(free_state_coefficients(p, alphas))

    def derived_a3(a2: float) -> float:
        lo = a2 * p.kappa2 / (p.kappa2 + p.eta6 + p.gamma4)
        if p.kappa1 == 0.0:
            return lo + 0.5 * a2 if lo > 0.0 else 0.5 * a2
        hi = a2 * (p.eta3 + p.gamma2 + p.kappa1) / p.kappa1
        return math.sqrt(max(lo, 1e-300) * hi) if lo > 0.0 else 0.5 * (1e-12 * a2 + hi)

    best = None
    best_margin = -math.inf
    candidates = np.geomspace(1e-6, 1e3, 28)
    for a1 in candidates:
        for a2 in candidates:
            trial = (float(a1), float(a2), derived_a3(float(a2)))
            m = margin(trial)
            if m > best_margin:
                best_margin, best = m, trial

    # local multiplicative refinement around the best grid point
    factors = (0.25, 0.5, 0.8, 1.0, 1.25, 2.0, 4.0)
    for _ in range(24):
        improved = False
        a1, a2, a3 = best
        for f1 in factors:
            for f2 in factors:
                for f3 in factors:
                    trial = (a1 * f1, a2 * f2, a3 * f3)
                    m = margin(trial)
                    if m > best_margin:
                        best_margin, best, improved = m, trial, True
        if not improved:
            break

    if best_margin <= 0.0:
        return None
    assert all(c < 0.0 for c in free_state_coefficients(p, best))
    return best


# ---------------------------------------------------------------------------
# Discrete dissipation diagnostics.

FUNCTIONALS = ("g1", "g2", "extended-free", "extended-endemic")


@dataclass(frozen=True)
class LyapunovTrace:
    """Functional values along a sampled trajectory with forward-difference
    slopes; samples where the functional was undefined are flagged and
    carry NaN."""

    functional: str
    times: np.ndarray
    values: np.ndarray
    slopes: np.ndarray           # length len(times) - 1
    flagged: tuple[int, ...]

    def fraction_nonpositive(self, after: float | None = None) -> float:
        """Fraction of finite slopes (at sample times >= after) that are <= 0."""
        sel = np.isfinite(self.slopes)
        if after is not None:
            sel &= self.times[:-1] >= after
        n = int(sel.sum())
        if n == 0:
            return math.nan
        return float(np.sum(self.slopes[sel] <= 0.0) / n)


def dissipation_report(
    traj: Trajectory,
    functional: str,
    equilibrium: EquilibriumPoint | None = None,
    params: ModelParams | None = None,
    alphas: tuple[float, float, float] | None = None,
) -> LyapunovTrace:
    """Evaluate one functional along a uniformly sampled trajectory."""
    if functional not in FUNCTIONALS:
        raise DomainError(f"unknown functional {functional!r}; "
                          f"choose from {FUNCTIONALS}")
    times = np.asarray(traj.times, dtype=float)
    if len(times) < 2:
        raise DomainError("trajectory needs at least two samples")
    spacing = np.diff(times)
    if not np.allclose(spacing, spacing[0], rtol=1e-9, atol=0.0):
        raise DomainError("dissipation report needs uniform sampling")

    if functional == "g2" and equilibrium is None:
        raise DomainError("g2 needs the drug-addiction equilibrium")
    if functional == "extended-endemic" and equilibrium is None:
        raise DomainError("extended-endemic needs the drug-addiction equilibrium")
    if functional == "extended-free" and alphas is None:
        if params is None:
            raise DomainError("extended-free needs weights or params")
        alphas = choose_alphas(params)
        if alphas is None:
            raise DomainError("no feasible weights for these parameters")

    def evaluate(fld: Field) -> float:
        if functional == "g1":
            return lyapunov_g1(fld)
        if functional == "g2":
            return lyapunov_g2(fld, equilibrium)
        if functional == "extended-free":
            return lyapunov_extended_free(fld, alphas)
        return lyapunov_extended_endemic(fld, equilibrium)

    values = np.empty(len(times))
    flagged = []
    for i, fld in enumerate(traj.fields):
        try:
            values[i] = evaluate(fld)
        except DomainError:
            values[i] = math.nan
            flagged.append(i)

    slopes = np.diff(values) / spacing
    return LyapunovTrace(functional=functional, times=times, values=values,
                         slopes=slopes, flagged=tuple(flagged))
