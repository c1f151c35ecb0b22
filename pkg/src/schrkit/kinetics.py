"""Compartment kinetics for the cocaine-heroin SCHR models.

Two reaction networks are supported:

* the basic 4-compartment model with susceptible (S), cocaine users (C),
  heroin users (H) and recovered (R) classes, and
* the extended 6-compartment model that adds cocaine and heroin users in
  treatment (U_c, U_h) with two-way flows C <-> U_c and H <-> U_h.

This module holds the parameter record, the pointwise reaction terms,
the reproduction numbers, and closed-form equilibria together with an
independent damped-Newton root finder used to cross-check them.
All functions are pure and safe for concurrent use.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import (
    DomainError,
    LayoutError,
    NoEndemicEquilibriumError,
    ParameterError,
)


class Model(enum.Enum):
    """Which reaction network a state or operation refers to."""

    BASIC = "basic"
    EXTENDED = "extended"

    @property
    def ncomp(self) -> int:
        return 4 if self is Model.BASIC else 6

    @property
    def labels(self) -> tuple[str, ...]:
        if self is Model.BASIC:
            return ("S", "C", "H", "R")
        return ("S", "C", "Uc", "H", "Uh", "R")


_RATE_FIELDS = (
    "lambda_recruit", "beta",
    "eta1", "eta2", "eta3", "eta4", "eta5", "eta6",
    "sigma", "gamma1", "gamma2", "gamma3", "gamma4",
    "mu1", "mu2", "kappa1", "kappa2", "d",
)


@dataclass(frozen=True)
class ModelParams:
    """Rate constants for both models (the basic model ignores the
    treatment-related fields, which default to zero).

    lambda_recruit  recruitment into S            (individuals / time)
    beta            transmission rate             (1 / (individuals * time))
    eta1..eta6      death rates of S,C,H,R,Uc,Uh  (1 / time)
    sigma           progression C -> H            (1 / time)
    gamma1..gamma4  recovery of C,H,Uc,Uh         (1 / time)
    mu1, mu2        treatment flows C->Uc, Uc->C  (1 / time)
    kappa1, kappa2  treatment flows H->Uh, Uh->H  (1 / time)
    d               diffusion coefficient         (length^2 / time)
    """

    lambda_recruit: float
    beta: float
    eta1: float
    eta2: float
    eta3: float
    eta4: float
    sigma: float
    gamma1: float
    gamma2: float
    d: float
    eta5: float = 0.0
    eta6: float = 0.0
    gamma3: float = 0.0
    gamma4: float = 0.0
    mu1: float = 0.0
    mu2: float = 0.0
    kappa1: float = 0.0
    kappa2: float = 0.0

    def __post_init__(self):
        for name in _RATE_FIELDS:
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ParameterError(f"parameter {name} must be finite, got {v!r}")
            if v < 0.0:
                raise ParameterError(f"parameter {name} must be >= 0, got {v!r}")

    # Strict-positivity requirements are tied to the analysis that needs
    # them (reproduction numbers, closed-form equilibria), not to mere
    # construction: reaction terms remain well defined for boundary-zero
    # rates and the reduction tests exercise exactly those.
    def require_basic_analysis(self) -> None:
        if self.eta1 <= 0.0:
            raise ParameterError("eta1 must be > 0 (threshold denominator)")
        if self.eta2 + self.sigma + self.gamma1 <= 0.0:
            raise ParameterError(
                "eta2 + sigma + gamma1 must be > 0 (threshold denominator)")

    def require_extended_analysis(self) -> None:
        self.require_basic_analysis()
        if self.mu2 + self.eta5 + self.gamma3 <= 0.0:
            raise ParameterError(
                "mu2 + eta5 + gamma3 must be > 0 (treated-cocaine outflow)")
        if self.kappa2 + self.eta6 + self.gamma4 <= 0.0:
            raise ParameterError(
                "kappa2 + eta6 + gamma4 must be > 0 (treated-heroin outflow)")
        if self.kappa_determinant() <= 0.0:
            raise ParameterError(
                "(kappa1+eta3+gamma2)(kappa2+eta6+gamma4) - kappa1*kappa2 "
                "must be > 0 (H/Uh block determinant)")

    def kappa_determinant(self) -> float:
        return ((self.kappa1 + self.eta3 + self.gamma2)
                * (self.kappa2 + self.eta6 + self.gamma4)
                - self.kappa1 * self.kappa2)


@dataclass(frozen=True)
class CompartmentVector:
    """Ordered compartment densities with an explicit model layout."""

    values: tuple[float, ...]
    model: Model

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) != self.model.ncomp:
            raise LayoutError(
                f"{self.model.value} layout needs {self.model.ncomp} entries, "
                f"got {len(self.values)}")
        if not all(math.isfinite(v) for v in self.values):
            raise LayoutError("compartment values must be finite")

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @property
    def is_nonnegative(self) -> bool:
        return all(v >= 0.0 for v in self.values)


def basic_state(s, c, h, r) -> CompartmentVector:
    return CompartmentVector((s, c, h, r), Model.BASIC)


def extended_state(s, c, uc, h, uh, r) -> CompartmentVector:
    return CompartmentVector((s, c, uc, h, uh, r), Model.EXTENDED)


@dataclass(frozen=True)
class EquilibriumPoint:
    """A spatially homogeneous steady state and how it was obtained."""

    point: CompartmentVector
    kind: str          # "drug-free" | "drug-addiction"
    provenance: str    # "closed-form" | "root-found"


# ---------------------------------------------------------------------------
# Reaction terms.  The *_rates functions operate on scalars or NumPy arrays
# (the solver evaluates them nodewise on whole fields); the CompartmentVector
# wrappers enforce the layout contract.

def reaction_basic_rates(S, C, H, R, p: ModelParams):
    """Right-hand sides of the basic model, pointwise."""
    bSC = p.beta * S * C
    dS = p.lambda_recruit - bSC - p.eta1 * S
    dC = bSC - (p.eta2 + p.sigma + p.gamma1) * C
    dH = -(p.eta3 + p.gamma2) * H + p.sigma * C
    dR = p.gamma1 * C + p.gamma2 * H - p.eta4 * R
    return dS, dC, dH, dR


def reaction_extended_rates(S, C, Uc, H, Uh, R, p: ModelParams):
    """Right-hand sides of the extended model, pointwise."""
    bSC = p.beta * S * C
    dS = p.lambda_recruit - bSC - p.eta1 * S
    dC = bSC - (p.eta2 + p.sigma + p.gamma1) * C + p.mu2 * Uc - p.mu1 * C
    dUc = p.mu1 * C - (p.mu2 + p.eta5 + p.gamma3) * Uc
    dH = -(p.eta3 + p.gamma2) * H + p.sigma * C + p.kappa2 * Uh - p.kappa1 * H
    dUh = p.kappa1 * H - (p.kappa2 + p.eta6 + p.gamma4) * Uh
    dR = (p.gamma1 * C + p.gamma2 * H - p.eta4 * R
          + p.gamma3 * Uc + p.gamma4 * Uh)
    return dS, dC, dUc, dH, dUh, dR


def _require_layout(y: CompartmentVector, model: Model) -> None:
    if y.model is not model:
        raise LayoutError(f"expected a {model.value} state, got {y.model.value}")


def reaction_basic(y: CompartmentVector, p: ModelParams) -> CompartmentVector:
    _require_layout(y, Model.BASIC)
    return basic_state(*reaction_basic_rates(*y.values, p))


def reaction_extended(y: CompartmentVector, p: ModelParams) -> CompartmentVector:
    _require_layout(y, Model.EXTENDED)
    return extended_state(*reaction_extended_rates(*y.values, p))


def reaction(y: CompartmentVector, p: ModelParams) -> CompartmentVector:
    return reaction_basic(y, p) if y.model is Model.BASIC else reaction_extended(y, p)


def _state_values(y, model: Model) -> tuple[float, ...]:
    if isinstance(y, CompartmentVector):
        _require_layout(y, model)
        return y.values
    values = tuple(float(v) for v in y)
    if len(values) != model.ncomp:
        raise LayoutError(
            f"{model.value} layout needs {model.ncomp} entries, got {len(values)}")
    return values


def jacobian_basic(p: ModelParams, y) -> np.ndarray:
    """Jacobian of the basic reaction term (diffusion excluded)."""
    S, C, _, _ = _state_values(y, Model.BASIC)
    a2 = p.eta2 + p.sigma + p.gamma1
    return np.array([
        [-p.eta1 - p.beta * C, -p.beta * S, 0.0, 0.0],
        [p.beta * C, p.beta * S - a2, 0.0, 0.0],
        [0.0, p.sigma, -(p.eta3 + p.gamma2), 0.0],
        [0.0, p.gamma1, p.gamma2, -p.eta4],
    ])


def jacobian_extended(p: ModelParams, y) -> np.ndarray:
    """Jacobian of the extended reaction term (diffusion excluded)."""
    S, C, _, _, _, _ = _state_values(y, Model.EXTENDED)
    return np.array([
        [-p.eta1 - p.beta * C, -p.beta * S, 0.0, 0.0, 0.0, 0.0],
        [p.beta * C, p.beta * S - (p.eta2 + p.sigma + p.gamma1 + p.mu1),
         p.mu2, 0.0, 0.0, 0.0],
        [0.0, p.mu1, -(p.mu2 + p.eta5 + p.gamma3), 0.0, 0.0, 0.0],
        [0.0, p.sigma, 0.0, -(p.eta3 + p.gamma2 + p.kappa1), p.kappa2, 0.0],
        [0.0, 0.0, 0.0, p.kappa1, -(p.kappa2 + p.eta6 + p.gamma4), 0.0],
        [0.0, p.gamma1, p.gamma3, p.gamma2, p.gamma4, -p.eta4],
    ])


def jacobian(p: ModelParams, y, model: Model) -> np.ndarray:
    return jacobian_basic(p, y) if model is Model.BASIC else jacobian_extended(p, y)


# ---------------------------------------------------------------------------
# Reproduction numbers and invasion thresholds.

def r0_basic(p: ModelParams) -> float:
    """Basic reproduction number of the 4-compartment model."""
    p.require_basic_analysis()
    return p.beta * p.lambda_recruit / (p.eta1 * (p.eta2 + p.sigma + p.gamma1))


def r0_extended(p: ModelParams) -> float:
    """Reproduction number of the extended model (first-passage form).

    This expression counts transmission over a single stay in C and
    ignores the mu2 return flow Uc -> C; see
    :func:`effective_threshold_extended` for the exact invasion threshold.
    The two coincide when mu1*mu2 == 0.
    """
    p.require_basic_analysis()
    denom = p.eta1 * (p.eta2 + p.sigma + p.gamma1 + p.mu1)
    if denom <= 0.0:
        raise DomainError("r0_extended denominator must be > 0")
    return p.beta * p.lambda_recruit / denom


def effective_threshold_extended(p: ModelParams) -> float:
    """Exact invasion threshold of the extended model.

    Spectral radius of the next-generation matrix restricted to the
    infected block (C, Uc) at the drug-free state.  The block has a single
    transmission row, so the radius has the closed form
    beta*S_f*b / (a*b - mu1*mu2) with a = eta2+sigma+gamma1+mu1 and
    b = mu2+eta5+gamma3.  Differs from :func:`r0_extended` when mu2 > 0.
    """
    p.require_basic_analysis()
    a = p.eta2 + p.sigma + p.gamma1 + p.mu1
    b = p.mu2 + p.eta5 + p.gamma3
    det = a * b - p.mu1 * p.mu2
    if det <= 0.0:
        raise DomainError("singular transition block: a*b - mu1*mu2 must be > 0")
    s_free = p.lambda_recruit / p.eta1
    return p.beta * s_free * b / det


# ---------------------------------------------------------------------------
# Equilibria.

def drug_free_equilibrium(p: ModelParams, model: Model) -> EquilibriumPoint:
    """Steady state with every user/treatment/recovered class at zero."""
    if p.eta1 <= 0.0:
        raise DomainError("drug-free equilibrium needs eta1 > 0")
    s = p.lambda_recruit / p.eta1
    values = (s,) + (0.0,) * (model.ncomp - 1)
    point = CompartmentVector(values, model)
    _check_equilibrium(point, p)
    return EquilibriumPoint(point, kind="drug-free", provenance="closed-form")


def endemic_equilibrium_basic(p: ModelParams) -> EquilibriumPoint:
    """Closed-form drug-addiction equilibrium of the basic model."""
    r0 = r0_basic(p)
    if r0 <= 1.0:
        raise NoEndemicEquilibriumError(
            f"no drug-addiction equilibrium: r0_basic = {r0:.6g} <= 1")
    if p.beta <= 0.0 or p.eta3 + p.gamma2 <= 0.0 or p.eta4 <= 0.0:
        raise DomainError("endemic closed form needs beta, eta3+gamma2, eta4 > 0")
    excess = r0 - 1.0
    s = p.lambda_recruit / (p.eta1 * r0)
    c = p.eta1 / p.beta * excess
    h = p.eta1 * p.sigma / (p.beta * (p.eta3 + p.gamma2)) * excess
    r = (p.eta1 / (p.beta * p.eta4)
         * (p.gamma1 + p.sigma * p.gamma2 / (p.eta3 + p.gamma2)) * excess)
    point = basic_state(s, c, h, r)
    _check_equilibrium(point, p)
    return EquilibriumPoint(point, kind="drug-addiction", provenance="closed-form")


def endemic_equilibrium_extended(p: ModelParams) -> EquilibriumPoint:
    """Closed-form drug-addiction equilibrium of the extended model.

    Exists iff the exact invasion threshold exceeds one, which for
    mu2 > 0 is not the same condition as r0_extended > 1.
    """
    p.require_extended_analysis()
    if p.beta <= 0.0 or p.eta4 <= 0.0:
        raise DomainError("endemic closed form needs beta and eta4 > 0")
    b = p.mu2 + p.eta5 + p.gamma3
    # S* = ((eta2+sigma+gamma1+mu1) - mu1*mu2/b) / beta; this grouping is
    # numerically stabler than subtracting two near-equal large terms.
    s = ((p.eta2 + p.sigma + p.gamma1 + p.mu1) - p.mu1 * p.mu2 / b) / p.beta
    c = (p.lambda_recruit - p.eta1 * s) / (p.beta * s)
    if c <= 0.0:
        raise NoEndemicEquilibriumError(
            f"no drug-addiction equilibrium: C* = {c:.6g} <= 0 "
            f"(effective threshold {effective_threshold_extended(p):.6g} <= 1)")
    uc = p.mu1 * c / b
    bk = p.kappa2 + p.eta6 + p.gamma4
    h = p.sigma * bk * c / p.kappa_determinant()
    uh = p.kappa1 * h / bk
    r = (p.gamma1 * c + p.gamma2 * h + p.gamma3 * uc + p.gamma4 * uh) / p.eta4
    point = extended_state(s, c, uc, h, uh, r)
    _check_equilibrium(point, p)
    return EquilibriumPoint(point, kind="drug-addiction", provenance="closed-form")


def equilibrium_residual(e: EquilibriumPoint, p: ModelParams) -> float:
    """Sup-norm of the reaction term at the equilibrium point."""
    rhs = reaction(e.point, p)
    return float(np.max(np.abs(rhs.array)))


def residual_tolerance(p: ModelParams) -> float:
    """Acceptance scale for equilibrium residuals: 1e-10 * max(1, Lambda)."""
    return 1e-10 * max(1.0, p.lambda_recruit)


def _check_equilibrium(point: CompartmentVector, p: ModelParams) -> None:
    res = float(np.max(np.abs(reaction(point, p).array)))
    if res >= residual_tolerance(p):
        raise DomainError(
            f"equilibrium residual {res:.3e} exceeds {residual_tolerance(p):.3e}")


def endemic_equilibrium_newton(
    p: ModelParams,
    model: Model,
    seed: Iterable[float] | None = None,
    tol: float | None = None,
    max_iter: int = 100,
) -> EquilibriumPoint:
    """Damped Newton root-find on the reaction term.

    Independent oracle for the closed-form equilibria: it shares only the
    reaction evaluation with them, never their algebra.  The Jacobian is
    assembled by central finite differences so the iteration does not rely
    on the analytic Jacobian either.
    """
    if seed is None:
        seed = (100.0, 5.0, 5.0, 50.0) if model is Model.BASIC \
            else (100.0, 5.0, 1.0, 5.0, 1.0, 50.0)
    y = np.asarray(tuple(seed), dtype=float)
    if y.shape != (model.ncomp,):
        raise LayoutError(f"seed must have {model.ncomp} entries")
    if tol is None:
        tol = 1e-12 * max(1.0, p.lambda_recruit)

    def f(v: np.ndarray) -> np.ndarray:
        return reaction(CompartmentVector(tuple(v), model), p).array

    def fd_jacobian(v: np.ndarray) -> np.ndarray:
        n = v.size
        jac = np.empty((n, n))
        for i in range(n):
            step = 1e-7 * max(1.0, abs(v[i]))
            vp, vm = v.copy(), v.copy()
            vp[i] += step
            vm[i] -= step
            jac[:, i] = (f(vp) - f(vm)) / (2.0 * step)
        return jac

    res = f(y)
    for _ in range(max_iter):
        norm = np.max(np.abs(res))
        if norm < tol:
            break
        try:
            delta = np.linalg.solve(fd_jacobian(y), -res)
        except np.linalg.LinAlgError as exc:
            raise DomainError(f"Newton iteration broke down: {exc}") from exc
        # damping: halve the step until the residual decreases
        scale = 1.0
        for _ in range(40):
            y_new = y + scale * delta
            res_new = f(y_new)
            if np.max(np.abs(res_new)) < norm:
                break
            scale *= 0.5
        y, res = y_new, res_new
    else:
        raise DomainError(
            f"Newton did not converge in {max_iter} iterations "
            f"(residual {np.max(np.abs(res)):.3e})")

    kind = "drug-free" if np.max(np.abs(y[1:])) < tol * 10.0 else "drug-addiction"
    return EquilibriumPoint(CompartmentVector(tuple(y), model),
                            kind=kind, provenance="root-found")
