"""Reaction terms, thresholds, and equilibria.

Expected values are frozen from independent oracles: hand scalar
arithmetic for reaction examples, the trace of -T K^-1 for reproduction
numbers, brute-force eigenvalues for the invasion threshold, and a damped
Newton root-find for the closed-form equilibria.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings

from schrkit import (
    DomainError,
    LayoutError,
    Model,
    ModelParams,
    NoEndemicEquilibriumError,
    ParameterError,
    basic_state,
    drug_free_equilibrium,
    effective_threshold_extended,
    endemic_equilibrium_basic,
    endemic_equilibrium_extended,
    endemic_equilibrium_newton,
    equilibrium_residual,
    extended_state,
    r0_basic,
    r0_extended,
    reaction_basic,
    reaction_extended,
    reproduction_trace,
)
from schrkit.kinetics import (
    reaction_basic_rates,
    reaction_extended_rates,
    residual_tolerance,
)

from conftest import basic_params


# ---------------------------------------------------------------------------
# reaction terms

def test_reaction_basic_origin(p_basic_endemic):
    out = reaction_basic(basic_state(0, 0, 0, 0), p_basic_endemic)
    assert out.values == (2.15, 0.0, 0.0, 0.0)


def test_reaction_basic_at_drug_free(p_basic_endemic):
    e = drug_free_equilibrium(p_basic_endemic, Model.BASIC)
    out = reaction_basic(e.point, p_basic_endemic)
    assert np.max(np.abs(out.array)) < 1e-14


def test_reaction_basic_hand_example(p_basic_endemic):
    # independent scalar arithmetic, term by term
    s, c, h, r = 30.0, 10.0, 5.0, 0.0
    exp_s = 2.15 - 0.002 * 30.0 * 10.0 - 0.01 * 30.0        # 1.25
    exp_c = 0.002 * 30.0 * 10.0 - (0.01 + 0.2 + 0.05) * 10  # -2.0
    exp_h = -(0.01 + 0.05) * 5.0 + 0.2 * 10.0               # 1.7
    exp_r = 0.05 * 10.0 + 0.05 * 5.0 - 0.01 * 0.0           # 0.75
    out = reaction_basic(basic_state(s, c, h, r), p_basic_endemic).array
    assert out == pytest.approx([exp_s, exp_c, exp_h, exp_r], rel=1e-14)
    assert out == pytest.approx([1.25, -2.0, 1.7, 0.75], rel=1e-12)


def test_reaction_layout_mismatch(p_basic_endemic):
    with pytest.raises(LayoutError):
        reaction_basic(extended_state(1, 1, 1, 1, 1, 1), p_basic_endemic)
    with pytest.raises(LayoutError):
        reaction_extended(basic_state(1, 1, 1, 1), p_basic_endemic)


def test_reaction_extended_origin(p_ext_endemic):
    out = reaction_extended(extended_state(0, 0, 0, 0, 0, 0), p_ext_endemic)
    assert out.values == (2.15, 0.0, 0.0, 0.0, 0.0, 0.0)


def test_reaction_extended_at_drug_free(p_ext_endemic):
    e = drug_free_equilibrium(p_ext_endemic, Model.EXTENDED)
    out = reaction_extended(e.point, p_ext_endemic)
    assert np.max(np.abs(out.array)) < 1e-14


def _extended_rhs_reference(y, p):
    """Second independent arrangement of the extended right-hand sides."""
    s, c, uc, h, uh, r = y
    new_use = p.beta * s * c
    return (
        p.lambda_recruit - new_use - p.eta1 * s,
        new_use + p.mu2 * uc - (p.eta2 + p.sigma + p.gamma1 + p.mu1) * c,
        p.mu1 * c - (p.eta5 + p.gamma3 + p.mu2) * uc,
        p.sigma * c + p.kappa2 * uh - (p.eta3 + p.gamma2 + p.kappa1) * h,
        p.kappa1 * h - (p.eta6 + p.gamma4 + p.kappa2) * uh,
        p.gamma1 * c + p.gamma2 * h + p.gamma3 * uc + p.gamma4 * uh - p.eta4 * r,
    )


def test_reaction_extended_hand_example(p_ext_endemic):
    y = (30.0, 10.0, 3.0, 5.0, 3.0, 0.0)
    out = reaction_extended(extended_state(*y), p_ext_endemic).array
    # hand-evaluated single terms
    assert out[1] == pytest.approx(0.6 - 0.27 * 10 + 0.01 * 3, rel=1e-12)   # -2.07
    assert out[2] == pytest.approx(0.1 - 0.05 * 3, rel=1e-12)               # -0.05
    assert out[4] == pytest.approx(0.05 - 0.05 * 3, rel=1e-12)              # -0.10
    # full cross-check against the independent arrangement
    assert out == pytest.approx(_extended_rhs_reference(y, p_ext_endemic),
                                rel=1e-13, abs=1e-15)


@given(basic_params(r0_min=0.2, r0_max=8.0))
@settings(max_examples=60, deadline=None)
def test_reduction_extended_matches_basic_exactly(p):
    """With every treatment-related rate at zero, the extended right-hand
    sides reproduce the basic ones on the shared compartments exactly."""
    rng = np.random.default_rng(hash(p.beta) % 2**32)
    s, c, h, r = rng.uniform(0.0, 100.0, size=4)
    basic = reaction_basic_rates(s, c, h, r, p)
    ext = reaction_extended_rates(s, c, 0.0, h, 0.0, r, p)
    assert (ext[0], ext[1], ext[3], ext[5]) == basic
    assert ext[2] == 0.0 and ext[4] == 0.0


# ---------------------------------------------------------------------------
# reproduction numbers

def test_r0_basic_values(p_basic_endemic, p_basic_free):
    assert r0_basic(p_basic_endemic) == pytest.approx(
        0.002 * 2.15 / (0.01 * 0.26), rel=1e-14)
    assert r0_basic(p_basic_endemic) == pytest.approx(1.6538461538461537, rel=1e-12)
    assert r0_basic(p_basic_free) == pytest.approx(0.8847736625514404, rel=1e-12)


def test_r0_basic_trace_oracle(p_basic_endemic, p_basic_free):
    for p in (p_basic_endemic, p_basic_free):
        assert reproduction_trace(p, Model.BASIC) == pytest.approx(
            r0_basic(p), rel=1e-12)


def test_r0_basic_zero_beta(p_basic_endemic):
    import dataclasses
    p = dataclasses.replace(p_basic_endemic, beta=0.0)
    assert r0_basic(p) == 0.0


def test_r0_basic_zero_denominator():
    p = ModelParams(lambda_recruit=1.0, beta=0.1, eta1=0.0, eta2=0.1,
                    eta3=0.1, eta4=0.1, sigma=0.1, gamma1=0.1, gamma2=0.1,
                    d=0.0)
    with pytest.raises(ParameterError):
        r0_basic(p)


def test_r0_extended_values(p_ext_endemic, p_ext_free):
    assert r0_extended(p_ext_endemic) == pytest.approx(0.0043 / 0.0027, rel=1e-12)
    assert r0_extended(p_ext_endemic) == pytest.approx(1.5925925925925926, rel=1e-12)
    assert r0_extended(p_ext_free) == pytest.approx(
        0.00215 / (0.03 * 0.131), rel=1e-12)
    assert r0_extended(p_ext_free) == pytest.approx(0.5470737913486005, rel=1e-12)


def test_r0_extended_reduces_to_basic(p_ext_endemic):
    import dataclasses
    p = dataclasses.replace(p_ext_endemic, mu1=0.0)
    assert r0_extended(p) == pytest.approx(r0_basic(p), rel=1e-14)


def test_r0_extended_trace_matches_when_no_return_flow(p_ext_endemic):
    """With mu2 = 0 the first-passage formula and the transmission/
    transition trace coincide."""
    import dataclasses
    p = dataclasses.replace(p_ext_endemic, mu2=0.0)
    assert reproduction_trace(p, Model.EXTENDED) == pytest.approx(
        r0_extended(p), rel=1e-12)


def test_extended_trace_equals_effective_threshold(p_ext_endemic, p_ext_free):
    """With mu2 > 0 the trace gives the exact invasion threshold, which is
    deliberately reported separately from the first-passage formula."""
    for p in (p_ext_endemic, p_ext_free):
        assert reproduction_trace(p, Model.EXTENDED) == pytest.approx(
            effective_threshold_extended(p), rel=1e-12)


def test_effective_threshold_brute_force_oracle(p_ext_endemic):
    """Pin the invasion threshold against eigenvalues of the numerically
    assembled 2x2 next-generation block."""
    p = p_ext_endemic
    s_free = p.lambda_recruit / p.eta1
    a = p.eta2 + p.sigma + p.gamma1 + p.mu1
    b = p.mu2 + p.eta5 + p.gamma3
    t = np.array([[p.beta * s_free, 0.0], [0.0, 0.0]])
    k = np.array([[-a, p.mu2], [p.mu1, -b]])
    ngm = -t @ np.linalg.inv(k)
    rho = max(abs(np.linalg.eigvals(ngm)))
    assert effective_threshold_extended(p) == pytest.approx(rho, rel=1e-12)
    assert effective_threshold_extended(p) == pytest.approx(
        1.6044776119402984, rel=1e-12)


def test_effective_threshold_edge_cases(p_ext_endemic):
    import dataclasses
    p0 = dataclasses.replace(p_ext_endemic, mu2=0.0)
    assert effective_threshold_extended(p0) == pytest.approx(
        r0_extended(p0), rel=1e-14)
    pz = dataclasses.replace(p_ext_endemic, beta=0.0)
    assert effective_threshold_extended(pz) == 0.0
    bad = ModelParams(lambda_recruit=1.0, beta=0.1, eta1=0.1, eta2=0.0,
                      eta3=0.1, eta4=0.1, sigma=0.0, gamma1=0.0, gamma2=0.1,
                      d=0.0, mu1=0.5, mu2=0.5)
    # a*b - mu1*mu2 = 0.5*0.5 - 0.25 = 0: singular transition block
    with pytest.raises((DomainError, ParameterError)):
        effective_threshold_extended(bad)


# ---------------------------------------------------------------------------
# equilibria

def test_drug_free_equilibrium_values(p_basic_endemic, p_basic_free):
    e = drug_free_equilibrium(p_basic_endemic, Model.BASIC)
    assert e.point.values == (215.0, 0.0, 0.0, 0.0)
    assert e.kind == "drug-free" and e.provenance == "closed-form"
    assert equilibrium_residual(e, p_basic_endemic) < 1e-14

    e = drug_free_equilibrium(p_basic_free, Model.BASIC)
    assert e.point.values[0] == pytest.approx(2.15 / 0.03, rel=1e-14)

    import dataclasses
    p0 = dataclasses.replace(p_basic_endemic, lambda_recruit=0.0)
    assert drug_free_equilibrium(p0, Model.BASIC).point.values == (0.0,) * 4

    pbad = dataclasses.replace(p_basic_endemic, eta1=0.0)
    with pytest.raises(DomainError):
        drug_free_equilibrium(pbad, Model.BASIC)


BASIC_ENDEMIC_POINT = (130.0, 3.2692307692307687, 10.897435897435894,
                       70.83333333333331)


def test_endemic_basic_closed_form(p_basic_endemic):
    e = endemic_equilibrium_basic(p_basic_endemic)
    assert e.point.values == pytest.approx(BASIC_ENDEMIC_POINT, rel=1e-12)
    assert equilibrium_residual(e, p_basic_endemic) < residual_tolerance(p_basic_endemic)
    # identity beta * S_star = eta2 + sigma + gamma1
    assert p_basic_endemic.beta * e.point.values[0] == pytest.approx(0.26, rel=1e-12)


def test_endemic_basic_newton_oracle(p_basic_endemic):
    e = endemic_equilibrium_basic(p_basic_endemic)
    n = endemic_equilibrium_newton(p_basic_endemic, Model.BASIC,
                                   seed=(100.0, 5.0, 5.0, 50.0))
    assert n.provenance == "root-found"
    assert n.point.values == pytest.approx(e.point.values, rel=1e-8)


def test_endemic_basic_below_threshold(p_basic_free):
    with pytest.raises(NoEndemicEquilibriumError):
        endemic_equilibrium_basic(p_basic_free)


def test_endemic_basic_sigma_zero(p_basic_endemic):
    import dataclasses
    p = dataclasses.replace(p_basic_endemic, sigma=0.0)
    assert r0_basic(p) > 1.0
    e = endemic_equilibrium_basic(p)
    assert e.point.values[2] == 0.0  # H* proportional to sigma


EXT_ENDEMIC_POINT = (134.0, 3.0223880597014916, 0.6044776119402984,
                     8.889376646180857, 1.777875329236171, 66.70588235294116)


def test_endemic_extended_closed_form(p_ext_endemic):
    e = endemic_equilibrium_extended(p_ext_endemic)
    assert e.point.values == pytest.approx(EXT_ENDEMIC_POINT, rel=1e-12)
    assert equilibrium_residual(e, p_ext_endemic) < residual_tolerance(p_ext_endemic)


def test_endemic_extended_newton_oracle(p_ext_endemic):
    e = endemic_equilibrium_extended(p_ext_endemic)
    n = endemic_equilibrium_newton(p_ext_endemic, Model.EXTENDED)
    assert n.point.values == pytest.approx(e.point.values, rel=1e-8)


def test_endemic_extended_reduces_to_basic(p_ext_endemic):
    import dataclasses
    p = dataclasses.replace(p_ext_endemic, mu1=0.0, mu2=0.0,
                            kappa1=0.0, kappa2=0.0)
    ext = endemic_equilibrium_extended(p)
    bas = endemic_equilibrium_basic(p)
    s, c, uc, h, uh, _ = ext.point.values
    assert (s, c, h) == pytest.approx(bas.point.values[:3], rel=1e-12)
    assert uc == 0.0 and uh == 0.0
    # R* carries the gamma3/gamma4 flows, absent here up to Uc* = Uh* = 0
    assert ext.point.values[5] == pytest.approx(
        (p.gamma1 * c + p.gamma2 * h) / p.eta4, rel=1e-12)


def test_endemic_extended_below_threshold(p_ext_free):
    assert effective_threshold_extended(p_ext_free) < 1.0
    with pytest.raises(NoEndemicEquilibriumError):
        endemic_equilibrium_extended(p_ext_free)


def test_equilibrium_residual_perturbed(p_basic_endemic):
    from schrkit import EquilibriumPoint
    e = endemic_equilibrium_basic(p_basic_endemic)
    vals = list(e.point.values)
    vals[0] += 1.0
    perturbed = EquilibriumPoint(basic_state(*vals), "drug-addiction", "closed-form")
    assert equilibrium_residual(perturbed, p_basic_endemic) > 1e-4


# ---------------------------------------------------------------------------
# parameter validation

def test_params_reject_negative():
    with pytest.raises(ParameterError, match="beta"):
        ModelParams(lambda_recruit=1.0, beta=-1.0, eta1=0.1, eta2=0.1,
                    eta3=0.1, eta4=0.1, sigma=0.1, gamma1=0.1, gamma2=0.1,
                    d=0.1)


def test_params_reject_nonfinite():
    with pytest.raises(ParameterError, match="lambda_recruit"):
        ModelParams(lambda_recruit=math.inf, beta=1.0, eta1=0.1, eta2=0.1,
                    eta3=0.1, eta4=0.1, sigma=0.1, gamma1=0.1, gamma2=0.1,
                    d=0.1)


def test_extended_analysis_requirements():
    p = ModelParams(lambda_recruit=1.0, beta=0.01, eta1=0.1, eta2=0.1,
                    eta3=0.1, eta4=0.1, sigma=0.1, gamma1=0.1, gamma2=0.1,
                    d=0.1)  # all extended rates zero
    with pytest.raises(ParameterError, match="mu2"):
        p.require_extended_analysis()


# ---------------------------------------------------------------------------
# property tests

@given(basic_params(r0_min=1.05, r0_max=8.0))
@settings(max_examples=80, deadline=None)
def test_endemic_point_properties(p):
    e = endemic_equilibrium_basic(p)
    s, c, h, r = e.point.values
    lam = p.lambda_recruit
    # residual scales with the largest source term
    assert equilibrium_residual(e, p) < 1e-10 * max(1.0, lam)
    # conservation identities of the drug-addiction state
    assert lam == pytest.approx(p.beta * s * c + p.eta1 * s, rel=1e-12)
    assert p.eta2 + p.sigma + p.gamma1 == pytest.approx(p.beta * s, rel=1e-12)
    # threshold sign: C* > 0 exactly when r0 > 1
    assert c > 0.0


@given(basic_params(r0_min=0.2, r0_max=8.0))
@settings(max_examples=80, deadline=None)
def test_trace_oracle_property(p):
    assert reproduction_trace(p, Model.BASIC) == pytest.approx(
        r0_basic(p), rel=1e-12)


@given(basic_params(r0_min=0.2, r0_max=0.999))
@settings(max_examples=40, deadline=None)
def test_endemic_absent_below_threshold(p):
    # closed-form C* = eta1/beta (r0 - 1) is negative here
    c_formula = p.eta1 / p.beta * (r0_basic(p) - 1.0) if p.beta > 0 else -1.0
    assert c_formula < 0.0
    with pytest.raises(NoEndemicEquilibriumError):
        endemic_equilibrium_basic(p)
