"""Grid, stencil, steppers, and integration diagnostics."""

import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schrkit import (
    DomainError,
    LayoutError,
    Model,
    SolverAbortError,
    drug_free_equilibrium,
    endemic_equilibrium_basic,
    endemic_equilibrium_extended,
)
from schrkit.rdsolver import (
    Field,
    Grid1D,
    SimConfig,
    build_initial_field,
    discrete_laplacian,
    integrate,
    mass_integral,
    stable_dt,
    steady_state_residual,
    step_explicit,
    step_imex,
)

GRID = Grid1D(2.0, 40)


# ---------------------------------------------------------------------------
# grid

def test_grid_invariants():
    g = Grid1D(2.0, 40)
    assert g.dx * g.mx == pytest.approx(g.length, rel=1e-15)
    assert g.weights.sum() == pytest.approx(g.length, rel=1e-14)
    assert g.nodes[0] == 0.0 and g.nodes[-1] == pytest.approx(2.0, rel=1e-15)
    with pytest.raises(DomainError):
        Grid1D(2.0, 3)
    with pytest.raises(DomainError):
        Grid1D(0.0, 40)


# ---------------------------------------------------------------------------
# discrete Laplacian

def test_laplacian_constant_is_zero():
    u = np.full(41, 7.5)
    assert np.all(discrete_laplacian(u, GRID) == 0.0)


def test_laplacian_quadratic_exact():
    # the stencil (with reflection) is exact for x^2 at interior nodes and
    # returns the same value 2 at the reflecting boundary
    u = GRID.nodes ** 2
    lap = discrete_laplacian(u, GRID)
    assert lap[1:-1] == pytest.approx(np.full(39, 2.0), rel=1e-11)
    # hand evaluation at j=0: u_{-1} = u_1, so lap = 2 u_1 / dx^2 = 2
    assert lap[0] == pytest.approx(2.0 * u[1] / GRID.dx ** 2, rel=1e-14)
    assert lap[0] == pytest.approx(2.0, rel=1e-12)


def test_laplacian_cosine_error_bound():
    u = np.cos(np.pi * GRID.nodes / 2.0)
    lap = discrete_laplacian(u, GRID)
    exact = -((np.pi / 2.0) ** 2) * u
    err = np.max(np.abs(lap - exact))
    assert err < 2e-3
    # leading Taylor term of the stencil error: dx^2/12 * max|u''''|
    bound = (np.pi / 2.0) ** 4 * GRID.dx ** 2 / 12.0
    assert err <= bound * 1.01


def test_laplacian_length_mismatch():
    with pytest.raises(LayoutError):
        discrete_laplacian(np.zeros(40), GRID)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=40, deadline=None)
def test_laplacian_moves_no_mass(seed):
    """Trapezoid-weighted sum of the stencil output vanishes for every
    input: diffusion conserves the discrete mass exactly."""
    rng = np.random.default_rng(seed)
    u = rng.uniform(-50.0, 50.0, GRID.mx + 1)
    lap = discrete_laplacian(u, GRID)
    total = float(GRID.weights @ lap)
    scale = float(np.abs(GRID.weights * lap).sum()) + 1.0
    assert abs(total) < 1e-12 * scale


# ---------------------------------------------------------------------------
# stable_dt

def test_stable_dt_diffusion_bound(p_basic_endemic):
    assert stable_dt(p_basic_endemic, GRID) == pytest.approx(0.0125, rel=1e-12)
    assert 1e-2 <= stable_dt(p_basic_endemic, GRID)


def test_stable_dt_reaction_only(p_basic_endemic):
    p = dataclasses.replace(p_basic_endemic, d=0.0)
    # max |row sum| of the Jacobian at the drug-free point:
    # S row: eta1 + beta*Lambda/eta1 = 0.01 + 0.43
    rho = 0.01 + 0.002 * 215.0
    assert stable_dt(p, GRID) == pytest.approx(0.1 / rho, rel=1e-12)


def test_stable_dt_fine_grid_rejects_default_step(p_basic_endemic):
    fine = Grid1D(2.0, 80)
    assert stable_dt(p_basic_endemic, fine) == pytest.approx(0.003125, rel=1e-12)
    cfg = SimConfig(params=p_basic_endemic, model=Model.BASIC, grid=fine,
                    initial=(30.0, 10.0, 5.0, 0.0), dt=1e-2, t_end=1.0)
    with pytest.raises(DomainError):
        integrate(cfg)
    with pytest.warns(UserWarning):
        traj = integrate(dataclasses.replace(cfg, allow_unstable_dt=True,
                                             t_end=0.05, stride=1))
    assert traj.times[-1] == pytest.approx(0.05)


# ---------------------------------------------------------------------------
# steppers

def test_step_explicit_fixed_point(p_basic_endemic):
    e = drug_free_equilibrium(p_basic_endemic, Model.BASIC)
    f = Field.homogeneous(GRID, Model.BASIC, e.point.values)
    out = step_explicit(f, p_basic_endemic, 0.01)
    assert np.max(np.abs(out.data - f.data)) < 1e-14
    assert out.t == pytest.approx(0.01)


def test_step_explicit_linear_decay(p_basic_endemic):
    p = dataclasses.replace(p_basic_endemic, lambda_recruit=0.0, beta=0.0)
    f = Field.homogeneous(GRID, Model.BASIC, (30.0, 0.0, 0.0, 0.0))
    out = step_explicit(f, p, 0.01)
    assert out.compartment("S") == pytest.approx(
        np.full(41, 30.0 * (1.0 - 0.01 * 0.01)), rel=1e-15)


def test_step_explicit_one_step_from_reference_state(p_basic_endemic):
    f = Field.homogeneous(GRID, Model.BASIC, (30.0, 10.0, 5.0, 0.0))
    out = step_explicit(f, p_basic_endemic, 0.01)
    # homogeneous field: diffusion contributes nothing; C += dt * (-2.0)
    assert out.compartment("C") == pytest.approx(np.full(41, 9.98), rel=1e-14)
    assert out.compartment("S") == pytest.approx(np.full(41, 30.0125), rel=1e-14)


def test_step_imex_fixed_point(p_basic_endemic):
    e = drug_free_equilibrium(p_basic_endemic, Model.BASIC)
    f = Field.homogeneous(GRID, Model.BASIC, e.point.values)
    out = step_imex(f, p_basic_endemic, 0.01)
    assert np.max(np.abs(out.data - f.data)) < 1e-12


def test_step_imex_pure_diffusion_constant(p_basic_endemic):
    p = dataclasses.replace(p_basic_endemic, lambda_recruit=0.0, beta=0.0,
                            eta1=0.0, eta2=0.0, eta3=0.0, eta4=0.0,
                            sigma=0.0, gamma1=0.0, gamma2=0.0)
    f = Field.homogeneous(GRID, Model.BASIC, (4.0, 3.0, 2.0, 1.0))
    out = step_imex(f, p, 0.01)
    assert np.max(np.abs(out.data - f.data)) < 1e-13


def test_step_imex_discrete_eigenmode_decay(p_basic_endemic):
    """One implicit diffusion step scales the first cosine mode by
    1 / (1 + dt d lam1_h) where lam1_h is the discrete eigenvalue."""
    p = dataclasses.replace(p_basic_endemic, lambda_recruit=0.0, beta=0.0,
                            eta1=0.0, eta2=0.0, eta3=0.0, eta4=0.0,
                            sigma=0.0, gamma1=0.0, gamma2=0.0)
    dt, d, dx = 0.01, 0.1, GRID.dx
    profile = np.cos(np.pi * GRID.nodes / 2.0)
    data = np.tile(2.0 + profile, (4, 1))
    f = Field(GRID, Model.BASIC, data)
    out = step_imex(f, p, dt)
    lam_h = 2.0 * (1.0 - np.cos(np.pi * dx / 2.0)) / dx ** 2
    expected = 2.0 + profile / (1.0 + dt * d * lam_h)
    assert out.data[0] == pytest.approx(expected, rel=1e-12)


def test_imex_equals_explicit_without_diffusion(p_basic_endemic):
    """With d = 0 the implicit solve is the identity, so both steppers
    perform the same explicit reaction update bit for bit."""
    p = dataclasses.replace(p_basic_endemic, d=0.0)
    f = Field.homogeneous(GRID, Model.BASIC, (30.0, 10.0, 5.0, 1.0))
    f.data[1] += np.cos(np.pi * GRID.nodes / 2.0)
    a = step_explicit(f, p, 0.01)
    b = step_imex(f, p, 0.01)
    assert np.array_equal(a.data, b.data)


def test_steppers_leave_input_untouched(p_basic_endemic):
    f = Field.homogeneous(GRID, Model.BASIC, (30.0, 10.0, 5.0, 1.0))
    f.data[1] += np.cos(np.pi * GRID.nodes / 2.0)
    pristine = f.data.copy()
    step_explicit(f, p_basic_endemic, 0.01)
    step_imex(f, p_basic_endemic, 0.01)
    assert np.array_equal(f.data, pristine)
    assert f.t == 0.0


def test_pure_diffusion_conserves_compartment_mass(p_basic_endemic):
    """With all rates off, the no-flux scheme keeps each compartment's
    integral constant to roundoff over a full integration."""
    p = dataclasses.replace(p_basic_endemic, lambda_recruit=0.0, beta=0.0,
                            eta1=0.0, eta2=0.0, eta3=0.0, eta4=0.0,
                            sigma=0.0, gamma1=0.0, gamma2=0.0)
    cfg = SimConfig(params=p, model=Model.BASIC, grid=GRID,
                    initial=(30.0, 10.0, 5.0, 1.0), perturb_amplitude=0.9,
                    dt=0.01, t_end=20.0, stride=200)
    traj = integrate(cfg)
    drift = np.abs(traj.masses - traj.masses[0]).max()
    assert drift < 1e-10


def test_step_abort_on_negativity(p_basic_endemic):
    p = dataclasses.replace(p_basic_endemic, eta1=200.0)
    f = Field.homogeneous(GRID, Model.BASIC, (1.0, 0.0, 0.0, 0.0))
    with pytest.raises(SolverAbortError):
        step_explicit(f, p, 0.01)


# ---------------------------------------------------------------------------
# integrate

def test_integrate_homogeneous_invariance(p_basic_endemic):
    cfg = SimConfig(params=p_basic_endemic, model=Model.BASIC, grid=GRID,
                    initial=(30.0, 10.0, 5.0, 0.0), dt=0.01, t_end=20.0,
                    stride=500)
    traj = integrate(cfg)
    assert traj.termination == "reached-t_end"
    for fld in traj.fields:
        spread = fld.data.max(axis=1) - fld.data.min(axis=1)
        assert np.all(spread < 1e-10)


def test_integrate_deterministic(p_basic_endemic):
    cfg = SimConfig(params=p_basic_endemic, model=Model.BASIC, grid=GRID,
                    initial=(30.0, 10.0, 5.0, 1.0), perturb_amplitude=1.0,
                    dt=0.01, t_end=5.0, stride=100)
    t1 = integrate(cfg)
    t2 = integrate(cfg)
    assert np.array_equal(t1.final.data, t2.final.data)
    assert np.array_equal(t1.masses, t2.masses)


def test_integrate_sampling_layout(p_basic_endemic):
    cfg = SimConfig(params=p_basic_endemic, model=Model.BASIC, grid=GRID,
                    initial=(30.0, 10.0, 5.0, 0.0), dt=0.01, t_end=5.0,
                    stride=100)
    traj = integrate(cfg)
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(5.0)
    assert np.all(np.diff(traj.times) > 0)
    assert len(traj.fields) == len(traj.times) == len(traj.masses)


def test_integrate_abort_keeps_diagnostic_sample(p_basic_endemic):
    p = dataclasses.replace(p_basic_endemic, eta1=200.0, d=0.0)
    cfg = SimConfig(params=p, model=Model.BASIC, grid=GRID,
                    initial=(1.0, 0.0, 0.0, 0.0), dt=0.01, t_end=5.0,
                    stride=100, allow_unstable_dt=True)
    with pytest.warns(UserWarning):
        traj = integrate(cfg)
    assert traj.termination == "aborted"
    assert "negative" in traj.abort_reason
    assert traj.min_seen < -1e-12
    assert len(traj.fields) == len(traj.times)


def test_integrate_steady_state_stop():
    from schrkit import ModelParams
    p = ModelParams(lambda_recruit=1.0, beta=0.01, eta1=0.5, eta2=0.5,
                    eta3=0.5, eta4=0.5, sigma=0.1, gamma1=0.1, gamma2=0.1,
                    d=0.1)
    cfg = SimConfig(params=p, model=Model.BASIC, grid=GRID,
                    initial=(3.0, 1.0, 1.0, 0.0), dt=0.01, t_end=500.0,
                    stride=100, steady_stop=True)
    traj = integrate(cfg)
    assert traj.termination == "steady-state"
    assert traj.times[-1] < 500.0
    assert traj.residuals[-1] < 1e-8 * max(1.0, p.lambda_recruit)


def test_explicit_initial_field(p_basic_endemic):
    data = np.tile(np.array([30.0, 10.0, 5.0, 1.0])[:, None], (1, 41))
    data[1] += np.cos(np.pi * GRID.nodes / 2.0)
    f = Field(GRID, Model.BASIC, data, t=3.0)
    cfg = SimConfig(params=p_basic_endemic, model=Model.BASIC, grid=GRID,
                    initial_field=f, dt=0.01, t_end=1.0, stride=50)
    traj = integrate(cfg)
    assert traj.times[0] == 0.0  # supplied field restarts the clock
    assert np.array_equal(traj.fields[0].data, data)

    wrong_grid = Field(Grid1D(2.0, 20), Model.BASIC,
                       np.tile(data[:, ::2], 1), t=0.0)
    with pytest.raises(LayoutError):
        integrate(SimConfig(params=p_basic_endemic, model=Model.BASIC,
                            grid=GRID, initial_field=wrong_grid,
                            dt=0.01, t_end=1.0))


def test_initial_field_perturbation_and_negativity(p_basic_endemic):
    cfg = SimConfig(params=p_basic_endemic, model=Model.BASIC, grid=GRID,
                    initial=(30.0, 10.0, 5.0, 1.0), perturb_amplitude=0.5,
                    perturb_mode=2)
    f = build_initial_field(cfg)
    x = GRID.nodes
    assert f.compartment("S") == pytest.approx(
        30.0 + 0.5 * np.cos(2 * np.pi * x / 2.0), rel=1e-14)
    bad = SimConfig(params=p_basic_endemic, model=Model.BASIC, grid=GRID,
                    initial=(30.0, 10.0, 5.0, 0.0), perturb_amplitude=0.5)
    with pytest.raises(DomainError):
        build_initial_field(bad)  # R = 0 - 0.5 cos(...) dips negative


# ---------------------------------------------------------------------------
# diagnostics

def test_mass_integral_values(p_basic_endemic):
    f = Field.homogeneous(GRID, Model.BASIC, (30.0, 0.0, 0.0, 0.0))
    assert mass_integral(f)[0] == pytest.approx(60.0, rel=1e-14)

    e = drug_free_equilibrium(p_basic_endemic, Model.BASIC)
    f = Field.homogeneous(GRID, Model.BASIC, e.point.values)
    assert mass_integral(f) == pytest.approx([2 * 215.0, 0, 0, 0], abs=1e-12)

    f = Field.homogeneous(GRID, Model.BASIC, (0.0, 0.0, 0.0, 0.0))
    f.data[0] = 5.0 * GRID.nodes  # ramp 0 -> 10
    assert mass_integral(f)[0] == pytest.approx(10.0, rel=1e-14)


def test_steady_state_residual_values(p_basic_endemic):
    e_free = drug_free_equilibrium(p_basic_endemic, Model.BASIC)
    f = Field.homogeneous(GRID, Model.BASIC, e_free.point.values)
    assert steady_state_residual(f, p_basic_endemic) < 1e-12

    e_star = endemic_equilibrium_basic(p_basic_endemic)
    f = Field.homogeneous(GRID, Model.BASIC, e_star.point.values)
    assert steady_state_residual(f, p_basic_endemic) < 1e-10

    f = Field.homogeneous(GRID, Model.BASIC, (30.0, 10.0, 5.0, 0.0))
    assert steady_state_residual(f, p_basic_endemic) > 1.0


def test_mass_balance_identity(p_basic_endemic):
    """Equal death rates: per-step discrete mass follows
    M' = Lambda*L - eta*M exactly (forward difference at stride 1)."""
    cfg = SimConfig(params=p_basic_endemic, model=Model.BASIC, grid=GRID,
                    initial=(30.0, 10.0, 5.0, 0.0), dt=0.01, t_end=10.0,
                    stride=1)
    traj = integrate(cfg)
    masses = traj.masses.sum(axis=1)
    lam_l = p_basic_endemic.lambda_recruit * GRID.length
    for i in range(len(masses) - 1):
        fd = (masses[i + 1] - masses[i]) / 0.01
        model = lam_l - p_basic_endemic.eta1 * masses[i]
        assert abs(fd - model) < 1e-6 * abs(model)


def test_mass_balance_identity_extended(p_ext_endemic):
    cfg = SimConfig(params=p_ext_endemic, model=Model.EXTENDED, grid=GRID,
                    initial=(30.0, 10.0, 3.0, 5.0, 3.0, 0.0), dt=0.01,
                    t_end=10.0, stride=1)
    traj = integrate(cfg)
    masses = traj.masses.sum(axis=1)
    lam_l = p_ext_endemic.lambda_recruit * GRID.length
    for i in range(len(masses) - 1):
        fd = (masses[i + 1] - masses[i]) / 0.01
        model = lam_l - p_ext_endemic.eta1 * masses[i]
        assert abs(fd - model) < 1e-6 * abs(model)


def test_imex_explicit_agreement(p_basic_endemic):
    """Both steppers land within 1e-3 of each other at T=10 with dt=1e-3
    on a spatially perturbed endemic scenario."""
    base = dict(params=p_basic_endemic, model=Model.BASIC, grid=GRID,
                initial=(30.0, 10.0, 5.0, 1.0), perturb_amplitude=1.0,
                dt=1e-3, t_end=10.0, stride=1000)
    t_exp = integrate(SimConfig(stepper="explicit", **base))
    t_imx = integrate(SimConfig(stepper="imex", **base))
    diff = np.max(np.abs(t_exp.final.data - t_imx.final.data))
    assert diff < 1e-3


def test_reduction_consistency_trajectories(p_basic_endemic):
    """Extended model with every treatment rate at zero follows the basic
    trajectory to roundoff on identical initial data."""
    p_ext = dataclasses.replace(p_basic_endemic, eta5=0.0, eta6=0.0,
                                gamma3=0.0, gamma4=0.0, mu1=0.0, mu2=0.0,
                                kappa1=0.0, kappa2=0.0)
    basic = integrate(SimConfig(params=p_basic_endemic, model=Model.BASIC,
                                grid=GRID, initial=(30.0, 10.0, 5.0, 0.0),
                                dt=0.01, t_end=10.0, stride=500))
    ext = integrate(SimConfig(params=p_ext, model=Model.EXTENDED, grid=GRID,
                              initial=(30.0, 10.0, 0.0, 5.0, 0.0, 0.0),
                              dt=0.01, t_end=10.0, stride=500))
    sub = ext.final.data[[0, 1, 3, 5]]
    assert np.max(np.abs(sub - basic.final.data)) < 1e-10
    assert np.max(np.abs(ext.final.data[[2, 4]])) == 0.0


def test_extended_equilibrium_is_fixed_point(p_ext_endemic):
    e = endemic_equilibrium_extended(p_ext_endemic)
    f = Field.homogeneous(GRID, Model.EXTENDED, e.point.values)
    out = step_explicit(f, p_ext_endemic, 0.01)
    assert np.max(np.abs(out.data - f.data)) < 1e-13
