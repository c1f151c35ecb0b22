"""schrkit: spatio-temporal cocaine-heroin epidemic dynamics.

Reaction-diffusion simulation of the 4-compartment SCHR model and its
6-compartment treatment extension, with reproduction numbers, equilibria,
mode-wise local stability classification, and Lyapunov-functional
dissipation diagnostics.
"""

from .errors import (
    ConfigError,
    DomainError,
    LayoutError,
    NoEndemicEquilibriumError,
    ParameterError,
    SchrkitError,
    SolverAbortError,
)
from .kinetics import (
    CompartmentVector,
    EquilibriumPoint,
    Model,
    ModelParams,
    basic_state,
    drug_free_equilibrium,
    effective_threshold_extended,
    endemic_equilibrium_basic,
    endemic_equilibrium_extended,
    endemic_equilibrium_newton,
    equilibrium_residual,
    extended_state,
    jacobian_basic,
    jacobian_extended,
    r0_basic,
    r0_extended,
    reaction,
    reaction_basic,
    reaction_extended,
)
from .rdsolver import (
    Field,
    Grid1D,
    SimConfig,
    Trajectory,
    discrete_laplacian,
    get_backend,
    integrate,
    mass_integral,
    stable_dt,
    steady_state_residual,
    step_explicit,
    step_imex,
)
from .stability import (
    LyapunovTrace,
    ModeRoots,
    ModeSpectrum,
    NgmDecomposition,
    StabilityReport,
    choose_alphas,
    classify,
    dissipation_report,
    lyapunov_extended_endemic,
    lyapunov_extended_free,
    lyapunov_g1,
    lyapunov_g2,
    neumann_modes,
    ngm_decompose,
    reproduction_trace,
    roots_drug_free,
    roots_endemic,
)

__version__ = "0.1.0"
