"""Built-in scenarios with the reference parameter sets.

Two regimes per model: a below-threshold run that settles on the drug-free
state and an above-threshold run that settles on the drug-addiction state.
Horizon 500 with the steady-state early stop disabled, so outputs cover
the full reference time span.
"""

from __future__ import annotations

from ..errors import ConfigError
from ..kinetics import Model, ModelParams
from ..rdsolver import Grid1D, SimConfig
from .scenario import Scenario

# shared scenario constants
RECRUITMENT = 2.15
DIFFUSION = 0.1
FINAL_TIME = 500.0
DT = 1e-2
GRID_MX = 40
GRID_LENGTH = 2.0
STRIDE = 500  # one sample per 5 time units at dt = 1e-2

INITIAL_BASIC = (30.0, 10.0, 5.0, 0.0)
INITIAL_EXTENDED = (30.0, 10.0, 3.0, 5.0, 3.0, 0.0)


def params_basic_endemic() -> ModelParams:
    return ModelParams(
        lambda_recruit=RECRUITMENT, beta=2e-3,
        eta1=1e-2, eta2=1e-2, eta3=1e-2, eta4=1e-2,
        sigma=0.2, gamma1=0.05, gamma2=0.05, d=DIFFUSION)


def params_basic_drug_free() -> ModelParams:
    return ModelParams(
        lambda_recruit=RECRUITMENT, beta=1e-3,
        eta1=3e-2, eta2=3e-2, eta3=3e-2, eta4=3e-2,
        sigma=1e-3, gamma1=0.05, gamma2=0.05, d=DIFFUSION)


def params_extended_endemic() -> ModelParams:
    return ModelParams(
        lambda_recruit=RECRUITMENT, beta=2e-3,
        eta1=1e-2, eta2=1e-2, eta3=1e-2, eta4=1e-2,
        sigma=0.2, gamma1=0.05, gamma2=0.05, d=DIFFUSION,
        eta5=1e-2, eta6=1e-2, gamma3=0.03, gamma4=0.03,
        mu1=1e-2, mu2=1e-2, kappa1=1e-2, kappa2=1e-2)


def params_extended_drug_free() -> ModelParams:
    return ModelParams(
        lambda_recruit=RECRUITMENT, beta=1e-3,
        eta1=3e-2, eta2=3e-2, eta3=3e-2, eta4=3e-2,
        sigma=1e-3, gamma1=0.05, gamma2=0.05, d=DIFFUSION,
        eta5=1e-2, eta6=1e-2, gamma3=0.03, gamma4=0.03,
        mu1=0.05, mu2=0.05, kappa1=1e-2, kappa2=1e-2)


def _scenario(name: str, params: ModelParams, model: Model,
              initial: tuple[float, ...]) -> Scenario:
    cfg = SimConfig(
        params=params,
        model=model,
        grid=Grid1D(GRID_LENGTH, GRID_MX),
        initial=initial,
        dt=DT,
        t_end=FINAL_TIME,
        stride=STRIDE,
        stepper="explicit",
        steady_stop=False,
    )
    return Scenario(name=name, config=cfg,
                    outputs=("trajectory", "diagnostics"), lyapunov="none")


_BUILDERS = {
    "basic-drug-free": lambda: _scenario(
        "basic-drug-free", params_basic_drug_free(), Model.BASIC, INITIAL_BASIC),
    "basic-endemic": lambda: _scenario(
        "basic-endemic", params_basic_endemic(), Model.BASIC, INITIAL_BASIC),
    "extended-drug-free": lambda: _scenario(
        "extended-drug-free", params_extended_drug_free(), Model.EXTENDED,
        INITIAL_EXTENDED),
    "extended-endemic": lambda: _scenario(
        "extended-endemic", params_extended_endemic(), Model.EXTENDED,
        INITIAL_EXTENDED),
}

PRESET_NAMES = tuple(_BUILDERS)


def get_preset(name: str) -> Scenario:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        ) from None
    return builder()


def catalog() -> dict[str, Scenario]:
    return {name: get_preset(name) for name in PRESET_NAMES}
