"""Shared fixtures and hypothesis strategies."""

from __future__ import annotations

import hypothesis.strategies as st
import pytest

from schrkit import Model, ModelParams
from schrkit.harness import presets


@pytest.fixture(scope="session")
def p_basic_endemic() -> ModelParams:
    return presets.params_basic_endemic()


@pytest.fixture(scope="session")
def p_basic_free() -> ModelParams:
    return presets.params_basic_drug_free()


@pytest.fixture(scope="session")
def p_ext_endemic() -> ModelParams:
    return presets.params_extended_endemic()


@pytest.fixture(scope="session")
def p_ext_free() -> ModelParams:
    return presets.params_extended_drug_free()


@st.composite
def basic_params(draw, r0_min: float = 1.05, r0_max: float = 8.0):
    """Random valid basic-model parameters with a controlled threshold:
    beta is solved from a drawn target r0, so the strategy covers either
    side of the threshold exactly as requested."""
    lam = draw(st.floats(0.5, 50.0))
    eta1 = draw(st.floats(1e-3, 0.2))
    eta2 = draw(st.floats(1e-3, 0.2))
    eta3 = draw(st.floats(1e-3, 0.2))
    eta4 = draw(st.floats(1e-3, 0.2))
    sigma = draw(st.floats(0.0, 0.5))
    gamma1 = draw(st.floats(0.0, 0.3))
    gamma2 = draw(st.floats(0.0, 0.3))
    r0 = draw(st.floats(r0_min, r0_max))
    beta = r0 * eta1 * (eta2 + sigma + gamma1) / lam
    d = draw(st.floats(0.0, 1.0))
    return ModelParams(lambda_recruit=lam, beta=beta, eta1=eta1, eta2=eta2,
                       eta3=eta3, eta4=eta4, sigma=sigma, gamma1=gamma1,
                       gamma2=gamma2, d=d)


@st.composite
def compartment_values(draw, model: Model):
    vals = st.floats(0.0, 200.0)
    return tuple(draw(vals) for _ in range(model.ncomp))
