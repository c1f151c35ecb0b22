"""Scenario-driven CLI layer: presets, config files, artifact export."""

from .presets import PRESET_NAMES, catalog, get_preset
from .runner import (
    EXIT_ABORT,
    EXIT_CONFIG,
    EXIT_INCOMPATIBLE,
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    convergence_study_cmd,
    lyapunov_cmd,
    run,
    stability_report_cmd,
)
from .scenario import Scenario, load_scenario, write_scenario

__all__ = [
    "EXIT_ABORT",
    "EXIT_CONFIG",
    "EXIT_INCOMPATIBLE",
    "EXIT_IO",
    "EXIT_OK",
    "EXIT_USAGE",
    "PRESET_NAMES",
    "Scenario",
    "catalog",
    "convergence_study_cmd",
    "get_preset",
    "load_scenario",
    "lyapunov_cmd",
    "run",
    "stability_report_cmd",
    "write_scenario",
]
