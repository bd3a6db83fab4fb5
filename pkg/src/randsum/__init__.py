"""Simulation and exact numerical checks for limit theorems of random sums."""

from .config import ConfigError, Scenario, preset, scenario_from_config
from .harness import ConvergenceReport, emit, run_scenario

__all__ = ["ConfigError", "ConvergenceReport", "Scenario", "emit", "preset",
           "run_scenario", "scenario_from_config"]
__version__ = "0.1.0"
