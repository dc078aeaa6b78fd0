"""Simulated cinemas, scenarios, the runner, the oracle and the CLI."""

from .native import NativeCinemaAPI, UnawareCinemaAdapter, adapt_unaware_provider
from .oracle import OracleResult, grid_points, oracle_best_outcome
from .providers import CinemaProvider, ProviderModel, Show
from .runner import RunResult, build_market, run_scenario
from .scenario import ProviderSpec, Scenario, bundled_path, bundled_scenarios, load_scenario, parse_scenario

__all__ = [
    "CinemaProvider",
    "NativeCinemaAPI",
    "OracleResult",
    "ProviderModel",
    "ProviderSpec",
    "RunResult",
    "Scenario",
    "Show",
    "UnawareCinemaAdapter",
    "adapt_unaware_provider",
    "build_market",
    "bundled_path",
    "bundled_scenarios",
    "grid_points",
    "load_scenario",
    "oracle_best_outcome",
    "parse_scenario",
    "run_scenario",
]
