"""Tiered-memory placement simulator."""

from ._tiersim import (
    InvalidConfig,
    Scenario,
    ScenarioError,
    Simulator,
    demotion_scan_size,
    load_scenario,
    parse_scenario,
    promotion_scan_size,
    promotion_throttle_factor,
    read_export,
    validate,
)

__all__ = [
    "InvalidConfig",
    "Scenario",
    "ScenarioError",
    "Simulator",
    "demotion_scan_size",
    "load_scenario",
    "parse_scenario",
    "promotion_scan_size",
    "promotion_throttle_factor",
    "read_export",
    "run_file",
    "validate",
]


def run_file(path, seed=None):
    """Run a scenario file to completion and return its summary dict."""
    scenario = load_scenario(str(path))
    if seed is not None:
        scenario.rng_seed = seed
    return Simulator(scenario).run()
