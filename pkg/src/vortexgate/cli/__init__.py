"""Scenario files, the run pipeline and the command-line entry point."""
from .run import RunSummary, build_layout, run_scenario
from .scenario import ConfigError, Scenario, load_scenario, parse_scenario, serialize_scenario

__all__ = ["ConfigError", "RunSummary", "Scenario", "build_layout", "load_scenario",
           "parse_scenario", "run_scenario", "serialize_scenario"]
