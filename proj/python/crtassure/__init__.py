"""Power, assurance and sample size for two-arm cluster randomised trials."""

import json

from ._core import (
    DomainError,
    InfeasibleDesign,
    IoError,
    ParseError,
    SearchLimitExceeded,
    ValidationError,
    design_effect,
    fit_icc,
    gamma_from_mean_var,
    operations,
    power,
    power_limit,
    preset_names,
)
from . import _core

__all__ = [
    "DomainError",
    "InfeasibleDesign",
    "IoError",
    "ParseError",
    "SearchLimitExceeded",
    "ValidationError",
    "design_effect",
    "fit_icc",
    "gamma_from_mean_var",
    "load_scenario",
    "operations",
    "power",
    "power_limit",
    "preset_names",
    "run",
]


def load_scenario(path_or_preset):
    """Scenario file or bundled preset as a dict (not yet validated)."""
    return json.loads(_core.load_scenario_json(path_or_preset))


def run(operation, scenario, **overrides):
    """Run one operation and return the result document as a dict.

    `scenario` is a preset name, a scenario file path or a dict. Keyword
    overrides are merged into the scenario's `design` section.
    """
    if isinstance(scenario, str):
        scenario = load_scenario(scenario)
    if overrides:
        scenario = dict(scenario)
        scenario["design"] = {**scenario.get("design", {}), **overrides}
    return json.loads(_core.run_json(operation, json.dumps(scenario)))
