"""Random dynamical systems toolkit: expansivity diagnostics, fiber entropy
estimation and invariant-measure construction, backed by the C++ core."""

import json as _json

from ._core import (
    Scenario,
    builtin_config,
    list_builtins,
    run_scenario,
    validate_config,
    __version__,
)


def run(scenario, seed=None):
    """Run a scenario (built-in name, config path, or inline JSON) and return
    the report as a dict."""
    return _json.loads(run_scenario(scenario, seed))


def builtin(name):
    """Return a built-in scenario config as a dict."""
    return _json.loads(builtin_config(name))


__all__ = [
    "Scenario",
    "builtin",
    "builtin_config",
    "list_builtins",
    "run",
    "run_scenario",
    "validate_config",
    "__version__",
]
