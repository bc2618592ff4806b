"""Dynamical transportation network simulator: route-choice dynamics on
congested networks with an equilibrium solver.

The heavy lifting lives in the compiled ``_core`` extension; this package
just re-exports its surface.
"""

from ._core import (
    Error,
    Scenario,
    builtin_scenarios,
    link_delay,
    load_scenario,
    local_decision,
    parse_scenario,
    perturbed_best_response,
    simulate,
    solve_equilibrium,
)
from ._core import __version__

__all__ = [
    "Error",
    "Scenario",
    "builtin_scenarios",
    "link_delay",
    "load_scenario",
    "local_decision",
    "parse_scenario",
    "perturbed_best_response",
    "simulate",
    "solve_equilibrium",
    "__version__",
]
