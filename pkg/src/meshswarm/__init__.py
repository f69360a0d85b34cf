"""Decentralized search-swarm simulator with auction tasking and weight tuning.

Agents plan short-horizon moves by minimizing a weighted decision cost over
dead-reckoned neighbor beliefs, divide the search grid through distributed
auctions over a lossy mesh, and a simulated-annealing harness tunes the cost
variables against whole-trial outcomes.
"""

from .adaptation import (ADAPTED_VARIABLES, AdaptationError, AdaptationResult,
                         AsaConfig, run_adaptation, scenario_evaluator)
from .costs import CostProfile
from .meshnet import MeshNetwork, NetworkConfig
from .optimizer import DEParams, minimize
from .scenario import ConfigError, Scenario, load_scenario, scenario_from_dict
from .seeding import derive_seed
from .world import AgentState, Heterogeneity, WorldConfig

__version__ = "0.1.0"

# Trial-level entry points pull in the compiled decision kernel, so they
# load on first attribute access instead of at package import.
_LAZY = {
    "Agent": "agent",
    "TrialOutcome": "trial",
    "TrialRunner": "trial",
    "run_trial": "trial",
    "summarize": "trial",
}

__all__ = [
    "ADAPTED_VARIABLES", "AdaptationError", "AdaptationResult", "Agent",
    "AsaConfig", "AgentState", "ConfigError", "CostProfile", "DEParams",
    "Heterogeneity", "MeshNetwork", "NetworkConfig", "Scenario",
    "TrialOutcome", "TrialRunner", "WorldConfig", "derive_seed",
    "load_scenario", "minimize", "run_adaptation", "run_trial",
    "scenario_evaluator", "scenario_from_dict", "summarize",
]


def __getattr__(name):
    module = _LAZY.get(name)
    if module is None:
        raise AttributeError("module %r has no attribute %r" % (__name__, name))
    import importlib

    value = getattr(importlib.import_module("." + module, __name__), name)
    globals()[name] = value
    return value
