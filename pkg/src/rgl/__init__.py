"""Edge-coloring games on random graph processes: simulation and analytical oracles."""

from .graph_state import ComponentTracker, ProcessState, TailFit, new_state
from .lab import ExperimentConfig, estimate_threshold, run_experiment, run_trial
from .strategies import StrategySpec, build_strategy

__version__ = "0.1.0"

__all__ = [
    "ComponentTracker",
    "ExperimentConfig",
    "ProcessState",
    "StrategySpec",
    "TailFit",
    "build_strategy",
    "estimate_threshold",
    "new_state",
    "run_experiment",
    "run_trial",
]
