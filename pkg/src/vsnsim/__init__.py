"""Uncertainty-dependent data collection for signal control over a vehicular sensor network."""

from .belief import LaneModel, Prediction, UnknownVehicleError, model_update, predict
from .collection import ALG1, ALG2, ALG3, CollectionPolicy, ControlNode, run_step
from .controller import ControllerState, decide, decision_uncertainty, execute, hold
from .experiment import (
    ConfigError,
    RunRecord,
    ScenarioConfig,
    Simulation,
    SweepError,
    load_config,
    run_scenario,
    run_sweep,
)
from .fuzzy import FuzzyNumber, crisp, fuzzy_argmax, normalize, prob_less, uncertainty
from .topology import RoadNetwork, TopologyError, grid_2x2, load_topology, single_intersection
from .vsn import TransferLedger, VSNLink
from .world import World, measure_delay, saturation_flow_probe

__version__ = "0.1.0"

__all__ = [
    "ALG1", "ALG2", "ALG3", "CollectionPolicy", "ConfigError", "ControlNode", "ControllerState",
    "FuzzyNumber", "LaneModel", "Prediction", "RoadNetwork", "RunRecord", "ScenarioConfig",
    "Simulation", "SweepError", "TopologyError", "TransferLedger", "UnknownVehicleError",
    "VSNLink", "World", "crisp", "decide", "decision_uncertainty", "execute", "fuzzy_argmax",
    "grid_2x2", "hold", "load_config", "load_topology", "measure_delay", "model_update",
    "normalize", "predict", "prob_less", "run_scenario", "run_step", "run_sweep",
    "saturation_flow_probe", "single_intersection", "uncertainty",
]
