"""Ferry transit simulator: geometry, SITAW, DP, MPCS and the scenario loop."""

from .geometry import Path, VesselState, predict_cpa
from .mpcs import POLICIES, MpcsConfig, mpcs_decide, required_distance
from .params import (Accuracy, DpParams, NoiseMode, ObstacleSpec, ScenarioError,
                     ScenarioParams, Setpoint)
from .scenario import Trace, TraceError, read_ndjson, run_scenario
from .sitaw import BeliefState, sitaw_observe

__all__ = [
    "Accuracy", "BeliefState", "DpParams", "MpcsConfig", "NoiseMode", "ObstacleSpec", "POLICIES",
    "Path", "ScenarioError", "ScenarioParams", "Setpoint", "Trace", "TraceError", "VesselState",
    "mpcs_decide", "predict_cpa", "read_ndjson", "required_distance", "run_scenario",
    "sitaw_observe",
]
