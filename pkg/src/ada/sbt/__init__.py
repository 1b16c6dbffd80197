"""Simulation-based testing: parameter spaces, monitors, verdicts and campaigns."""

from .campaign import (CampaignError, CampaignPlan, CampaignReport, adaptive_refine,
                       grid_coverage, run_campaign)
from .monitors import ClauseMonitor, MonitorError, MonitorOutcome, build_monitors
from .space import (Dimension, ParameterSpace, SpaceError, break_assumptions,
                    derive_parameter_space, lhs_points, lhs_sample)
from .verdict import ScenarioVerdict, classify_verdict, shrink_counterexample

__all__ = [
    "CampaignError", "CampaignPlan", "CampaignReport", "ClauseMonitor", "Dimension",
    "MonitorError", "MonitorOutcome", "ParameterSpace", "ScenarioVerdict", "SpaceError",
    "adaptive_refine", "break_assumptions", "build_monitors", "classify_verdict",
    "derive_parameter_space", "grid_coverage", "lhs_points", "lhs_sample", "run_campaign",
    "shrink_counterexample",
]
