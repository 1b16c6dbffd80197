"""Scenario verdicts and counterexample shrinking."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..contracts import DischargeMap
from ..model import ASSUMPTION, GUARANTEE
from ..sim.params import ScenarioParams
from ..sim.scenario import Trace
from .monitors import VIOLATED, ClauseMonitor, MonitorError, MonitorOutcome
from .space import ParameterSpace

PASS, FALSIFIED, VACUOUS = "pass", "falsified", "vacuous"


@dataclass(frozen=True)
class ScenarioVerdict:
    scenario_id: str
    outcomes: dict  # clause id -> MonitorOutcome
    classification: str
    violated: tuple[str, ...] = ()
    min_separation: float = math.inf
    margin: float = math.inf
    point: Optional[tuple[float, ...]] = None
    seed: Optional[int] = None
    round: int = 0

    @property
    def score(self) -> float:
        """Search objective: separation margin, or the worst violated-guarantee value."""
        if self.classification == FALSIFIED:
            worst = [self.outcomes[c].worst_value for c in self.violated]
            return min([self.margin] + [w for w in worst if w is not None])
        return self.margin

    def to_dict(self) -> dict:
        return {
            "id": self.scenario_id,
            "round": self.round,
            "seed": self.seed,
            "point": None if self.point is None else list(self.point),
            "classification": self.classification,
            "violated": list(self.violated),
            "min_separation": _finite(self.min_separation),
            "margin": _finite(self.margin),
            "outcomes": {k: self.outcomes[k].to_dict() for k in sorted(self.outcomes)},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioVerdict":
        outcomes = {k: MonitorOutcome(k, v["status"], v["first_tick"], v["worst_value"])
                    for k, v in data["outcomes"].items()}
        return cls(data["id"], outcomes, data["classification"], tuple(data["violated"]),
                   _inf(data["min_separation"]), _inf(data["margin"]),
                   None if data["point"] is None else tuple(data["point"]),
                   data["seed"], data.get("round", 0))


def _finite(x: float) -> Optional[float]:
    return x if math.isfinite(x) else None


def _inf(x: Optional[float]) -> float:
    return math.inf if x is None else float(x)


def classify_verdict(trace: Trace, monitors: Sequence[ClauseMonitor],
                     discharge_map: Optional[DischargeMap] = None,
                     scenario_id: str = "", point=None, round: int = 0) -> ScenarioVerdict:
    """Assumption monitors first; any violation makes the verdict vacuous."""
    if discharge_map is not None:
        for m in monitors:
            if m.kind == ASSUMPTION and m.clause_id not in discharge_map.entries:
                raise MonitorError(f"{m.clause_id} is not an internal assumption of the model")
    outcomes: dict[str, MonitorOutcome] = {}
    for m in monitors:
        if m.kind == ASSUMPTION:
            outcomes[m.clause_id] = m.evaluate(trace)
    broken = tuple(c for c, o in outcomes.items() if o.status == VIOLATED)
    common = dict(min_separation=trace.min_separation, margin=trace.margin,
                  point=None if point is None else tuple(float(x) for x in point),
                  seed=trace.params.seed, round=round)
    if broken:
        return ScenarioVerdict(scenario_id, outcomes, VACUOUS, broken, **common)
    for m in monitors:
        if m.kind == GUARANTEE:
            outcomes[m.clause_id] = m.evaluate(trace)
    failed = tuple(m.clause_id for m in monitors
                   if m.kind == GUARANTEE and outcomes[m.clause_id].status == VIOLATED)
    if failed:
        return ScenarioVerdict(scenario_id, outcomes, FALSIFIED, failed, **common)
    return ScenarioVerdict(scenario_id, outcomes, PASS, (), **common)


@dataclass(frozen=True)
class ShrinkResult:
    params: ScenarioParams
    point: tuple[float, ...]
    verdict: ScenarioVerdict
    simulations: int = 0
    steps: list = field(default_factory=list)


def shrink_counterexample(v: ScenarioVerdict, space: ParameterSpace, budget: int,
                          evaluate: Callable[[np.ndarray, int], ScenarioVerdict]) -> ShrinkResult:
    """Move coordinates toward the space midpoint while the scenario still falsifies.

    For each coordinate in turn, halve its distance to 0.5 until a step stops
    falsifying, the coordinate sits within 1e-3 of the midpoint, or ``budget``
    simulations have been spent. The noise seed is held fixed.
    """
    if v.classification != FALSIFIED:
        raise ValueError("only falsified verdicts can be shrunk")
    if v.point is None or v.seed is None:
        raise ValueError("verdict lacks its sample point and seed")
    x = np.array(v.point, dtype=float)
    best = v
    used = 0
    steps = []
    for j in range(space.ndim):
        while used < budget and abs(x[j] - 0.5) > 1e-3:
            trial = x.copy()
            trial[j] = 0.5 * (trial[j] + 0.5)
            used += 1
            verdict = evaluate(trial, v.seed)
            if verdict.classification != FALSIFIED:
                break
            x, best = trial, verdict
            steps.append(space.dimensions[j].name)
    return ShrinkResult(space.build_scenario(x, v.seed), tuple(float(u) for u in x),
                        best, used, steps)
