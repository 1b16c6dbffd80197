"""Design-of-experiments campaigns: LHS, simulation, verdicts, local refinement."""

from __future__ import annotations

import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from ..assurance import EvidenceItem
from ..model import ASSUMPTION, GUARANTEE, SystemModel
from ..sim.scenario import run_scenario
from .monitors import ClauseMonitor, build_monitors
from .space import ParameterSpace, break_assumptions, lhs_points, scenario_seed
from .verdict import (FALSIFIED, PASS, VACUOUS, ScenarioVerdict, classify_verdict,
                      shrink_counterexample)

CAMPAIGN_FORMAT = "ada-campaign/1"
GRID_BINS = 10


class CampaignError(RuntimeError):
    def __init__(self, message: str, partial: Optional["CampaignReport"] = None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class CampaignPlan:
    n: int = 1000
    k: int = 10
    rounds: int = 3
    sigma0: float = 0.1
    decay: float = 0.5
    seed: int = 42
    policy: str = "nominal"
    break_mode: Optional[str] = None
    shrink_budget: int = 32
    max_shrink: int = 5

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("plan.n must be >= 1")
        if self.k < 0 or self.rounds < 0 or self.shrink_budget < 0 or self.max_shrink < 0:
            raise ValueError("plan.k, rounds and shrink limits must be >= 0")
        if not (self.sigma0 > 0 and 0 < self.decay <= 1):
            raise ValueError("plan.sigma0 must be > 0 and decay in (0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("plan.seed must be a 64-bit unsigned integer")


def scenario_id(index: int) -> str:
    return f"{index:04d}"


class Evaluator:
    """Simulate and classify one point of a space; picklable for worker processes."""

    def __init__(self, space: ParameterSpace, monitors: Sequence[ClauseMonitor],
                 policy: str = "nominal", trace_dir: Optional[str] = None):
        self.space = space
        self.monitors = tuple(monitors)
        self.policy = policy
        self.trace_dir = trace_dir

    def verdict(self, point, seed: int, sid: str = "", round: int = 0) -> ScenarioVerdict:
        params = self.space.build_scenario(point, seed)
        trace = run_scenario(params, self.policy)
        if self.trace_dir is not None and sid:
            with open(os.path.join(self.trace_dir, f"{sid}.ndjson"), "w",
                      encoding="utf-8") as fh:
                trace.write_ndjson(fh)
        return classify_verdict(trace, self.monitors, scenario_id=sid, point=point, round=round)

    def __call__(self, task) -> ScenarioVerdict:
        index, round, point, seed = task
        return self.verdict(np.asarray(point), seed, scenario_id(index), round)


_WORKER: dict = {}


def _init_worker(evaluator: Evaluator) -> None:
    _WORKER["evaluator"] = evaluator


def _run_task(task) -> ScenarioVerdict:
    return _WORKER["evaluator"](task)


def run_tasks(evaluator: Evaluator, tasks: list, jobs: int = 1) -> list[ScenarioVerdict]:
    """Evaluate tasks in order; results do not depend on ``jobs``."""
    if jobs <= 1 or len(tasks) <= 1:
        return [evaluator(t) for t in tasks]
    chunk = max(1, len(tasks) // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                             initargs=(evaluator,)) as pool:
        return list(pool.map(_run_task, tasks, chunksize=chunk))


def grid_coverage(points: np.ndarray, bins: int = GRID_BINS) -> float:
    """Mean over coordinate pairs of the fraction of a bins x bins grid hit by ``points``.

    One-dimensional spaces use the fraction of the ``bins`` intervals hit.
    """
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        return 0.0
    cells = np.minimum((points * bins).astype(int), bins - 1)
    cells = np.maximum(cells, 0)
    ndim = cells.shape[1]
    if ndim == 1:
        return len(set(cells[:, 0].tolist())) / bins
    fractions = []
    for i, j in itertools.combinations(range(ndim), 2):
        hit = np.zeros((bins, bins), dtype=bool)
        hit[cells[:, i], cells[:, j]] = True
        fractions.append(hit.mean())
    return float(np.mean(fractions))


@dataclass
class CampaignReport:
    campaign_id: str
    component: str
    space: ParameterSpace
    plan: CampaignPlan
    verdicts: list = field(default_factory=list)
    monitored_guarantees: list = field(default_factory=list)
    monitored_assumptions: list = field(default_factory=list)
    counterexamples: list = field(default_factory=list)
    aborted: Optional[str] = None

    @property
    def master_seed(self) -> int:
        return self.plan.seed

    def count(self, classification: str) -> int:
        return sum(v.classification == classification for v in self.verdicts)

    @property
    def falsification_count(self) -> int:
        return self.count(FALSIFIED)

    @property
    def vacuous_count(self) -> int:
        return self.count(VACUOUS)

    @property
    def pass_count(self) -> int:
        return self.count(PASS)

    @property
    def coverage(self) -> float:
        pts = [v.point for v in self.verdicts if v.classification != VACUOUS]
        return grid_coverage(np.array(pts).reshape(len(pts), self.space.ndim))

    @property
    def min_separation(self) -> float:
        seps = [v.min_separation for v in self.verdicts if v.classification != VACUOUS]
        return min(seps, default=math.inf)

    def boundary(self, k: Optional[int] = None) -> list[tuple[str, float]]:
        """The ``k`` smallest margins among passing scenarios."""
        k = self.plan.k if k is None else k
        passing = sorted((v.margin, v.scenario_id) for v in self.verdicts
                         if v.classification == PASS)
        return [(sid, m) for m, sid in passing[:k]]

    @property
    def result(self) -> str:
        if self.falsification_count:
            return "refutes"
        if self.pass_count:
            return "supports"
        return "inconclusive"

    def evidence(self) -> EvidenceItem:
        falsified = [v.scenario_id for v in self.verdicts if v.classification == FALSIFIED]
        return EvidenceItem(
            id=f"EV-{self.campaign_id}",
            kind="observation",
            target_clauses=tuple(self.monitored_guarantees),
            source=f"campaign:{self.campaign_id}",
            coverage=self.coverage,
            result=self.result,
            counterexamples=tuple(falsified),
        )

    def to_dict(self) -> dict:
        return {
            "format": CAMPAIGN_FORMAT,
            "campaign_id": self.campaign_id,
            "component": self.component,
            "plan": asdict(self.plan),
            "master_seed": self.master_seed,
            "space": self.space.to_dict(),
            "monitored": {"assumptions": list(self.monitored_assumptions),
                          "guarantees": list(self.monitored_guarantees)},
            "summary": {
                "samples": len(self.verdicts),
                "pass": self.pass_count,
                "falsified": self.falsification_count,
                "vacuous": self.vacuous_count,
                "coverage": self.coverage,
                "min_separation": _finite(self.min_separation),
                "boundary": [{"id": sid, "margin": _finite(m)} for sid, m in self.boundary()],
                "aborted": self.aborted,
            },
            "evidence": self.evidence().to_dict(),
            "counterexamples": list(self.counterexamples),
            "verdicts": [v.to_dict() for v in self.verdicts],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignReport":
        if data.get("format") != CAMPAIGN_FORMAT:
            raise ValueError("not an ada campaign file")
        return cls(
            data["campaign_id"], data["component"], ParameterSpace.from_dict(data["space"]),
            CampaignPlan(**data["plan"]),
            [ScenarioVerdict.from_dict(v) for v in data["verdicts"]],
            list(data["monitored"]["guarantees"]), list(data["monitored"]["assumptions"]),
            list(data.get("counterexamples", [])), data["summary"].get("aborted"),
        )


def _finite(x: float) -> Optional[float]:
    return x if math.isfinite(x) else None


def adaptive_refine(report: CampaignReport, k: int, rounds: int, sigma0: float, seed: int,
                    run: Callable[[list], list], decay: float = 0.5) -> list[ScenarioVerdict]:
    """Gaussian jitter around the k lowest-scoring non-vacuous scenarios, per round.

    New verdicts are appended to ``report.verdicts`` and also returned.
    """
    if not report.verdicts:
        raise ValueError("cannot refine an empty campaign")
    added: list[ScenarioVerdict] = []
    next_index = len(report.verdicts)
    for r in range(1, rounds + 1):
        live = [v for v in report.verdicts if v.classification != VACUOUS]
        chosen = sorted(live, key=lambda v: (v.score, v.scenario_id))[:k]
        if not chosen:
            break
        rng = np.random.default_rng([seed, 1_000_003, r])
        sigma = sigma0 * decay ** (r - 1)
        tasks = []
        for v in chosen:
            x = np.clip(np.array(v.point) + rng.normal(0.0, sigma, len(v.point)), 0.0, 1.0)
            tasks.append((next_index, r, tuple(float(u) for u in x),
                          scenario_seed(seed, next_index)))
            next_index += 1
        new = run(tasks)
        report.verdicts.extend(new)
        added.extend(new)
    return added


def campaign_id(component: str, plan: CampaignPlan) -> str:
    parts = [component, plan.policy, f"n{plan.n}", f"s{plan.seed}"]
    if plan.break_mode:
        parts.append(plan.break_mode)
    return "-".join(parts)


def run_campaign(space: ParameterSpace, plan: CampaignPlan, model: SystemModel,
                 jobs: int = 1, trace_dir: Optional[str] = None) -> CampaignReport:
    plan.validate()
    if plan.break_mode:
        space = break_assumptions(space, plan.break_mode)
    monitors = build_monitors(model, space.component)
    report = CampaignReport(
        campaign_id(space.component, plan), space.component, space, plan,
        monitored_guarantees=[m.clause_id for m in monitors if m.kind == GUARANTEE],
        monitored_assumptions=[m.clause_id for m in monitors if m.kind == ASSUMPTION],
    )
    if trace_dir is not None:
        Path(trace_dir).mkdir(parents=True, exist_ok=True)
    evaluator = Evaluator(space, monitors, plan.policy, trace_dir)

    def run(tasks):
        return run_tasks(evaluator, tasks, jobs)

    try:
        pts = lhs_points(space.ndim, plan.n, plan.seed)
        tasks = [(i, 0, tuple(float(u) for u in pts[i]), scenario_seed(plan.seed, i))
                 for i in range(plan.n)]
        report.verdicts.extend(run(tasks))
        adaptive_refine(report, plan.k, plan.rounds, plan.sigma0, plan.seed, run, plan.decay)

        plain = Evaluator(space, monitors, plan.policy)
        falsified = sorted((v for v in report.verdicts if v.classification == FALSIFIED),
                           key=lambda v: (v.score, v.scenario_id))[:plan.max_shrink]
        for v in falsified:
            shrunk = shrink_counterexample(
                v, space, plan.shrink_budget, lambda x, s: plain.verdict(x, s))
            report.counterexamples.append({
                "id": v.scenario_id,
                "violated": list(v.violated),
                "original_point": list(v.point),
                "point": list(shrunk.point),
                "simulations": shrunk.simulations,
                "still_falsified": shrunk.verdict.classification == FALSIFIED,
                "scenario": shrunk.params.to_dict(),
            })
    except Exception as exc:
        report.aborted = f"{type(exc).__name__}: {exc}"
        raise CampaignError(str(exc), report) from exc
    return report

