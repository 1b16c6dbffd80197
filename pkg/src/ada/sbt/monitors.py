"""Clause monitors over simulation traces.

Each predicate atom yields a per-tick robustness array: positive where the
atom holds with room to spare, negative where it is violated, ``nan`` where
it does not apply. A clause's robustness is the minimum over its atoms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..contracts import DISCHARGED, PROMOTED, build_discharge_map
from ..model import ASSUMPTION, GUARANTEE, SystemModel
from ..predicates import (Atom, ConfigValid, ObstacleBehaviour, SafeSetpointRule,
                          SeparationBound, StateErrorBound, TrackingBound)
from ..sim.geometry import angle_diff
from ..sim.mpcs import MpcsConfig, plan_slack
from ..sim.scenario import Trace, TraceError

HELD, VIOLATED, NOT_APPLICABLE = "held", "violated", "not_applicable"
TOL = 1e-9


class MonitorError(ValueError):
    pass


@dataclass(frozen=True)
class MonitorOutcome:
    clause_id: str
    status: str
    first_tick: Optional[int] = None
    worst_value: Optional[float] = None  # minimum robustness over checked ticks

    def to_dict(self) -> dict:
        return {"status": self.status, "first_tick": self.first_tick,
                "worst_value": self.worst_value}


def _signal(trace: Trace, name: str) -> np.ndarray:
    try:
        return trace.signal(name)
    except TraceError as exc:
        raise MonitorError(str(exc)) from None


def _state_error(trace: Trace, atom: StateErrorBound) -> np.ndarray:
    if atom.subject == "own":
        truth = _signal(trace, "own.truth")[None]
        est = _signal(trace, "own.belief")[None]
    else:
        truth = _signal(trace, "obstacles.truth")
        est = _signal(trace, "obstacles.belief")
    n = trace.n_ticks
    if truth.shape[0] == 0:
        return np.full(n, math.nan)
    if atom.signal == "position_m":
        err = np.hypot(est[..., 0] - truth[..., 0], est[..., 1] - truth[..., 1])
    elif atom.signal == "speed_mps":
        err = np.abs(est[..., 2] - truth[..., 2])
    elif atom.signal == "heading_rad":
        err = np.abs(angle_diff(est[..., 3], truth[..., 3]))
    elif atom.signal == "course_rad":
        err = np.abs(angle_diff(est[..., 4], truth[..., 4]))
    else:
        if atom.subject == "own":
            raise MonitorError("own dimensions are not estimated")
        dims = _signal(trace, "obstacles.dims_truth")[:, None, :]
        est_dims = _signal(trace, "obstacles.dims_belief")
        err = np.abs(est_dims - dims).max(axis=-1)
    return atom.epsilon - err.max(axis=0)


def _tracking(trace: Trace, atom: TrackingBound) -> np.ndarray:
    cross = _signal(trace, "own.cross_track")
    speed = _signal(trace, "own.truth")[:, 2]
    cmd = _signal(trace, "cmd")
    arrived = _signal(trace, "own.arrived")
    n = trace.n_ticks
    rob = atom.eps_pos - np.abs(cross)
    # speed at tick k results from commands cmd[0..k-1]; settled once the
    # last ``window`` of them are equal
    window = int(round(atom.settle_time / trace.params.dt))
    changed = np.ones(n, dtype=bool)
    changed[1:] = cmd[1:] != cmd[:-1]
    last_change = np.maximum.accumulate(np.where(changed, np.arange(n), 0))
    k = np.arange(n)
    settled = np.zeros(n, dtype=bool)
    settled[1:] = (k[1:] - 1 - last_change[:-1] >= window - 1) & (k[1:] >= window)
    settled &= ~arrived
    dev = np.full(n, math.nan)
    prev_cmd = np.concatenate(([math.nan], cmd[:-1]))
    dev[settled] = atom.eps_speed - np.abs(speed[settled] - prev_cmd[settled])
    return np.fmin(rob, dev)


def _config(trace: Trace, atom: ConfigValid) -> np.ndarray:
    p = trace.params
    ok = p.path_id == atom.route_id and abs(p.d_min - atom.d_min) <= TOL
    return np.full(trace.n_ticks, 0.0 if ok else -1.0)


def _behaviour(trace: Trace, atom: ObstacleBehaviour) -> np.ndarray:
    truth = _signal(trace, "obstacles.truth")
    n = trace.n_ticks
    if truth.shape[0] == 0:
        return np.full(n, math.nan)
    speed = truth[..., 2]
    rob = atom.max_speed - speed
    # constant velocity: speed never departs from its initial value
    rob = np.minimum(rob, -np.abs(speed - speed[:, :1]))
    rate = np.zeros_like(speed)
    rate[:, 1:] = np.abs(angle_diff(truth[:, 1:, 4], truth[:, :-1, 4])) / trace.params.dt
    rob = np.minimum(rob, atom.max_turn_rate - rate)
    return rob.min(axis=0)


def _separation(trace: Trace, atom: SeparationBound) -> np.ndarray:
    own = _signal(trace, "own.truth")
    obs = _signal(trace, "obstacles.truth")
    dims = _signal(trace, "obstacles.dims_truth")
    if obs.shape[0] == 0:
        return np.full(trace.n_ticks, math.nan)
    d = np.hypot(obs[..., 0] - own[None, :, 0], obs[..., 1] - own[None, :, 1])
    sep = d - 0.5 * np.hypot(dims[:, 0], dims[:, 1])[:, None]
    return sep.min(axis=0) - atom.d_min


def _safe_setpoint(trace: Trace, atom: SafeSetpointRule) -> np.ndarray:
    """Slack of each logged command under the nominal rule, at decision ticks.

    A zero command counts as compliant when no candidate speed was admissible.
    """
    decision = _signal(trace, "decision")
    cmd = _signal(trace, "cmd")
    _signal(trace, "own.belief")
    _signal(trace, "obstacles.belief")
    p = trace.params
    cfg = MpcsConfig(p.d_min, p.v_max, atom.horizon_s, p.dv, p.path, p.dp.tau_s, p.dt,
                     p.path_id)
    dp_acc = p.dp.tracking
    rob = np.full(trace.n_ticks, math.nan)
    for k in np.flatnonzero(decision):
        belief = trace.belief_at(int(k))
        slack = float(plan_slack(belief, cfg, dp_acc, np.array([cmd[k]]))[0])
        if slack < 0 and cmd[k] == 0.0 and not (plan_slack(belief, cfg, dp_acc) >= 0).any():
            slack = 0.0
        rob[k] = slack
    return rob


_EVALUATORS = {
    StateErrorBound: _state_error,
    TrackingBound: _tracking,
    ConfigValid: _config,
    ObstacleBehaviour: _behaviour,
    SeparationBound: _separation,
    SafeSetpointRule: _safe_setpoint,
}


def atom_robustness(trace: Trace, atom: Atom) -> np.ndarray:
    return _EVALUATORS[type(atom)](trace, atom)


@dataclass(frozen=True)
class ClauseMonitor:
    clause_id: str
    kind: str  # assumption | guarantee
    atoms: tuple

    def robustness(self, trace: Trace) -> np.ndarray:
        rob = np.full(trace.n_ticks, math.nan)
        for atom in self.atoms:
            rob = np.fmin(rob, atom_robustness(trace, atom))
        return rob

    def evaluate(self, trace: Trace) -> MonitorOutcome:
        rob = self.robustness(trace)
        checked = ~np.isnan(rob)
        if not checked.any():
            return MonitorOutcome(self.clause_id, NOT_APPLICABLE)
        worst = float(rob[checked].min())
        bad = np.flatnonzero(checked & (rob < -TOL))
        if bad.size:
            return MonitorOutcome(self.clause_id, VIOLATED, int(bad[0]), worst)
        return MonitorOutcome(self.clause_id, HELD, None, worst)


def build_monitors(model: SystemModel, component_id: str) -> list[ClauseMonitor]:
    """Monitors for a component under test.

    Assumptions: the component's own formal assumptions plus the formal
    assumptions of the components that discharge them. Guarantees: the
    component's formal guarantees plus every composite guarantee they inherit.
    Informal clauses cannot be monitored and are skipped.
    """
    comp = model.component(component_id)
    dmap = build_discharge_map(model)
    index = model.clause_index()
    monitors: list[ClauseMonitor] = []
    seen: set[str] = set()

    def add(clause, kind):
        if clause.formal and clause.id not in seen:
            seen.add(clause.id)
            monitors.append(ClauseMonitor(clause.id, kind, tuple(clause.predicate)))

    for a in comp.contract.assumptions:
        add(a, ASSUMPTION)
    for a in comp.contract.assumptions:
        entry = dmap.entries.get(a.id)
        if entry is not None and entry.status == DISCHARGED:
            owner = index[entry.provider][0]
            for b in owner.contract.assumptions:
                entry_b = dmap.entries.get(b.id)
                if entry_b is not None and entry_b.status in (DISCHARGED, PROMOTED):
                    add(b, ASSUMPTION)
    own_guarantees = {g.id for g in comp.contract.guarantees}
    for composite in model.composites():
        for g in composite.contract.guarantees:
            if own_guarantees & set(composite.inherits.get(g.id, ())):
                add(g, GUARANTEE)
    for g in comp.contract.guarantees:
        add(g, GUARANTEE)
    return monitors


def monitored_guarantees(monitors) -> list[str]:
    return [m.clause_id for m in monitors if m.kind == GUARANTEE]
