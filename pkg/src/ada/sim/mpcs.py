"""Speed-only collision-avoidance decision rule for the ferry.

Each control period the rule tries candidate path speeds ``0, dv, ..., v_max``.
A speed is admissible when, at every sampled lookahead time, the predicted
separation to every obstacle is at least the required distance; the largest
admissible speed is commanded and 0 is the fallback.

Own motion is predicted along the path centreline from the believed progress,
with the DP first-order lag from the believed speed toward the candidate.
Obstacles are extrapolated at their believed constant velocity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from ..predicates import TrackingBound
from .geometry import Path
from .params import Accuracy, ScenarioParams, Setpoint
from .sitaw import BeliefState


@dataclass(frozen=True)
class MpcsConfig:
    d_min: float
    v_max: float
    horizon_s: float
    dv: float
    path: Path
    tau_s: float = 2.0
    dt: float = 0.1
    path_id: str = "crossing-1"

    @classmethod
    def from_scenario(cls, p: ScenarioParams) -> "MpcsConfig":
        return cls(p.d_min, p.v_max, p.horizon, p.dv, p.path, p.dp.tau_s, p.dt, p.path_id)

    def candidates(self) -> np.ndarray:
        return _candidates(self.v_max, self.dv).copy()

    def lookahead(self) -> np.ndarray:
        return _lookahead(self.horizon_s, self.dt)


@lru_cache(maxsize=64)
def _candidates(v_max: float, dv: float) -> np.ndarray:
    n = int(math.floor(v_max / dv + 1e-9))
    speeds = [i * dv for i in range(n + 1)]
    if speeds[-1] < v_max - 1e-9:
        speeds.append(v_max)
    return np.minimum(np.array(speeds), v_max)


@lru_cache(maxsize=64)
def _lookahead(horizon_s: float, dt: float) -> np.ndarray:
    n = int(math.floor(horizon_s / dt + 1e-9))
    t = np.arange(n + 1) * dt
    t.flags.writeable = False
    return t


def required_distance(t, d_min: float, dims: tuple[float, float], obstacle_speed: float,
                      acc: Accuracy, dp: TrackingBound):
    """Required centre distance to one obstacle after ``t`` seconds of lookahead.

    Worst-case inflation of the safety distance: believed half-diagonal grown
    by the dimension error, constant position errors of both vessels and the
    DP cross-track bound, plus a term growing with ``t`` that bounds velocity
    error (own speed belief, DP speed tracking, obstacle speed and course).
    """
    half = 0.5 * math.hypot(dims[0] + acc.obs_dimensions, dims[1] + acc.obs_dimensions)
    const = d_min + half + acc.own_position + acc.obs_position + dp.eps_pos
    rate = (acc.own_speed + acc.obs_speed + dp.eps_speed
            + acc.obs_course * (obstacle_speed + acc.obs_speed))
    return const + rate * t


def required_distance_no_accuracy(t, d_min: float, dims: tuple[float, float],
                                  obstacle_speed: float, acc: Accuracy, dp: TrackingBound):
    """Mutant margin: drops every accuracy term, keeps d_min and the believed extent."""
    return d_min + 0.5 * math.hypot(dims[0], dims[1]) + 0.0 * np.asarray(t)


MarginFn = Callable[..., "np.ndarray"]


def _own_track(belief: BeliefState, cfg: MpcsConfig, speeds: np.ndarray, t: np.ndarray):
    """Predicted own positions per candidate speed, shape (len(speeds), len(t)) each."""
    path = cfg.path
    ux, uy = path.unit
    progress, _ = path.project(belief.own.position)
    progress = min(max(progress, 0.0), path.length)
    lag = cfg.tau_s * -np.expm1(-t / cfg.tau_s)
    ds = speeds[:, None] * t[None, :] + (belief.own.speed - speeds)[:, None] * lag[None, :]
    ds = np.minimum(ds, path.length - progress) + progress
    return path.start[0] + ux * ds, path.start[1] + uy * ds


def _obstacle_tracks(belief: BeliefState, cfg: MpcsConfig, dp_accuracy: TrackingBound,
                     t: np.ndarray, margin: MarginFn):
    """Believed obstacle positions and required distances, shape (n_obstacles, len(t))."""
    ox = np.empty((len(belief.obstacles), t.size))
    oy = np.empty_like(ox)
    req = np.empty_like(ox)
    for i, ob in enumerate(belief.obstacles):
        vx, vy = ob.state.velocity
        ox[i] = ob.state.position[0] + vx * t
        oy[i] = ob.state.position[1] + vy * t
        req[i] = margin(t, cfg.d_min, ob.dimensions, ob.state.speed, belief.accuracy, dp_accuracy)
    return ox, oy, req


def _slack(own_x, own_y, ox, oy, req) -> np.ndarray:
    dx = own_x[:, None, :] - ox[None, :, :]
    dy = own_y[:, None, :] - oy[None, :, :]
    sep = np.sqrt(dx * dx + dy * dy)
    return (sep - req[None, :, :]).min(axis=(1, 2))


def plan_slack(belief: BeliefState, cfg: MpcsConfig, dp_accuracy: TrackingBound,
               speeds: Optional[np.ndarray] = None,
               margin: MarginFn = required_distance) -> np.ndarray:
    """Minimum of (predicted separation - required distance) per candidate speed."""
    speeds = cfg.candidates() if speeds is None else np.asarray(speeds, dtype=float)
    if not belief.obstacles:
        return np.full(speeds.shape, math.inf)
    t = cfg.lookahead()
    own_x, own_y = _own_track(belief, cfg, speeds, t)
    return _slack(own_x, own_y, *_obstacle_tracks(belief, cfg, dp_accuracy, t, margin))


def admissible(belief: BeliefState, cfg: MpcsConfig, dp_accuracy: TrackingBound,
               speeds: np.ndarray, margin: MarginFn = required_distance) -> np.ndarray:
    """Same answer as ``plan_slack(...) >= 0``, skipping obstacles that cannot bind.

    A lookahead time is skipped for an obstacle when its distance now, less
    the largest possible closing distance by then, is still above the
    required distance.
    """
    if not belief.obstacles:
        return np.ones(speeds.shape, dtype=bool)
    t = cfg.lookahead()
    ox, oy, req = _obstacle_tracks(belief, cfg, dp_accuracy, t, margin)
    path = cfg.path
    progress, _ = path.project(belief.own.position)
    x0, y0 = path.point(min(max(progress, 0.0), path.length))
    own_reach = max(float(speeds.max()), belief.own.speed)
    ok = np.ones(speeds.shape, dtype=bool)
    own = None
    for i, ob in enumerate(belief.obstacles):
        d0 = math.hypot(ox[i, 0] - x0, oy[i, 0] - y0)
        cols = np.flatnonzero(d0 - (own_reach + ob.state.speed) * t - req[i] <= 1e-6)
        if cols.size == 0:
            continue
        if own is None:
            own = _own_track(belief, cfg, speeds, t)
        dx = own[0][:, cols] - ox[i, cols]
        dy = own[1][:, cols] - oy[i, cols]
        ok &= (np.sqrt(dx * dx + dy * dy) - req[i, cols]).min(axis=1) >= 0.0
    return ok


def _choose(ok: np.ndarray, speeds: np.ndarray, path_id: str) -> Setpoint:
    idx = np.flatnonzero(ok)
    speed = float(speeds[idx[-1]]) if idx.size else 0.0
    return Setpoint(speed, path_id)


def mpcs_decide(belief: BeliefState, config: MpcsConfig,
                dp_accuracy: TrackingBound) -> Setpoint:
    speeds = config.candidates()
    return _choose(admissible(belief, config, dp_accuracy, speeds), speeds, config.path_id)


def mpcs_decide_mutant(belief: BeliefState, config: MpcsConfig,
                       dp_accuracy: TrackingBound) -> Setpoint:
    """Faulty variant that ignores SITAW and DP accuracy (for falsification tests)."""
    speeds = config.candidates()
    ok = admissible(belief, config, dp_accuracy, speeds, required_distance_no_accuracy)
    return _choose(ok, speeds, config.path_id)


POLICIES: dict[str, Callable[[BeliefState, MpcsConfig, TrackingBound], Setpoint]] = {
    "nominal": mpcs_decide,
    "mutant-no-accuracy": mpcs_decide_mutant,
}
