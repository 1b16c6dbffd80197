"""Fixed-step transit loop and the trace it records.

Per tick: obstacle truth, SITAW observation, MPCS decision (every control
period), logging, then one DP step. Noise for every stream is drawn up front
from ``default_rng([seed, stream])``, so a trace is a pure function of the
scenario parameters and the policy name.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional, TextIO

import numpy as np

from .dp import advance
from .geometry import VesselState, predict_cpa
from .mpcs import POLICIES, MpcsConfig, plan_slack
from .params import ScenarioParams
from .sitaw import (OBSTACLE_DRAWS, OWN_DRAWS, BeliefState, ObstacleBelief,
                    obstacle_truth_track, perturb_obstacles, perturb_own)

TRACE_FORMAT = "ada-trace/1"
STREAM_OWN, STREAM_DP, STREAM_OBSTACLE0 = 0, 1, 2

# signal name -> shape description; m = obstacles, n = ticks
SIGNALS = {
    "t": "n",
    "own.truth": "n x 5 (east, north, speed, heading, course)",
    "own.belief": "n x 5",
    "own.progress": "n",
    "own.cross_track": "n",
    "own.arrived": "n",
    "cmd": "n",
    "decision": "n",
    "plan_slack": "n (nan between decisions)",
    "obstacles.truth": "m x n x 5",
    "obstacles.belief": "m x n x 5",
    "obstacles.dims_belief": "m x n x 2",
    "obstacles.dims_truth": "m x 2",
    "separation": "m x n",
    "sep_min": "n",
    "margin": "n",
}


class TraceError(KeyError):
    pass


def noise_stream(seed: int, stream: int, n_ticks: int, k: int) -> np.ndarray:
    rng = np.random.default_rng([seed, stream])
    return rng.uniform(-1.0, 1.0, (n_ticks, k))


@dataclass
class Trace:
    params: ScenarioParams
    policy: str
    signals: dict

    def signal(self, name: str) -> np.ndarray:
        try:
            return self.signals[name]
        except KeyError:
            raise TraceError(f"trace has no signal {name!r}") from None

    @property
    def n_ticks(self) -> int:
        return int(self.signals["t"].shape[0])

    @property
    def n_obstacles(self) -> int:
        return int(self.signals["obstacles.truth"].shape[0])

    @property
    def min_separation(self) -> float:
        """Minimum over ticks and obstacles; ``inf`` without obstacles."""
        sep = self.signals["sep_min"]
        return float(sep.min()) if sep.size else math.inf

    @property
    def margin(self) -> float:
        return self.min_separation - self.params.d_min

    def belief_at(self, k: int) -> BeliefState:
        """Rebuild the logged belief at tick ``k`` (used to re-check decisions)."""
        s = self.signals
        own = _state(s["own.belief"][k])
        obs = tuple(
            ObstacleBelief(i, _state(s["obstacles.belief"][i, k]),
                           (float(s["obstacles.dims_belief"][i, k, 0]),
                            float(s["obstacles.dims_belief"][i, k, 1])))
            for i in range(self.n_obstacles)
        )
        return BeliefState(own, obs, self.params.declared)

    def records(self) -> Iterable[dict]:
        s = self.signals
        yield {
            "type": "header",
            "format": TRACE_FORMAT,
            "policy": self.policy,
            "params": self.params.to_dict(),
            "obstacle_dims": s["obstacles.dims_truth"].tolist(),
        }
        for k in range(self.n_ticks):
            yield {
                "type": "tick",
                "k": k,
                "t": float(s["t"][k]),
                "own_truth": s["own.truth"][k].tolist(),
                "own_belief": s["own.belief"][k].tolist(),
                "progress": float(s["own.progress"][k]),
                "cross_track": float(s["own.cross_track"][k]),
                "arrived": bool(s["own.arrived"][k]),
                "cmd": float(s["cmd"][k]),
                "decision": bool(s["decision"][k]),
                "plan_slack": _num(s["plan_slack"][k]),
                "obstacles": [
                    {
                        "truth": s["obstacles.truth"][i, k].tolist(),
                        "belief": s["obstacles.belief"][i, k].tolist(),
                        "dims_belief": s["obstacles.dims_belief"][i, k].tolist(),
                        "separation": float(s["separation"][i, k]),
                    }
                    for i in range(self.n_obstacles)
                ],
                "sep_min": _num(s["sep_min"][k]),
                "margin": _num(s["margin"][k]),
            }
        yield {
            "type": "summary",
            "min_separation": _num(self.min_separation),
            "margin": _num(self.margin),
            "final_progress": float(s["own.progress"][-1]),
        }

    def write_ndjson(self, out: TextIO) -> None:
        for rec in self.records():
            out.write(json.dumps(rec, sort_keys=True, allow_nan=False))
            out.write("\n")

    def to_ndjson(self) -> str:
        buf = io.StringIO()
        self.write_ndjson(buf)
        return buf.getvalue()

    def write_csv(self, out: TextIO) -> None:
        """One row per tick; dcpa/tcpa are to the nearest-approach obstacle, blank if none."""
        s = self.signals
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["t", "sep_min", "margin", "cmd_speed", "speed", "progress",
                    "cross_track", "dcpa", "tcpa"])
        for k in range(self.n_ticks):
            dcpa = tcpa = ""
            if self.n_obstacles:
                own = _state(s["own.truth"][k])
                best = min(predict_cpa(own, _state(s["obstacles.truth"][i, k]),
                                       self.params.horizon)[::-1]
                           for i in range(self.n_obstacles))
                dcpa, tcpa = repr(best[0]), repr(best[1])
            w.writerow([repr(float(s["t"][k])), _cell(s["sep_min"][k]), _cell(s["margin"][k]),
                        repr(float(s["cmd"][k])), repr(float(s["own.truth"][k, 2])),
                        repr(float(s["own.progress"][k])),
                        repr(float(s["own.cross_track"][k])), dcpa, tcpa])


def _state(row) -> VesselState:
    return VesselState((float(row[0]), float(row[1])), float(row[2]),
                       float(row[3]), float(row[4]))


def _num(x) -> Optional[float]:
    x = float(x)
    return x if math.isfinite(x) else None


def _cell(x) -> str:
    x = float(x)
    return repr(x) if math.isfinite(x) else ""


def read_ndjson(lines: Iterable[str]) -> Trace:
    """Inverse of :meth:`Trace.write_ndjson`."""
    header, ticks = None, []
    for line in lines:
        if not line.strip():
            continue
        rec = json.loads(line)
        if rec["type"] == "header":
            header = rec
        elif rec["type"] == "tick":
            ticks.append(rec)
    if header is None or header.get("format") != TRACE_FORMAT:
        raise ValueError("not an ada trace: missing header record")
    params = ScenarioParams.from_dict(header["params"])
    m = len(header["obstacle_dims"])
    n = len(ticks)

    def col(key, default=math.nan):
        return np.array([default if r[key] is None else r[key] for r in ticks], dtype=float)

    signals = {
        "t": col("t"),
        "own.truth": np.array([r["own_truth"] for r in ticks], dtype=float).reshape(n, 5),
        "own.belief": np.array([r["own_belief"] for r in ticks], dtype=float).reshape(n, 5),
        "own.progress": col("progress"),
        "own.cross_track": col("cross_track"),
        "own.arrived": np.array([r["arrived"] for r in ticks], dtype=bool),
        "cmd": col("cmd"),
        "decision": np.array([r["decision"] for r in ticks], dtype=bool),
        "plan_slack": col("plan_slack"),
        "obstacles.truth": np.array(
            [[r["obstacles"][i]["truth"] for r in ticks] for i in range(m)], dtype=float
        ).reshape(m, n, 5),
        "obstacles.belief": np.array(
            [[r["obstacles"][i]["belief"] for r in ticks] for i in range(m)], dtype=float
        ).reshape(m, n, 5),
        "obstacles.dims_belief": np.array(
            [[r["obstacles"][i]["dims_belief"] for r in ticks] for i in range(m)], dtype=float
        ).reshape(m, n, 2),
        "obstacles.dims_truth": np.array(header["obstacle_dims"], dtype=float).reshape(m, 2),
        "separation": np.array(
            [[r["obstacles"][i]["separation"] for r in ticks] for i in range(m)], dtype=float
        ).reshape(m, n),
        "sep_min": col("sep_min", math.inf),
        "margin": col("margin", math.inf),
    }
    return Trace(params, header["policy"], signals)


def run_scenario(p: ScenarioParams, policy: str = "nominal") -> Trace:
    p.validate()
    try:
        decide = POLICIES[policy]
    except KeyError:
        raise ValueError(f"unknown MPCS policy {policy!r}") from None

    n = p.n_ticks
    m = len(p.obstacles)
    t = np.arange(n) * p.dt
    path = p.path
    length = path.length
    bearing = path.bearing
    cfg = MpcsConfig.from_scenario(p)
    dp_acc = p.dp.tracking
    factor = p.noise_mode.factor

    u_own = noise_stream(p.seed, STREAM_OWN, n, OWN_DRAWS)
    u_dp = noise_stream(p.seed, STREAM_DP, n, 2)

    obs_truth = np.empty((m, n, 5))
    obs_belief = np.empty((m, n, 5))
    dims_belief = np.empty((m, n, 2))
    dims_truth = np.empty((m, 2))
    for i, spec in enumerate(p.obstacles):
        obs_truth[i] = obstacle_truth_track(spec, path.start, t)
        u = noise_stream(p.seed, STREAM_OBSTACLE0 + i, n, OBSTACLE_DRAWS)
        dims_truth[i] = (spec.length_m, spec.beam_m)
        obs_belief[i], dims_belief[i] = perturb_obstacles(
            obs_truth[i], (spec.length_m, spec.beam_m), p.noise, u, factor)

    own_truth = np.empty((n, 5))
    own_belief = np.empty((n, 5))
    progress_log = np.empty(n)
    cross_log = np.empty(n)
    arrived = np.zeros(n, dtype=bool)
    cmd_log = np.empty(n)
    decision = np.zeros(n, dtype=bool)
    slack_log = np.full(n, math.nan)

    ux, uy = path.unit
    nx, ny = path.normal
    sx, sy = path.start
    progress, cross, speed = 0.0, 0.0, p.initial_speed
    cmd = 0.0
    every = p.control_every
    for k in range(n):
        x = sx + ux * progress + nx * cross
        y = sy + uy * progress + ny * cross
        own_truth[k] = (x, y, speed, bearing, bearing)
        bx, by, bv, bh, bc = perturb_own(x, y, speed, bearing, bearing, p.noise, u_own[k], factor)
        own_belief[k] = (bx, by, bv, bh, bc)
        progress_log[k] = progress
        cross_log[k] = cross
        arrived[k] = progress >= length

        if k % every == 0:
            obs = tuple(
                ObstacleBelief(i, _state(obs_belief[i, k]),
                               (float(dims_belief[i, k, 0]), float(dims_belief[i, k, 1])))
                for i in range(m)
            )
            belief = BeliefState(VesselState((bx, by), bv, bh, bc), obs, p.declared)
            cmd = decide(belief, cfg, dp_acc).path_speed_command
            decision[k] = True
            slack_log[k] = float(plan_slack(belief, cfg, dp_acc, np.array([cmd]))[0])
        cmd_log[k] = cmd

        if k + 1 < n:
            progress, cross, speed = advance(progress, cross, speed, cmd, p.dp, p.dt, length,
                                             u_dp[k, 0], u_dp[k, 1])

    if m:
        d = np.hypot(obs_truth[:, :, 0] - own_truth[None, :, 0],
                     obs_truth[:, :, 1] - own_truth[None, :, 1])
        separation = d - 0.5 * np.hypot(dims_truth[:, 0], dims_truth[:, 1])[:, None]
        sep_min = separation.min(axis=0)
    else:
        separation = np.empty((0, n))
        sep_min = np.full(n, math.inf)

    signals = {
        "t": t,
        "own.truth": own_truth,
        "own.belief": own_belief,
        "own.progress": progress_log,
        "own.cross_track": cross_log,
        "own.arrived": arrived,
        "cmd": cmd_log,
        "decision": decision,
        "plan_slack": slack_log,
        "obstacles.truth": obs_truth,
        "obstacles.belief": obs_belief,
        "obstacles.dims_belief": dims_belief,
        "obstacles.dims_truth": dims_truth,
        "separation": separation,
        "sep_min": sep_min,
        "margin": sep_min - p.d_min,
    }
    return Trace(p, policy, signals)


def heading_wrap_ok(trace: Trace) -> bool:
    """All logged heading/course values lie in [0, 2pi)."""
    arrays = [trace.signals["own.truth"][:, 3:5], trace.signals["own.belief"][:, 3:5],
              trace.signals["obstacles.truth"][..., 3:5],
              trace.signals["obstacles.belief"][..., 3:5]]
    return all(bool(((a >= 0) & (a < 2 * math.pi)).all()) for a in arrays)

