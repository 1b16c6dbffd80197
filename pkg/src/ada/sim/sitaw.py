"""Situational-awareness model: truth plus bounded (or deliberately violating) error."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import VesselState, velocity, wrap_angle, wrap_angles
from .params import Accuracy, NoiseMode

OWN_DRAWS = 5  # radius, bearing, speed, heading, course
OBSTACLE_DRAWS = 7  # ... plus length, beam
MIN_DIMENSION = 0.1


@dataclass(frozen=True)
class ObstacleTruth:
    state: VesselState
    dimensions: tuple[float, float]
    behaviour: str = "constant_velocity"


@dataclass(frozen=True)
class WorldTruth:
    own: VesselState
    obstacles: tuple[ObstacleTruth, ...] = ()


@dataclass(frozen=True)
class ObstacleBelief:
    id: int
    state: VesselState
    dimensions: tuple[float, float]


@dataclass(frozen=True)
class BeliefState:
    own: VesselState
    obstacles: tuple[ObstacleBelief, ...]
    accuracy: Accuracy  # declared by SITAW, used by the decision component

    def predict(self, index: int, t: float) -> tuple[float, float]:
        """Constant-velocity extrapolation of obstacle ``index`` after ``t`` seconds."""
        ob = self.obstacles[index].state
        vx, vy = ob.velocity
        return (ob.position[0] + vx * t, ob.position[1] + vy * t)


def perturb_own(x, y, speed, heading, course, eps: Accuracy, u, factor: float = 1.0):
    r = factor * eps.own_position * math.sqrt(0.5 * (u[0] + 1.0))
    phi = math.pi * u[1]
    return (
        x + r * math.sin(phi),
        y + r * math.cos(phi),
        max(0.0, speed + factor * eps.own_speed * u[2]),
        wrap_angle(heading + factor * eps.own_heading * u[3]),
        wrap_angle(course + factor * eps.own_course * u[4]),
    )


def perturb_obstacles(truth: np.ndarray, dims: tuple[float, float], eps: Accuracy,
                      u: np.ndarray, factor: float = 1.0):
    """Vectorised obstacle observation over ticks.

    ``truth`` has columns (east, north, speed, heading, course); ``u`` holds
    uniforms in [-1, 1] with ``OBSTACLE_DRAWS`` columns. Returns the believed
    state array and an (n, 2) array of believed dimensions.
    """
    r = factor * eps.obs_position * np.sqrt(0.5 * (u[:, 0] + 1.0))
    phi = math.pi * u[:, 1]
    est = np.empty_like(truth)
    est[:, 0] = truth[:, 0] + r * np.sin(phi)
    est[:, 1] = truth[:, 1] + r * np.cos(phi)
    est[:, 2] = np.maximum(0.0, truth[:, 2] + factor * eps.obs_speed * u[:, 2])
    est[:, 3] = wrap_angles(truth[:, 3] + factor * eps.obs_heading * u[:, 3])
    est[:, 4] = wrap_angles(truth[:, 4] + factor * eps.obs_course * u[:, 4])
    dim = np.empty((truth.shape[0], 2))
    dim[:, 0] = np.maximum(MIN_DIMENSION, dims[0] + factor * eps.obs_dimensions * u[:, 5])
    dim[:, 1] = np.maximum(MIN_DIMENSION, dims[1] + factor * eps.obs_dimensions * u[:, 6])
    return est, dim


def sitaw_observe(truth: WorldTruth, accuracies: Accuracy, noise_mode: NoiseMode,
                  rng: np.random.Generator, declared: Optional[Accuracy] = None) -> BeliefState:
    """One observation of own vessel and every obstacle.

    Bounded mode draws each signal error uniformly within its bound (position
    uniformly in a disc), so the accuracy guarantee holds by construction.
    Violating mode scales the same draws by ``noise_mode.scale``.
    """
    k = noise_mode.factor
    own = truth.own
    u = rng.uniform(-1.0, 1.0, OWN_DRAWS)
    x, y, v, hd, cr = perturb_own(own.position[0], own.position[1], own.speed,
                                  own.heading, own.course, accuracies, u, k)
    own_belief = VesselState((x, y), v, hd, cr)
    beliefs = []
    for i, ob in enumerate(truth.obstacles):
        s = ob.state
        row = np.array([[s.position[0], s.position[1], s.speed, s.heading, s.course]])
        uo = rng.uniform(-1.0, 1.0, (1, OBSTACLE_DRAWS))
        est, dim = perturb_obstacles(row, ob.dimensions, accuracies, uo, k)
        e = est[0]
        beliefs.append(ObstacleBelief(
            i, VesselState((float(e[0]), float(e[1])), float(e[2]), float(e[3]), float(e[4])),
            (float(dim[0, 0]), float(dim[0, 1])),
        ))
    return BeliefState(own_belief, tuple(beliefs), declared or accuracies)


def obstacle_truth_track(spec, start: tuple[float, float], times: np.ndarray) -> np.ndarray:
    """Closed-form obstacle truth over ``times``: columns east, north, speed, heading, course."""
    x0 = start[0] + spec.range_m * math.sin(spec.bearing_rad)
    y0 = start[1] + spec.range_m * math.cos(spec.bearing_rad)
    c0 = wrap_angle(spec.course_rad)
    vx0, vy0 = velocity(spec.speed_mps, c0)
    out = np.empty((times.shape[0], 5))
    out[:, 0] = x0 + vx0 * times
    out[:, 1] = y0 + vy0 * times
    out[:, 2] = spec.speed_mps
    out[:, 3] = c0
    out[:, 4] = c0
    if spec.behaviour.get("model") == "maneuver":
        turn = float(spec.behaviour["turn_time_s"])
        c1 = wrap_angle(float(spec.behaviour["new_course_rad"]))
        vx1, vy1 = velocity(spec.speed_mps, c1)
        after = times >= turn
        dt_after = times[after] - turn
        out[after, 0] = x0 + vx0 * turn + vx1 * dt_after
        out[after, 1] = y0 + vy0 * turn + vy1 * dt_after
        out[after, 3] = c1
        out[after, 4] = c1
    return out
