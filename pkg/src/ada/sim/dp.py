"""Dynamic-positioning model: first-order speed lag along the path, bounded drift across it."""

from __future__ import annotations

import math

import numpy as np

from .geometry import Path, VesselState
from .params import DpParams, Setpoint


def advance(progress: float, cross: float, speed: float, command: float, dp: DpParams,
            dt: float, length: float, w_speed: float, w_sway: float):
    """One exact step of the lag dynamics; ``w_*`` are unit disturbances in [-1, 1].

    The speed disturbance enters scaled by ``1 - exp(-dt/tau)`` so the speed
    never strays more than ``dp.speed_disturbance`` from the undisturbed lag
    response. Returns ``(progress, cross, speed)``.
    """
    a = math.exp(-dt / dp.tau_s)
    gap = speed - command
    progress = progress + command * dt + gap * dp.tau_s * (1.0 - a)
    speed = max(0.0, command + gap * a + (1.0 - a) * dp.speed_disturbance * w_speed)
    if progress >= length:
        progress, speed = length, 0.0
    cross = cross + dp.sway_mps * dt * w_sway
    cross = min(max(cross, -dp.eps_pos), dp.eps_pos)
    return progress, cross, speed


def dp_step(state: VesselState, sp: Setpoint, dp: DpParams, dt: float,
            rng: np.random.Generator, path: Path) -> VesselState:
    if not dt < dp.tau_s:
        raise ValueError("dt must be smaller than tau")
    progress, cross = path.project(state.position)
    w = rng.uniform(-1.0, 1.0, 2)
    progress, cross, speed = advance(progress, cross, state.speed, sp.path_speed_command,
                                     dp, dt, path.length, float(w[0]), float(w[1]))
    return VesselState(path.point(progress, cross), speed, path.bearing, path.bearing)
