"""Slow, scalar re-implementations used to check the vectorised code."""

import math

import numpy as np


def brute_cpa(a, b, horizon, step=0.001):
    """Dense grid search, then a second grid 1000x finer around the best sample."""

    def dist(t):
        ax = a.position[0] + a.speed * math.sin(a.course) * t
        ay = a.position[1] + a.speed * math.cos(a.course) * t
        bx = b.position[0] + b.speed * math.sin(b.course) * t
        by = b.position[1] + b.speed * math.cos(b.course) * t
        return np.hypot(bx - ax, by - ay)

    t = np.arange(0.0, horizon + step / 2, step)
    t_best = t[int(np.argmin(dist(t)))]
    fine = np.clip(np.linspace(t_best - step, t_best + step, 2001), 0.0, horizon)
    d = dist(fine)
    i = int(np.argmin(d))
    return float(fine[i]), float(d[i])


def lag_speed(v0, command, tau, t_end, step=1e-4):
    """Explicit Euler on dv/dt = (command - v) / tau."""
    v = v0
    for _ in range(int(round(t_end / step))):
        v += step * (command - v) / tau
    return v


def margin_at(t, d_min, dims, obs_speed, acc, track):
    """Required centre distance at lookahead ``t`` (sum of every bound)."""
    half = 0.5 * math.sqrt((dims[0] + acc.obs_dimensions) ** 2
                           + (dims[1] + acc.obs_dimensions) ** 2)
    grow = (acc.own_speed + acc.obs_speed + track.eps_speed
            + acc.obs_course * (obs_speed + acc.obs_speed))
    return (d_min + half + acc.own_position + acc.obs_position + track.eps_pos
            + grow * t)


def plan_slack_oracle(belief, cfg, track, speed, dt):
    """min over obstacles and t in {0, dt, ..., horizon} of separation - margin.

    Loops over obstacles in Python; only the time axis is an array.
    """
    start, end = cfg.path.start, cfg.path.end
    length = math.dist(start, end)
    ux, uy = (end[0] - start[0]) / length, (end[1] - start[1]) / length
    px = belief.own.position[0] - start[0]
    py = belief.own.position[1] - start[1]
    s0 = min(max(px * ux + py * uy, 0.0), length)
    t = np.arange(int(math.floor(cfg.horizon_s / dt + 1e-9)) + 1) * dt
    travel = speed * t + (belief.own.speed - speed) * cfg.tau_s * (1 - np.exp(-t / cfg.tau_s))
    s = s0 + np.minimum(travel, length - s0)
    own_x, own_y = start[0] + ux * s, start[1] + uy * s
    worst = math.inf
    for ob in belief.obstacles:
        bx = ob.state.position[0] + ob.state.speed * math.sin(ob.state.course) * t
        by = ob.state.position[1] + ob.state.speed * math.cos(ob.state.course) * t
        need = margin_at(t, cfg.d_min, ob.dimensions, ob.state.speed, belief.accuracy, track)
        worst = min(worst, float((np.hypot(bx - own_x, by - own_y) - need).min()))
    return worst


def wrapped_gap(a, b):
    d = (a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)
