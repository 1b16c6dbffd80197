"""Planar kinematics helpers.

Positions are ``(east_m, north_m)``. Heading and course are compass angles in
radians, clockwise from north, so a course ``c`` at speed ``v`` has velocity
``(v sin c, v cos c)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap to [0, 2*pi)."""
    w = math.fmod(a, TWO_PI)
    if w < 0.0:
        w += TWO_PI
    if w >= TWO_PI:  # fmod of tiny negatives can round up to 2*pi
        w = 0.0
    return w


def wrap_angles(a: np.ndarray) -> np.ndarray:
    w = np.mod(a, TWO_PI)
    return np.where(w >= TWO_PI, 0.0, w)


def angle_diff(a, b):
    """Signed smallest difference ``a - b`` in (-pi, pi]; works on arrays."""
    d = np.mod(np.asarray(a) - np.asarray(b) + math.pi, TWO_PI) - math.pi
    return np.where(d == -math.pi, math.pi, d)


@dataclass(frozen=True)
class VesselState:
    position: tuple[float, float]
    speed: float
    heading: float
    course: float

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError(f"speed must be nonnegative, got {self.speed}")
        for name in ("heading", "course"):
            value = getattr(self, name)
            if not 0.0 <= value < TWO_PI:
                raise ValueError(f"{name} must lie in [0, 2pi), got {value}")

    @property
    def velocity(self) -> tuple[float, float]:
        return (self.speed * math.sin(self.course), self.speed * math.cos(self.course))


def velocity(speed: float, course: float) -> tuple[float, float]:
    return (speed * math.sin(course), speed * math.cos(course))


def predict_cpa(a: VesselState, b: VesselState, horizon_s: float) -> tuple[float, float]:
    """Time and distance of closest approach under constant velocity, within the horizon."""
    if horizon_s <= 0:
        raise ValueError("horizon_s must be positive")
    rx = b.position[0] - a.position[0]
    ry = b.position[1] - a.position[1]
    va, vb = a.velocity, b.velocity
    wx, wy = vb[0] - va[0], vb[1] - va[1]
    ww = wx * wx + wy * wy
    if ww == 0.0:
        t = 0.0
    else:
        t = min(max(-(rx * wx + ry * wy) / ww, 0.0), horizon_s)
    return t, math.hypot(rx + wx * t, ry + wy * t)


@dataclass(frozen=True)
class Path:
    """Straight crossing between two waypoints."""

    start: tuple[float, float]
    end: tuple[float, float]

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("path waypoints must differ")

    @property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])

    @property
    def unit(self) -> tuple[float, float]:
        length = self.length
        return ((self.end[0] - self.start[0]) / length, (self.end[1] - self.start[1]) / length)

    @property
    def normal(self) -> tuple[float, float]:
        """Unit vector to starboard of the path direction."""
        ux, uy = self.unit
        return (uy, -ux)

    @property
    def bearing(self) -> float:
        ux, uy = self.unit
        return wrap_angle(math.atan2(ux, uy))

    def point(self, progress: float, cross_track: float = 0.0) -> tuple[float, float]:
        ux, uy = self.unit
        nx, ny = self.normal
        return (
            self.start[0] + ux * progress + nx * cross_track,
            self.start[1] + uy * progress + ny * cross_track,
        )

    def project(self, position: tuple[float, float]) -> tuple[float, float]:
        """(along-track progress, cross-track offset) of a position."""
        dx = position[0] - self.start[0]
        dy = position[1] - self.start[1]
        ux, uy = self.unit
        nx, ny = self.normal
        return (dx * ux + dy * uy, dx * nx + dy * ny)
