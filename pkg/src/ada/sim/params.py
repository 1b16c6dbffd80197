"""Scenario parameter types and their JSON form."""

from __future__ import annotations

import copy
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Iterable, Optional

from ..predicates import StateErrorBound, TrackingBound
from .geometry import Path

_ACCURACY_FIELDS = {
    ("own", "position_m"): "own_position",
    ("own", "speed_mps"): "own_speed",
    ("own", "heading_rad"): "own_heading",
    ("own", "course_rad"): "own_course",
    ("obstacle", "position_m"): "obs_position",
    ("obstacle", "speed_mps"): "obs_speed",
    ("obstacle", "heading_rad"): "obs_heading",
    ("obstacle", "course_rad"): "obs_course",
    ("obstacle", "dimensions_m"): "obs_dimensions",
}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Accuracy:
    """Error bounds (or noise amplitudes) per subject and signal."""

    own_position: float = 0.0
    own_speed: float = 0.0
    own_heading: float = 0.0
    own_course: float = 0.0
    obs_position: float = 0.0
    obs_speed: float = 0.0
    obs_heading: float = 0.0
    obs_course: float = 0.0
    obs_dimensions: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v) or v < 0:
                raise ScenarioError(f"accuracy {f.name} must be finite and >= 0, got {v}")

    def eps(self, subject: str, signal: str) -> float:
        return getattr(self, _ACCURACY_FIELDS[(subject, signal)])

    @classmethod
    def from_atoms(cls, atoms: Iterable, base: Optional["Accuracy"] = None) -> "Accuracy":
        values = asdict(base) if base is not None else {}
        for atom in atoms:
            if isinstance(atom, StateErrorBound):
                key = _ACCURACY_FIELDS.get((atom.subject, atom.signal))
                if key is not None:
                    values[key] = float(atom.epsilon)
        return cls(**values)

    def to_dict(self) -> dict:
        out: dict[str, dict[str, float]] = {"own": {}, "obstacle": {}}
        for (subject, signal), name in _ACCURACY_FIELDS.items():
            out[subject][signal] = getattr(self, name)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Accuracy":
        values = {}
        for subject, signals in data.items():
            for signal, eps in signals.items():
                try:
                    values[_ACCURACY_FIELDS[(subject, signal)]] = float(eps)
                except KeyError:
                    raise ScenarioError(f"unknown accuracy {subject}.{signal}") from None
        return cls(**values)


@dataclass(frozen=True)
class DpParams:
    """Declared DP tracking accuracy plus the simulated disturbance levels."""

    tau_s: float = 2.0
    eps_pos: float = 1.0
    eps_speed: float = 0.2
    settle_time: float = 10.0
    speed_disturbance: float = 0.0  # m/s bound on deviation from the ideal lag response
    sway_mps: float = 0.0  # cross-track drift rate bound

    @property
    def tracking(self) -> TrackingBound:
        return TrackingBound(self.eps_pos, self.eps_speed, self.settle_time)


@dataclass(frozen=True)
class NoiseMode:
    kind: str = "bounded"  # "bounded" | "violating"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("bounded", "violating"):
            raise ScenarioError(f"unknown noise mode {self.kind!r}")
        if self.kind == "violating" and self.scale <= 1.0:
            raise ScenarioError("violating noise needs scale > 1")

    @property
    def factor(self) -> float:
        return self.scale if self.kind == "violating" else 1.0


@dataclass(frozen=True)
class ObstacleSpec:
    range_m: float
    bearing_rad: float
    speed_mps: float
    course_rad: float
    length_m: float = 20.0
    beam_m: float = 6.0
    # {"model": "constant_velocity"} or
    # {"model": "maneuver", "turn_time_s": T, "new_course_rad": c}
    behaviour: dict = field(default_factory=lambda: {"model": "constant_velocity"})

    def __hash__(self):
        return hash((self.range_m, self.bearing_rad, self.speed_mps, self.course_rad))

    @property
    def half_extent(self) -> float:
        return 0.5 * math.hypot(self.length_m, self.beam_m)


@dataclass(frozen=True)
class ScenarioParams:
    path_id: str = "crossing-1"
    path_start: tuple[float, float] = (0.0, 0.0)
    path_end: tuple[float, float] = (0.0, 1000.0)
    v_max: float = 3.0
    d_min: float = 30.0
    duration: float = 300.0
    dt: float = 0.1
    control_period: float = 1.0
    horizon: float = 90.0
    dv: float = 0.1
    initial_speed: float = 0.0
    noise: Accuracy = field(default_factory=Accuracy)
    declared: Accuracy = field(default_factory=Accuracy)
    dp: DpParams = field(default_factory=DpParams)
    obstacles: tuple[ObstacleSpec, ...] = ()
    noise_mode: NoiseMode = field(default_factory=NoiseMode)
    seed: int = 0

    def __hash__(self):
        return hash((self.seed, self.duration, self.obstacles))

    @property
    def path(self) -> Path:
        return Path(tuple(self.path_start), tuple(self.path_end))

    @property
    def n_ticks(self) -> int:
        return int(round(self.duration / self.dt)) + 1

    @property
    def control_every(self) -> int:
        return int(round(self.control_period / self.dt))

    def validate(self) -> None:
        def need(cond: bool, msg: str) -> None:
            if not cond:
                raise ScenarioError(msg)

        for name in ("v_max", "d_min", "duration", "dt", "control_period", "horizon", "dv"):
            value = getattr(self, name)
            need(math.isfinite(value) and value > 0, f"{name} must be positive, got {value}")
        need(self.dt < self.dp.tau_s, "dt must be smaller than the DP time constant")
        ratio = self.control_period / self.dt
        need(abs(ratio - round(ratio)) < 1e-9, "control_period must be a multiple of dt")
        need(0 <= self.initial_speed <= self.v_max, "initial_speed must lie in [0, v_max]")
        need(0 <= self.seed < 2**64, "seed must be a 64-bit unsigned integer")
        self.path  # raises on degenerate waypoints
        for name in ("speed_disturbance", "sway_mps", "eps_pos", "eps_speed", "settle_time"):
            need(getattr(self.dp, name) >= 0, f"dp.{name} must be >= 0")
        for i, ob in enumerate(self.obstacles):
            need(ob.length_m > 0 and ob.beam_m > 0, f"obstacle {i}: dimensions must be > 0")
            need(ob.speed_mps >= 0, f"obstacle {i}: speed must be >= 0")
            need(ob.range_m - ob.half_extent > self.d_min,
                 f"obstacle {i}: initial range must exceed d_min")
            model = ob.behaviour.get("model")
            need(model in ("constant_velocity", "maneuver"),
                 f"obstacle {i}: unknown behaviour {model!r}")
            if model == "maneuver":
                need("turn_time_s" in ob.behaviour and "new_course_rad" in ob.behaviour,
                     f"obstacle {i}: maneuver needs turn_time_s and new_course_rad")

    def to_dict(self) -> dict:
        return {
            "path_id": self.path_id,
            "path_start": list(self.path_start),
            "path_end": list(self.path_end),
            "v_max": self.v_max,
            "d_min": self.d_min,
            "duration": self.duration,
            "dt": self.dt,
            "control_period": self.control_period,
            "horizon": self.horizon,
            "dv": self.dv,
            "initial_speed": self.initial_speed,
            "noise": self.noise.to_dict(),
            "declared": self.declared.to_dict(),
            "dp": asdict(self.dp),
            "obstacles": [
                {**{k: v for k, v in asdict(ob).items() if k != "behaviour"},
                 "behaviour": dict(ob.behaviour)}
                for ob in self.obstacles
            ],
            "noise_mode": asdict(self.noise_mode),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioParams":
        data = copy.deepcopy(data)
        try:
            kw: dict[str, Any] = {}
            for f in fields(cls):
                if f.name in data:
                    kw[f.name] = data[f.name]
            for key in ("path_start", "path_end"):
                if key in kw:
                    kw[key] = tuple(float(x) for x in kw[key])
            for key in ("noise", "declared"):
                if key in kw:
                    kw[key] = Accuracy.from_dict(kw[key])
            if "dp" in kw:
                kw["dp"] = DpParams(**kw["dp"])
            if "noise_mode" in kw:
                kw["noise_mode"] = NoiseMode(**kw["noise_mode"])
            if "obstacles" in kw:
                kw["obstacles"] = tuple(ObstacleSpec(**ob) for ob in kw["obstacles"])
            if "seed" in kw:
                kw["seed"] = int(kw["seed"])
            unknown = set(data) - {f.name for f in fields(cls)}
            if unknown:
                raise ScenarioError(f"unknown scenario keys {sorted(unknown)}")
            return cls(**kw)
        except TypeError as exc:
            raise ScenarioError(str(exc)) from None

    def replace(self, **changes) -> "ScenarioParams":
        return replace(self, **changes)


def set_path(data: dict, key: str, value: Any) -> None:
    """Set a dotted key such as ``"obstacles.0.speed_mps"`` inside nested dicts/lists."""
    parts = key.split(".")
    node: Any = data
    for part in parts[:-1]:
        node = node[int(part)] if isinstance(node, list) else node[part]
    last = parts[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value


def get_path(data: dict, key: str) -> Any:
    node: Any = data
    for part in key.split("."):
        node = node[int(part)] if isinstance(node, list) else node[part]
    return node


@dataclass(frozen=True)
class Setpoint:
    path_speed_command: float
    path_id: str = "crossing-1"

    def __post_init__(self):
        if not self.path_speed_command >= 0:
            raise ScenarioError("speed command must be >= 0")
