"""Test parameter space derived from a component's assumptions.

Every dimension is a dotted key into the scenario JSON (for example
``noise.obstacle.position_m`` or ``obstacles.1.course_rad``) and cites the
clause it comes from, or ``"environment"`` for ODD ranges.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..contracts import DISCHARGED, PROMOTED, build_discharge_map
from ..model import SystemModel
from ..predicates import (ConfigValid, ObstacleBehaviour, SeparationBound, StateErrorBound,
                          TrackingBound)
from ..sim.params import Accuracy, ScenarioParams, get_path, set_path

ENVIRONMENT = "environment"


class SpaceError(ValueError):
    pass


@dataclass(frozen=True)
class Dimension:
    name: str
    unit: str
    lower: float
    upper: float
    source: str

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)
                and self.lower < self.upper):
            raise SpaceError(f"dimension {self.name}: need lower < upper, "
                             f"got [{self.lower}, {self.upper}]")
        if not self.source:
            raise SpaceError(f"dimension {self.name} cites no clause")

    def value(self, u: float) -> float:
        return self.lower + u * (self.upper - self.lower)

    def unit_of(self, x: float) -> float:
        return (x - self.lower) / (self.upper - self.lower)

    def to_dict(self) -> dict:
        return {"name": self.name, "unit": self.unit, "lower": self.lower,
                "upper": self.upper, "source": self.source}


@dataclass(frozen=True)
class ParameterSpace:
    dimensions: tuple[Dimension, ...]
    fixed: dict = field(default_factory=dict)  # base scenario JSON
    component: str = ""

    def __post_init__(self):
        names = [d.name for d in self.dimensions]
        if len(set(names)) != len(names):
            raise SpaceError("duplicate dimension names")

    def __hash__(self):
        return hash(self.dimensions)

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.dimensions]

    @property
    def ndim(self) -> int:
        return len(self.dimensions)

    def dimension(self, name: str) -> Dimension:
        for d in self.dimensions:
            if d.name == name:
                return d
        raise KeyError(name)

    def values(self, point: Sequence[float]) -> dict[str, float]:
        return {d.name: d.value(float(u)) for d, u in zip(self.dimensions, point)}

    def build_scenario(self, point: Sequence[float], seed: int) -> ScenarioParams:
        """Scenario for a point in the unit cube."""
        if len(point) != self.ndim:
            raise SpaceError(f"point has {len(point)} coordinates, space has {self.ndim}")
        data = copy.deepcopy(self.fixed)
        for name, value in self.values(point).items():
            set_path(data, name, value)
        for ob in data.get("obstacles", []):
            beh = ob.get("behaviour", {})
            if "course_change_rad" in beh:
                change = beh.pop("course_change_rad")
                beh["new_course_rad"] = (ob["course_rad"] + change) % (2.0 * math.pi)
        data["seed"] = int(seed)
        return ScenarioParams.from_dict(data)

    def replace_dimension(self, name: str, **changes) -> "ParameterSpace":
        dims = tuple(Dimension(**{**d.to_dict(), **changes}) if d.name == name else d
                     for d in self.dimensions)
        return ParameterSpace(dims, copy.deepcopy(self.fixed), self.component)

    def to_dict(self) -> dict:
        return {"component": self.component,
                "dimensions": [d.to_dict() for d in self.dimensions],
                "fixed": copy.deepcopy(self.fixed)}

    @classmethod
    def from_dict(cls, data: dict) -> "ParameterSpace":
        return cls(tuple(Dimension(**d) for d in data["dimensions"]),
                   copy.deepcopy(data.get("fixed", {})), data.get("component", ""))


_UNITS = {"position_m": "m", "speed_mps": "m/s", "heading_rad": "rad",
          "course_rad": "rad", "dimensions_m": "m"}


def _odd(model: SystemModel, component_id: str) -> dict:
    parent = model.parent_of(component_id)
    while parent is not None:
        if parent.odd:
            return dict(parent.odd)
        parent = model.parent_of(parent.id)
    return {}


def disturbance_limit(eps_speed: float, settle_time: float, tau: float, v_max: float) -> float:
    """Largest DP speed disturbance that still settles within ``eps_speed``.

    After ``settle_time`` of constant command the initial gap (at most
    ``v_max + D``) has decayed by ``exp(-settle/tau)`` and the disturbance adds
    at most ``D``.
    """
    decay = math.exp(-settle_time / tau)
    return max(0.0, (eps_speed - v_max * decay) / (1.0 + decay))


def derive_parameter_space(model: SystemModel, component_id: str) -> ParameterSpace:
    comp = model.component(component_id)
    formal = [a for a in comp.contract.assumptions if a.formal]
    if not formal:
        raise SpaceError(f"{component_id}: no testable assumptions")

    dmap = build_discharge_map(model)
    index = model.clause_index()
    odd = _odd(model, component_id)

    def provider_atoms(assumption_id: str):
        entry = dmap.entries.get(assumption_id)
        if entry is None or entry.status != DISCHARGED:
            return ()
        return index[entry.provider][1].predicate

    # Assumptions of the providers' components, followed one level down.
    transitive = []
    seen = {a.id for a in formal}
    for a in formal:
        entry = dmap.entries.get(a.id)
        if entry is None or entry.status != DISCHARGED:
            continue
        owner = index[entry.provider][0]
        for b in owner.contract.assumptions:
            if b.formal and b.id not in seen:
                seen.add(b.id)
                transitive.append(b)

    v_max = float(odd.get("v_max_mps", 3.0))
    tau = float(odd.get("tau_s", 2.0))
    d_min = None
    route = odd.get("path_id", "crossing-1")
    for g in comp.contract.guarantees:
        for atom in g.predicate:
            if isinstance(atom, SeparationBound):
                d_min = atom.d_min

    dims: list[Dimension] = []
    declared_atoms = []
    dp_fixed: dict = {"tau_s": tau}
    behaviour: Optional[tuple[str, ObstacleBehaviour]] = None
    for a in formal + transitive:
        prov = provider_atoms(a.id)
        for atom in a.predicate:
            if isinstance(atom, StateErrorBound):
                eps = atom.epsilon
                for p in prov:
                    if (isinstance(p, StateErrorBound) and p.signal == atom.signal
                            and p.subject == atom.subject):
                        eps = min(eps, p.epsilon)
                        declared_atoms.append(p)
                if eps > 0:
                    dims.append(Dimension(f"noise.{atom.subject}.{atom.signal}",
                                          _UNITS[atom.signal], 0.0, eps, a.id))
            elif isinstance(atom, TrackingBound):
                tb = next((p for p in prov if isinstance(p, TrackingBound)), atom)
                dp_fixed.update(eps_pos=tb.eps_pos, eps_speed=tb.eps_speed,
                                settle_time=tb.settle_time)
                limit = disturbance_limit(tb.eps_speed, tb.settle_time, tau, v_max)
                if limit > 0:
                    dims.append(Dimension("dp.speed_disturbance", "m/s", 0.0, limit, a.id))
                if tb.eps_pos > 0 and tb.settle_time > 0:
                    dims.append(Dimension("dp.sway_mps", "m/s", 0.0,
                                          tb.eps_pos / tb.settle_time, a.id))
            elif isinstance(atom, ConfigValid):
                route = atom.route_id
                d_min = atom.d_min
            elif isinstance(atom, ObstacleBehaviour):
                behaviour = (a.id, atom)
    if d_min is None:
        raise SpaceError(f"{component_id}: no safety distance in its contract")

    n_obstacles = int(odd.get("n_obstacles", 2 if behaviour else 0))
    rng_lo, rng_hi = odd.get("obstacle_range_m", (400.0, 1500.0))
    brg_lo, brg_hi = odd.get("obstacle_bearing_deg", (225.0, 315.0))
    crs_lo, crs_hi = odd.get("obstacle_course_deg", (60.0, 120.0))
    spd_lo = float(odd.get("obstacle_min_speed_mps", 0.5))
    if behaviour is not None:
        spd_src, spd_hi = behaviour[0], behaviour[1].max_speed
    else:
        spd_src, spd_hi = ENVIRONMENT, float(odd.get("obstacle_max_speed_mps", 5.0))
    for i in range(n_obstacles):
        dims += [
            Dimension(f"obstacles.{i}.range_m", "m", float(rng_lo), float(rng_hi), ENVIRONMENT),
            Dimension(f"obstacles.{i}.bearing_rad", "rad", math.radians(brg_lo),
                      math.radians(brg_hi), ENVIRONMENT),
            Dimension(f"obstacles.{i}.speed_mps", "m/s", spd_lo, spd_hi, spd_src),
            Dimension(f"obstacles.{i}.course_rad", "rad", math.radians(crs_lo),
                      math.radians(crs_hi), spd_src),
        ]

    declared = Accuracy.from_atoms(declared_atoms)
    base = ScenarioParams(
        path_id=route,
        path_start=tuple(odd.get("path_start_m", (0.0, 0.0))),
        path_end=tuple(odd.get("path_end_m", (0.0, 1000.0))),
        v_max=v_max,
        d_min=float(d_min),
        duration=float(odd.get("duration_s", 300.0)),
        dt=float(odd.get("dt_s", 0.1)),
        control_period=float(odd.get("control_period_s", 1.0)),
        horizon=float(odd.get("horizon_s", 90.0)),
        dv=float(odd.get("dv_mps", 0.1)),
        initial_speed=float(odd.get("initial_speed_mps", 0.0)),
        declared=declared,
    ).to_dict()
    base["dp"].update(dp_fixed)
    base["obstacles"] = [
        {"range_m": float(rng_hi), "bearing_rad": math.radians(brg_lo), "speed_mps": spd_lo,
         "course_rad": math.radians(crs_lo),
         "length_m": float(odd.get("obstacle_length_m", 20.0)),
         "beam_m": float(odd.get("obstacle_beam_m", 6.0)),
         "behaviour": {"model": "constant_velocity"}}
        for _ in range(n_obstacles)
    ]
    return ParameterSpace(tuple(dims), base, component_id)


def promoted_behaviour_ids(model: SystemModel) -> list[str]:
    """Assumption ids carrying an obstacle-behaviour predicate that are promoted upward."""
    dmap = build_discharge_map(model)
    index = model.clause_index()
    return sorted(e.assumption for e in dmap.entries.values()
                  if e.status == PROMOTED
                  and any(isinstance(a, ObstacleBehaviour)
                          for a in index[e.assumption][1].predicate))


BREAK_MODES = ("maneuver", "violating-noise")


def break_assumptions(space: ParameterSpace, mode: str, scale: float = 3.0) -> ParameterSpace:
    """Variant space whose scenarios deliberately violate an assumption.

    ``maneuver`` makes every obstacle turn once by at least 30 degrees;
    ``violating-noise`` scales SITAW errors beyond their declared bounds.
    """
    fixed = copy.deepcopy(space.fixed)
    dims = list(space.dimensions)
    if mode == "maneuver":
        duration = float(fixed["duration"])
        for i, ob in enumerate(fixed.get("obstacles", [])):
            ob["behaviour"] = {"model": "maneuver", "turn_time_s": 0.0, "course_change_rad": 0.0}
            dims += [
                Dimension(f"obstacles.{i}.behaviour.turn_time_s", "s", 10.0, duration - 10.0,
                          ENVIRONMENT),
                Dimension(f"obstacles.{i}.behaviour.course_change_rad", "rad", math.pi / 6,
                          math.pi / 2, ENVIRONMENT),
            ]
        if not fixed.get("obstacles"):
            raise SpaceError("maneuver mode needs obstacles")
    elif mode == "violating-noise":
        fixed["noise_mode"] = {"kind": "violating", "scale": float(scale)}
    else:
        raise SpaceError(f"unknown break mode {mode!r}; choose from {', '.join(BREAK_MODES)}")
    return ParameterSpace(tuple(dims), fixed, space.component)


def lhs_points(ndim: int, n: int, seed: int) -> np.ndarray:
    """Latin hypercube in the unit cube: one point per stratum per dimension.

    Coordinates lie in the open-closed stratum ``(j/n, (j+1)/n]``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    out = np.empty((n, ndim))
    for j in range(ndim):
        perm = rng.permutation(n)
        jitter = 1.0 - rng.random(n)  # (0, 1]
        out[:, j] = (perm + jitter) / n
    return out


def scenario_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master, index]).generate_state(1, np.uint64)[0])


def lhs_sample(space: ParameterSpace, n: int, seed: int) -> list[ScenarioParams]:
    pts = lhs_points(space.ndim, n, seed)
    return [space.build_scenario(pt, scenario_seed(seed, i)) for i, pt in enumerate(pts)]


def point_of(space: ParameterSpace, params: ScenarioParams) -> np.ndarray:
    """Unit-cube coordinates of a scenario built from ``space``."""
    data = params.to_dict()
    return np.array([d.unit_of(float(get_path(data, d.name))) for d in space.dimensions])
