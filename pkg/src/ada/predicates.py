"""Closed predicate vocabulary for machine-checkable contract clauses.

A clause predicate is a conjunction (tuple) of atoms. Each atom is one of the
frozen dataclasses below; entailment is decided per variant by comparing
bounds, so discharge stays decidable.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Any, Iterable, Union

SIGNALS = ("position_m", "speed_mps", "heading_rad", "course_rad", "dimensions_m")
SUBJECTS = ("own", "obstacle")
BEHAVIOUR_MODELS = ("constant_velocity",)


class PredicateError(ValueError):
    """Raised for malformed predicate parameters."""


def _check_nonneg(name: str, value: float) -> None:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise PredicateError(f"{name} must be a number, got {value!r}")
    if not math.isfinite(value) or value < 0:
        raise PredicateError(f"{name} must be finite and nonnegative, got {value!r}")


@dataclass(frozen=True)
class StateErrorBound:
    signal: str
    subject: str
    epsilon: float

    def __post_init__(self):
        if self.signal not in SIGNALS:
            raise PredicateError(f"unknown signal {self.signal!r}")
        if self.subject not in SUBJECTS:
            raise PredicateError(f"unknown subject {self.subject!r}")
        _check_nonneg("epsilon", self.epsilon)


@dataclass(frozen=True)
class SeparationBound:
    d_min: float

    def __post_init__(self):
        _check_nonneg("d_min", self.d_min)
        if self.d_min <= 0:
            raise PredicateError("d_min must be strictly positive")


@dataclass(frozen=True)
class TrackingBound:
    eps_pos: float
    eps_speed: float
    settle_time: float

    def __post_init__(self):
        _check_nonneg("eps_pos", self.eps_pos)
        _check_nonneg("eps_speed", self.eps_speed)
        _check_nonneg("settle_time", self.settle_time)


@dataclass(frozen=True)
class ConfigValid:
    route_id: str
    d_min: float

    def __post_init__(self):
        if not isinstance(self.route_id, str) or not self.route_id:
            raise PredicateError("route_id must be a nonempty string")
        _check_nonneg("d_min", self.d_min)
        if self.d_min <= 0:
            raise PredicateError("d_min must be strictly positive")


@dataclass(frozen=True)
class SafeSetpointRule:
    horizon_s: float

    def __post_init__(self):
        _check_nonneg("horizon_s", self.horizon_s)


@dataclass(frozen=True)
class ObstacleBehaviour:
    model: str
    max_speed: float
    max_turn_rate: float

    def __post_init__(self):
        if self.model not in BEHAVIOUR_MODELS:
            raise PredicateError(f"unknown behaviour model {self.model!r}")
        _check_nonneg("max_speed", self.max_speed)
        _check_nonneg("max_turn_rate", self.max_turn_rate)


Atom = Union[
    StateErrorBound,
    SeparationBound,
    TrackingBound,
    ConfigValid,
    SafeSetpointRule,
    ObstacleBehaviour,
]

VARIANTS: dict[str, type] = {
    cls.__name__: cls
    for cls in (
        StateErrorBound,
        SeparationBound,
        TrackingBound,
        ConfigValid,
        SafeSetpointRule,
        ObstacleBehaviour,
    )
}


def atom_entails(provider: Atom, consumer: Atom) -> bool:
    """True when ``provider`` is at least as strong as ``consumer``."""
    if type(provider) is not type(consumer):
        return False
    p, c = provider, consumer
    if isinstance(p, StateErrorBound):
        return p.signal == c.signal and p.subject == c.subject and p.epsilon <= c.epsilon
    if isinstance(p, SeparationBound):
        return p.d_min >= c.d_min
    if isinstance(p, TrackingBound):
        return (
            p.eps_pos <= c.eps_pos
            and p.eps_speed <= c.eps_speed
            and p.settle_time <= c.settle_time
        )
    if isinstance(p, ConfigValid):
        return p.route_id == c.route_id and p.d_min >= c.d_min
    if isinstance(p, SafeSetpointRule):
        return p.horizon_s >= c.horizon_s
    if isinstance(p, ObstacleBehaviour):
        return (
            p.model == c.model
            and p.max_speed <= c.max_speed
            and p.max_turn_rate <= c.max_turn_rate
        )
    raise TypeError(f"not a predicate atom: {provider!r}")


def predicate_entails(provider: Iterable[Atom], consumer: Iterable[Atom]) -> bool:
    """Conjunction entailment: every consumer atom is implied by some provider atom."""
    provider = tuple(provider)
    consumer = tuple(consumer)
    if not provider or not consumer:
        return False
    return all(any(atom_entails(p, c) for p in provider) for c in consumer)


def atom_to_dict(atom: Atom) -> dict[str, Any]:
    return {"variant": type(atom).__name__, **asdict(atom)}


def atom_from_dict(data: dict[str, Any]) -> Atom:
    data = dict(data)
    try:
        variant = data.pop("variant")
    except KeyError:
        raise PredicateError("predicate object lacks 'variant'") from None
    cls = VARIANTS.get(variant)
    if cls is None:
        raise PredicateError(f"unknown predicate variant {variant!r}")
    names = {f.name for f in fields(cls)}
    extra = set(data) - names
    missing = names - set(data)
    if extra or missing:
        raise PredicateError(
            f"{variant}: unexpected {sorted(extra)} / missing {sorted(missing)}"
        )
    return cls(**data)


def describe(atom: Atom) -> str:
    """Short human-readable rendering used in reports."""
    if isinstance(atom, StateErrorBound):
        return f"|{atom.subject}.{atom.signal} err| <= {atom.epsilon:g}"
    if isinstance(atom, SeparationBound):
        return f"separation >= {atom.d_min:g} m"
    if isinstance(atom, TrackingBound):
        return (
            f"tracking pos <= {atom.eps_pos:g} m, speed <= {atom.eps_speed:g} m/s "
            f"after {atom.settle_time:g} s"
        )
    if isinstance(atom, ConfigValid):
        return f"route {atom.route_id}, d_min {atom.d_min:g} m"
    if isinstance(atom, SafeSetpointRule):
        return f"safe setpoint over {atom.horizon_s:g} s horizon"
    if isinstance(atom, ObstacleBehaviour):
        return (
            f"obstacles {atom.model}, speed <= {atom.max_speed:g} m/s, "
            f"turn <= {atom.max_turn_rate:g} rad/s"
        )
    raise TypeError(atom)
