"""Domain types: clauses, contracts, components and the system model tree."""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Iterator, Mapping, Optional

from .predicates import Atom

ASSUMPTION = "assumption"
GUARANTEE = "guarantee"
CLAUSE_KINDS = (ASSUMPTION, GUARANTEE)

DECISION = "Decision"
SITAW = "SITAW"
ACTION = "Action"
RESOURCE = "Resource"
COMPOSITE = "Composite"
EXTERNAL = "ExternalEntity"
COMPONENT_KINDS = (DECISION, SITAW, ACTION, RESOURCE, COMPOSITE, EXTERNAL)

RISK_SOURCES = ("RS1", "RS2", "RS3", "RS4")


class ModelError(ValueError):
    """Structural problem that prevents an operation from running."""


@dataclass(frozen=True)
class Finding:
    rule: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.subject}: {self.rule}: {self.message}"


@dataclass(frozen=True)
class Clause:
    id: str
    kind: str
    text: str = ""
    predicate: tuple[Atom, ...] = ()

    @property
    def formal(self) -> bool:
        return bool(self.predicate)

    @property
    def component_id(self) -> str:
        return self.id.rsplit(".", 1)[0]

    @property
    def local_id(self) -> str:
        return self.id.rsplit(".", 1)[-1]


@dataclass(frozen=True)
class Contract:
    responsibility: str = ""
    function: str = ""
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    assumptions: tuple[Clause, ...] = ()
    guarantees: tuple[Clause, ...] = ()

    @property
    def clauses(self) -> tuple[Clause, ...]:
        return self.assumptions + self.guarantees


@dataclass(frozen=True)
class DependencyLink:
    consumer: str
    provider: str
    risk_source: Optional[str] = None


def _frozen(mapping: Optional[Mapping]) -> Mapping:
    return MappingProxyType(dict(mapping or {}))


@dataclass(frozen=True)
class Component:
    id: str
    kind: str
    contract: Contract = field(default_factory=Contract)
    children: tuple["Component", ...] = ()
    # Composite-only: composite guarantee id -> inheriting Decision guarantee id
    inherits: Mapping[str, str] = field(default_factory=dict)
    # Composite-only: child assumption id -> composite assumption id
    promotes: Mapping[str, str] = field(default_factory=dict)
    # Composite-only: Decision component id -> composite guarantee ids it owns
    responsibility_split: Optional[Mapping[str, tuple[str, ...]]] = None
    odd: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "inherits", _frozen(self.inherits))
        object.__setattr__(self, "promotes", _frozen(self.promotes))
        object.__setattr__(self, "odd", _frozen(self.odd))
        if self.responsibility_split is not None:
            split = {k: tuple(v) for k, v in self.responsibility_split.items()}
            object.__setattr__(self, "responsibility_split", _frozen(split))

    def __hash__(self):
        return hash((self.id, self.kind))

    @property
    def is_composite(self) -> bool:
        return self.kind == COMPOSITE

    def walk(self) -> Iterator["Component"]:
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class SystemModel:
    name: str = ""
    components: tuple[Component, ...] = ()
    links: tuple[DependencyLink, ...] = ()
    assurance_context: str = "in-context"
    profile: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "profile", _frozen(self.profile))

    def __hash__(self):
        return hash((self.name, self.components, self.links))

    def walk(self) -> Iterator[Component]:
        for root in self.components:
            yield from root.walk()

    def component(self, component_id: str) -> Component:
        for comp in self.walk():
            if comp.id == component_id:
                return comp
        raise KeyError(component_id)

    def composites(self) -> list[Component]:
        return [c for c in self.walk() if c.is_composite]

    def leaves(self) -> list[Component]:
        return [c for c in self.walk() if not c.is_composite]

    def parent_of(self, component_id: str) -> Optional[Component]:
        for comp in self.walk():
            if any(ch.id == component_id for ch in comp.children):
                return comp
        return None

    def clause_index(self) -> dict[str, tuple[Component, Clause]]:
        index: dict[str, tuple[Component, Clause]] = {}
        for comp in self.walk():
            for clause in comp.contract.clauses:
                index.setdefault(clause.id, (comp, clause))
        return index

    def clause(self, clause_id: str) -> Clause:
        try:
            return self.clause_index()[clause_id][1]
        except KeyError:
            raise KeyError(clause_id) from None

    def links_from(self, consumer_id: str) -> list[DependencyLink]:
        return [link for link in self.links if link.consumer == consumer_id]
