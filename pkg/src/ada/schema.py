"""JSON encoding of system models and causal-factor lists.

Model file layout::

    {
      "schema_version": "1.0",
      "name": "...",
      "components": [{"id", "kind", "contract": {...}}, ...],
      "links": [{"consumer": "MPCS.A2", "provider": "SITAW.G1", "risk_source": "RS3"}],
      "composite": {"id", "kind": "Composite", "contract": {...}, "children": [ids],
                    "inherits": {"Ferry.G1": ["MPCS.G1"]},
                    "promotes": {"SITAW.A1": "Ferry.A1"},
                    "responsibility_split": null, "odd": {...}}
    }

A contract is ``{"responsibility", "function", "inputs", "outputs",
"assumptions": [clause], "guarantees": [clause]}`` and a clause is
``{"id", "text", "predicate"}`` where ``predicate`` is a tagged object, a
list of tagged objects (conjunction) or null. The clause kind follows from
the list it appears in unless ``"kind"`` is given explicitly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Union

from .model import (
    ASSUMPTION,
    COMPOSITE,
    GUARANTEE,
    Clause,
    Component,
    Contract,
    DependencyLink,
    ModelError,
    SystemModel,
)
from .predicates import PredicateError, atom_from_dict, atom_to_dict

SCHEMA_VERSION = "1.0"


class SchemaError(ValueError):
    """Malformed model or factor file; ``location`` names where parsing failed."""

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


def _clause_from_dict(data: dict, default_kind: str, where: str) -> Clause:
    if not isinstance(data, dict) or "id" not in data:
        raise SchemaError("clause must be an object with an 'id'", where)
    raw = data.get("predicate")
    try:
        if raw is None:
            predicate = ()
        elif isinstance(raw, list):
            predicate = tuple(atom_from_dict(p) for p in raw)
        else:
            predicate = (atom_from_dict(raw),)
    except (PredicateError, TypeError) as exc:
        raise SchemaError(str(exc), f"{where}.predicate") from None
    return Clause(
        id=str(data["id"]),
        kind=data.get("kind", default_kind),
        text=data.get("text", ""),
        predicate=predicate,
    )


def _contract_from_dict(data: dict, where: str) -> Contract:
    if not isinstance(data, dict):
        raise SchemaError("contract must be an object", where)
    return Contract(
        responsibility=data.get("responsibility", ""),
        function=data.get("function", ""),
        inputs=tuple(data.get("inputs", ())),
        outputs=tuple(data.get("outputs", ())),
        assumptions=tuple(
            _clause_from_dict(c, ASSUMPTION, f"{where}.assumptions[{i}]")
            for i, c in enumerate(data.get("assumptions", ()))
        ),
        guarantees=tuple(
            _clause_from_dict(c, GUARANTEE, f"{where}.guarantees[{i}]")
            for i, c in enumerate(data.get("guarantees", ()))
        ),
    )


def _component_from_dict(data: dict, where: str) -> Component:
    if not isinstance(data, dict) or "id" not in data or "kind" not in data:
        raise SchemaError("component needs 'id' and 'kind'", where)
    return Component(
        id=data["id"],
        kind=data["kind"],
        contract=_contract_from_dict(data.get("contract", {}), f"{where}.contract"),
    )


def model_from_dict(data: dict) -> SystemModel:
    if not isinstance(data, dict):
        raise SchemaError("top level must be an object", "$")
    leaves = [_component_from_dict(c, f"components[{i}]")
              for i, c in enumerate(data.get("components", []))]
    by_id = {c.id: c for c in leaves}
    roots: list[Component] = []
    comp = data.get("composite")
    claimed: set[str] = set()
    if comp:
        where = "composite"
        base = _component_from_dict({"kind": COMPOSITE, **comp}, where)
        children = []
        for cid in comp.get("children", []):
            if cid not in by_id:
                raise SchemaError(f"unknown child component {cid!r}", f"{where}.children")
            children.append(by_id[cid])
            claimed.add(cid)
        inherits = {k: tuple([v] if isinstance(v, str) else v)
                    for k, v in comp.get("inherits", {}).items()}
        split = comp.get("responsibility_split")
        roots.append(Component(
            id=base.id, kind=base.kind, contract=base.contract,
            children=tuple(children), inherits=inherits,
            promotes=comp.get("promotes", {}),
            responsibility_split=split, odd=comp.get("odd", {}),
        ))
    roots.extend(c for c in leaves if c.id not in claimed)
    links = []
    for i, link in enumerate(data.get("links", [])):
        try:
            links.append(DependencyLink(link["consumer"], link["provider"],
                                        link.get("risk_source")))
        except (KeyError, TypeError):
            raise SchemaError("link needs 'consumer' and 'provider'", f"links[{i}]") from None
    return SystemModel(
        name=data.get("name", ""),
        components=tuple(roots),
        links=tuple(links),
        assurance_context=data.get("assurance_context", "in-context"),
        profile=data.get("profile", {}),
    )


def load_json(path: Union[str, Path]) -> Any:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None


def load_model(path: Union[str, Path]) -> SystemModel:
    return model_from_dict(load_json(path))


def _clause_to_dict(clause: Clause) -> dict:
    out: dict[str, Any] = {"id": clause.id, "text": clause.text}
    if not clause.predicate:
        out["predicate"] = None
    elif len(clause.predicate) == 1:
        out["predicate"] = atom_to_dict(clause.predicate[0])
    else:
        out["predicate"] = [atom_to_dict(a) for a in clause.predicate]
    return out


def _contract_to_dict(contract: Contract) -> dict:
    return {
        "responsibility": contract.responsibility,
        "function": contract.function,
        "inputs": list(contract.inputs),
        "outputs": list(contract.outputs),
        "assumptions": [_clause_to_dict(c) for c in contract.assumptions],
        "guarantees": [_clause_to_dict(c) for c in contract.guarantees],
    }


def model_to_dict(model: SystemModel) -> dict:
    composites = [c for c in model.components if c.is_composite]
    if len(composites) > 1:
        raise ModelError("file format holds at most one composite")
    leaves = [c for c in model.walk() if not c.is_composite]
    out: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "name": model.name,
        "assurance_context": model.assurance_context,
        "profile": dict(model.profile),
        "components": [
            {"id": c.id, "kind": c.kind, "contract": _contract_to_dict(c.contract)}
            for c in leaves
        ],
        "links": [
            {"consumer": l.consumer, "provider": l.provider, "risk_source": l.risk_source}
            for l in model.links
        ],
        "composite": None,
    }
    if composites:
        comp = composites[0]
        out["composite"] = {
            "id": comp.id,
            "contract": _contract_to_dict(comp.contract),
            "children": [ch.id for ch in comp.children],
            "inherits": {k: list(v) for k, v in comp.inherits.items()},
            "promotes": dict(comp.promotes),
            "responsibility_split": (
                {k: list(v) for k, v in comp.responsibility_split.items()}
                if comp.responsibility_split is not None else None
            ),
            "odd": dict(comp.odd),
        }
    return out
