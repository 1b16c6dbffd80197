"""Responsibility-structure checks and clause stubs from causal factors.

Causal factors are typed by the risk source they act through:

* RS1 -- control input to the Decision component
* RS2 -- implementation/capability of the Decision component itself
* RS3 -- situational-awareness input to the Decision component
* RS4 -- capability of the Action component
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .contracts import entails
from .model import (
    ACTION,
    ASSUMPTION,
    DECISION,
    GUARANTEE,
    SITAW,
    Component,
    Finding,
    SystemModel,
)
from .predicates import StateErrorBound, TrackingBound


class IdentificationError(ValueError):
    pass


@dataclass(frozen=True)
class CausalFactorRecord:
    id: str
    unsafe_control_action: str
    scenario: str
    rs_type: int
    target_decision: str
    # clause ids already added to the model for this factor
    realized_by: tuple[str, ...] = ()

    def __post_init__(self):
        if self.rs_type not in (1, 2, 3, 4):
            raise IdentificationError(f"{self.id}: rs_type must be 1..4, got {self.rs_type!r}")


@dataclass(frozen=True)
class ClauseStub:
    component: str
    kind: str  # "assumption" | "guarantee" | "marker"
    id: Optional[str]
    text: str
    factor_id: str
    rs_type: int
    paired_with: Optional[str] = None

    @property
    def is_marker(self) -> bool:
        return self.kind == "marker"


_ACCURACY_ATOM = {SITAW: StateErrorBound, ACTION: TrackingBound}


def _siblings(model: SystemModel, component_id: str) -> list[Component]:
    parent = model.parent_of(component_id)
    if parent is None:
        return []
    return [ch for ch in parent.children if ch.id != component_id]


def _accuracy_guarantees(comp: Component):
    wanted = _ACCURACY_ATOM.get(comp.kind)
    for g in comp.contract.guarantees:
        if wanted and any(isinstance(a, wanted) for a in g.predicate):
            yield g


def check_responsibility_structure(model: SystemModel) -> list[Finding]:
    findings: list[Finding] = []
    index = model.clause_index()
    links = {link.consumer: link for link in model.links}

    for comp in model.composites():
        decisions = [ch for ch in comp.children if ch.kind == DECISION]
        guarantees = [g.id for g in comp.contract.guarantees]
        if not decisions:
            findings.append(Finding("no decision component", comp.id,
                                    "control composite has no Decision child"))
        elif len(decisions) > 1:
            split = comp.responsibility_split
            if split is None:
                findings.append(Finding(
                    "shared responsibility undeclared", comp.id,
                    f"Decision children {', '.join(d.id for d in decisions)} without a split",
                ))
            else:
                owned = [g for gs in split.values() for g in gs]
                for g in guarantees:
                    if owned.count(g) != 1:
                        findings.append(Finding("responsibility split", g,
                                                "must be owned by exactly one Decision"))
                for owner in split:
                    if owner not in {d.id for d in decisions}:
                        findings.append(Finding("responsibility split", owner,
                                                "split names a non-Decision component"))
        decision_ids = {d.id for d in decisions}
        for g in guarantees:
            heirs = comp.inherits.get(g, ())
            if not any(h in index and index[h][0].id in decision_ids for h in heirs):
                findings.append(Finding("guarantee not inherited", g,
                                        "no Decision guarantee inherits it"))

        for child in comp.children:
            if child.kind not in _ACCURACY_ATOM:
                continue
            label = "SITAW" if child.kind == SITAW else "Action"
            for g in child.contract.guarantees:
                if not any(isinstance(a, _ACCURACY_ATOM[child.kind]) for a in g.predicate):
                    findings.append(Finding(f"{label} guarantee lacks accuracy", g.id,
                                            "no accuracy-qualified predicate"))

        for decision in decisions:
            assumptions = decision.contract.assumptions
            for child in comp.children:
                for g in _accuracy_guarantees(child):
                    referenced = any(
                        (links.get(a.id) and links[a.id].provider == g.id) or entails(g, a)
                        for a in assumptions
                    )
                    if not referenced:
                        findings.append(Finding(
                            "accuracy not accounted", decision.id,
                            f"no assumption relies on {g.id}",
                        ))

    for link in model.links:
        if link.risk_source not in ("RS3", "RS4"):
            continue
        consumer = index.get(link.consumer)
        provider = index.get(link.provider)
        if consumer is None or provider is None:
            continue
        want = SITAW if link.risk_source == "RS3" else ACTION
        if consumer[0].kind != DECISION or provider[0].kind != want:
            findings.append(Finding(
                "risk source placement", f"{link.consumer}->{link.provider}",
                f"{link.risk_source} must link a Decision assumption to a {want} guarantee",
            ))
    return findings


def _next_ids(comp: Component, letter: str, taken: set[str]) -> "Iterable[str]":
    n = 1
    while True:
        cid = f"{comp.id}.{letter}{n}"
        if cid not in taken:
            taken.add(cid)
            yield cid
        n += 1


def derive_clause_stubs(cf: CausalFactorRecord, model: SystemModel,
                        taken: Optional[set[str]] = None) -> list[ClauseStub]:
    """Clause stubs for one causal factor.

    ``taken`` holds clause ids already in use; new stub ids are allocated
    past them and added to it, so successive calls do not collide.
    """
    try:
        decision = model.component(cf.target_decision)
    except KeyError:
        raise IdentificationError(f"{cf.id}: unknown component {cf.target_decision!r}") from None
    if decision.kind != DECISION:
        raise IdentificationError(
            f"{cf.id}: target {decision.id} is {decision.kind}, not a Decision component")
    if taken is None:
        taken = set(model.clause_index())

    def siblings_of(kind: str) -> list[Component]:
        found = sorted((s for s in _siblings(model, decision.id) if s.kind == kind),
                       key=lambda c: c.id)
        if not found:
            raise IdentificationError(f"{cf.id}: no sibling {kind} component of {decision.id}")
        return found

    def assumption(text: str) -> ClauseStub:
        cid = next(_next_ids(decision, "A", taken))
        return ClauseStub(decision.id, ASSUMPTION, cid, text, cf.id, cf.rs_type)

    def guarantee(comp: Component, text: str, paired: str) -> ClauseStub:
        cid = next(_next_ids(comp, "G", taken))
        return ClauseStub(comp.id, GUARANTEE, cid, text, cf.id, cf.rs_type, paired)

    def marker(comp_id: str) -> ClauseStub:
        return ClauseStub(comp_id, "marker", None,
                          f"requires sub-identification of {comp_id}: {cf.scenario}",
                          cf.id, cf.rs_type)

    if cf.rs_type == 1:
        return [assumption(f"Assumes control input is adequate; guards against: {cf.scenario}")]
    if cf.rs_type == 2:
        return [marker(decision.id)]
    if cf.rs_type == 3:
        sitaws = siblings_of(SITAW)
        a = assumption(f"Assumes beliefs within agreed accuracy; guards against: {cf.scenario}")
        return [a] + [
            guarantee(s, f"Provides beliefs within agreed accuracy; addresses: {cf.scenario}", a.id)
            for s in sitaws
        ]
    actions = siblings_of(ACTION)
    a = assumption("Assumes action capability within agreed accuracy; "
                   f"guards against: {cf.scenario}")
    stubs = [a]
    for act in actions:
        stubs.append(guarantee(
            act, f"Achieves commanded action within agreed accuracy; addresses: {cf.scenario}",
            a.id))
        stubs.append(marker(act.id))
    return stubs


def derive_all_stubs(cfs: Iterable[CausalFactorRecord], model: SystemModel) -> list[ClauseStub]:
    taken = set(model.clause_index())
    out: list[ClauseStub] = []
    for cf in cfs:
        out.extend(derive_clause_stubs(cf, model, taken))
    return out


@dataclass(frozen=True)
class CoverageRow:
    component: str
    rs_type: int
    count: int
    pending: int


@dataclass(frozen=True)
class CoverageTable:
    rows: tuple[CoverageRow, ...] = field(default_factory=tuple)

    def get(self, component: str, rs_type: int) -> CoverageRow:
        for row in self.rows:
            if row.component == component and row.rs_type == rs_type:
                return row
        raise KeyError((component, rs_type))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["component", "rs_type", "count", "pending"])
        for row in self.rows:
            writer.writerow([row.component, f"RS{row.rs_type}", row.count, row.pending])
        return buf.getvalue()


def risk_source_coverage(model: SystemModel,
                         cfs: Iterable[CausalFactorRecord]) -> CoverageTable:
    """Factor counts per Decision component and RS type.

    A factor is pending until every clause id in its ``realized_by`` resolves
    in the model (a factor with no ``realized_by`` is pending).
    """
    clause_ids = set(model.clause_index())
    decisions = sorted(c.id for c in model.walk() if c.kind == DECISION)
    counts = {(d, rs): [0, 0] for d in decisions for rs in (1, 2, 3, 4)}
    for cf in cfs:
        key = (cf.target_decision, cf.rs_type)
        if key not in counts:
            raise IdentificationError(f"{cf.id}: {cf.target_decision} is not a Decision component")
        counts[key][0] += 1
        realized = bool(cf.realized_by) and all(c in clause_ids for c in cf.realized_by)
        if not realized:
            counts[key][1] += 1
    return CoverageTable(tuple(
        CoverageRow(d, rs, *counts[(d, rs)]) for d in decisions for rs in (1, 2, 3, 4)
    ))


def factors_from_list(data: list) -> list[CausalFactorRecord]:
    if not isinstance(data, list):
        raise IdentificationError("factor file must hold a JSON list")
    out = []
    for i, item in enumerate(data):
        try:
            out.append(CausalFactorRecord(
                id=item["id"],
                unsafe_control_action=item.get("unsafe_control_action", ""),
                scenario=item["scenario"],
                rs_type=item["rs_type"],
                target_decision=item["target_decision"],
                realized_by=tuple(item.get("realized_by", ())),
            ))
        except (KeyError, TypeError) as exc:
            raise IdentificationError(f"factor [{i}]: missing field {exc}") from None
    return out
