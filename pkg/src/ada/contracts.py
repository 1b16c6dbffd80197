"""Contract well-formedness, clause entailment and refinement checking."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .model import (
    ASSUMPTION,
    COMPONENT_KINDS,
    DECISION,
    GUARANTEE,
    RESOURCE,
    RISK_SOURCES,
    Clause,
    Contract,
    Finding,
    ModelError,
    SystemModel,
)
from .predicates import predicate_entails

DISCHARGED = "discharged"
PROMOTED = "promoted"
UNDISCHARGED = "undischarged"
INCOMPATIBLE = "incompatible"


def _kind_letter(clause: Clause) -> str:
    return clause.local_id[:1]


def validate_contract(contract: Contract, component_kind: Optional[str] = None,
                      subject: str = "contract") -> list[Finding]:
    """Check the template invariants of a single contract.

    Returns an empty list when every invariant holds.
    """
    findings = []
    for field_name, expected, clauses in (
        ("assumptions", ASSUMPTION, contract.assumptions),
        ("guarantees", GUARANTEE, contract.guarantees),
    ):
        for clause in clauses:
            if clause.kind != expected:
                findings.append(Finding(
                    "kind mismatch", clause.id,
                    f"{clause.kind} clause listed under {field_name}",
                ))
            elif _kind_letter(clause) != {"assumption": "A", "guarantee": "G"}[clause.kind]:
                findings.append(Finding(
                    "id letter mismatch", clause.id,
                    f"id letter {_kind_letter(clause)!r} does not match kind {clause.kind}",
                ))
    seen = set()
    for clause in contract.clauses:
        if clause.id in seen:
            findings.append(Finding("duplicate clause", clause.id, "clause id repeated"))
        seen.add(clause.id)
    if component_kind != RESOURCE and not contract.guarantees:
        findings.append(Finding(
            "missing guarantee", subject,
            f"{component_kind or 'component'} contract has no guarantee",
        ))
    return findings


def entails(provider: Clause, consumer: Clause) -> bool:
    """Whether a guarantee is strong enough to discharge an assumption.

    Informal clauses never entail by themselves; they are only discharged by
    an explicit dependency link, which the caller checks.
    """
    if provider.kind != GUARANTEE or consumer.kind != ASSUMPTION:
        raise ValueError(
            f"entails expects (guarantee, assumption), got "
            f"({provider.kind}, {consumer.kind})"
        )
    if not provider.formal or not consumer.formal:
        return False
    return predicate_entails(provider.predicate, consumer.predicate)


def structural_findings(model: SystemModel) -> list[Finding]:
    """Tree, id and link consistency; everything later operations rely on."""
    findings = []
    comp_ids: set[str] = set()
    clause_ids: set[str] = set()
    for comp in model.walk():
        if comp.id in comp_ids:
            findings.append(Finding("duplicate component", comp.id, "component id repeated"))
        comp_ids.add(comp.id)
        if comp.kind not in COMPONENT_KINDS:
            findings.append(Finding("unknown kind", comp.id, f"kind {comp.kind!r}"))
        if comp.is_composite and not comp.children:
            findings.append(Finding("empty composite", comp.id, "Composite has no children"))
        if not comp.is_composite and comp.children:
            findings.append(Finding("unexpected children", comp.id,
                                    f"{comp.kind} component cannot have children"))
        for clause in comp.contract.clauses:
            if clause.id in clause_ids:
                findings.append(Finding("duplicate clause", clause.id,
                                        "clause id not unique in model"))
            clause_ids.add(clause.id)
            if clause.component_id != comp.id:
                findings.append(Finding("clause prefix", clause.id,
                                        f"clause id does not start with {comp.id}."))

    index = model.clause_index()
    seen_consumers = set()
    for link in model.links:
        subject = f"{link.consumer}->{link.provider}"
        consumer = index.get(link.consumer)
        provider = index.get(link.provider)
        if consumer is None:
            findings.append(Finding("dangling link", subject, f"unknown clause {link.consumer}"))
        elif consumer[1].kind != ASSUMPTION:
            findings.append(Finding("link kind", subject, "consumer must be an assumption"))
        if provider is None:
            findings.append(Finding("dangling link", subject, f"unknown clause {link.provider}"))
        elif provider[1].kind != GUARANTEE:
            findings.append(Finding("link kind", subject, "provider must be a guarantee"))
        if link.risk_source is not None and link.risk_source not in RISK_SOURCES:
            findings.append(Finding("risk source", subject, f"unknown {link.risk_source!r}"))
        if link.consumer in seen_consumers:
            findings.append(Finding("duplicate link", subject,
                                    f"{link.consumer} has more than one explicit provider"))
        seen_consumers.add(link.consumer)

    for comp in model.composites():
        child_ids = {ch.id for ch in comp.children}
        own_assumptions = {c.id for c in comp.contract.assumptions}
        own_guarantees = {c.id for c in comp.contract.guarantees}
        for child_a, parent_a in comp.promotes.items():
            entry = index.get(child_a)
            if entry is None or entry[1].kind != ASSUMPTION or entry[0].id not in child_ids:
                findings.append(Finding("promotion", child_a,
                                        f"not an assumption of a child of {comp.id}"))
            if parent_a not in own_assumptions:
                findings.append(Finding("promotion", child_a,
                                        f"{parent_a} is not an assumption of {comp.id}"))
        for parent_g, heirs in comp.inherits.items():
            if parent_g not in own_guarantees:
                findings.append(Finding("inheritance", parent_g,
                                        f"not a guarantee of {comp.id}"))
            for heir in heirs:
                entry = index.get(heir)
                if entry is None or entry[1].kind != GUARANTEE or entry[0].id not in child_ids:
                    findings.append(Finding("inheritance", heir,
                                            f"not a guarantee of a child of {comp.id}"))
    return findings


@dataclass(frozen=True)
class DischargeEntry:
    assumption: str
    status: str
    provider: Optional[str] = None
    via: Optional[str] = None  # "link" | "entailment" | "promotion"


@dataclass(frozen=True)
class DischargeMap:
    entries: dict[str, DischargeEntry]
    findings: tuple[Finding, ...] = ()

    def edges(self) -> list[tuple[str, str]]:
        return [(e.assumption, e.provider) for e in self.entries.values()
                if e.status == DISCHARGED]

    def promoted(self) -> dict[str, str]:
        return {e.assumption: e.provider for e in self.entries.values()
                if e.status == PROMOTED}

    def open(self) -> list[DischargeEntry]:
        return [e for e in self.entries.values()
                if e.status in (UNDISCHARGED, INCOMPATIBLE)]

    def __getitem__(self, assumption_id: str) -> DischargeEntry:
        return self.entries[assumption_id]

    def __len__(self) -> int:
        return len(self.entries)


def build_discharge_map(model: SystemModel) -> DischargeMap:
    problems = structural_findings(model)
    if problems:
        raise ModelError("; ".join(str(f) for f in problems))

    leaves = model.leaves()
    index = model.clause_index()
    promotions: dict[str, str] = {}
    for comp in model.composites():
        promotions.update(comp.promotes)
    explicit = {link.consumer: link for link in model.links}
    providers = [(comp.id, g) for comp in leaves for g in comp.contract.guarantees]

    entries: dict[str, DischargeEntry] = {}
    findings: list[Finding] = []
    for comp in leaves:
        for a in comp.contract.assumptions:
            link = explicit.get(a.id)
            if link is not None:
                g = index[link.provider][1]
                if a.formal and g.formal and not entails(g, a):
                    entries[a.id] = DischargeEntry(a.id, INCOMPATIBLE, g.id, "link")
                    findings.append(Finding(
                        "incompatible link", a.id,
                        f"{g.id} does not entail {a.id}",
                    ))
                else:
                    entries[a.id] = DischargeEntry(a.id, DISCHARGED, g.id, "link")
                continue
            if a.id in promotions:
                entries[a.id] = DischargeEntry(a.id, PROMOTED, promotions[a.id], "promotion")
                continue
            candidates = [g.id for owner, g in providers
                          if owner != comp.id and g.formal and a.formal and entails(g, a)]
            if len(candidates) == 1:
                entries[a.id] = DischargeEntry(a.id, DISCHARGED, candidates[0], "entailment")
            else:
                entries[a.id] = DischargeEntry(a.id, UNDISCHARGED)
                if len(candidates) > 1:
                    findings.append(Finding(
                        "ambiguous discharge", a.id,
                        f"candidate providers {', '.join(candidates)}; add an explicit link",
                    ))
    return DischargeMap(entries, tuple(findings))


def _informal_cycles(model: SystemModel) -> list[tuple[str, ...]]:
    """Cycles through explicit links that rely on at least one informal clause.

    Formal links are justified by bound comparison and do not count as
    circular reasoning within one control tick.
    """
    index = model.clause_index()
    graph: dict[str, list[str]] = {}
    for link in model.links:
        a = index[link.consumer][1]
        g = index[link.provider][1]
        if not (a.formal and g.formal):
            graph.setdefault(a.id, []).append(g.id)
    for comp in model.leaves():
        for g in comp.contract.guarantees:
            graph.setdefault(g.id, []).extend(a.id for a in comp.contract.assumptions)

    # Tarjan's strongly connected components
    counter = [0]
    low: dict[str, int] = {}
    num: dict[str, int] = {}
    stack: list[str] = []
    on_stack: set[str] = set()
    sccs: list[tuple[str, ...]] = []

    def visit(v: str) -> None:
        num[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        for w in graph.get(v, ()):
            if w not in num:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], num[w])
        if low[v] == num[v]:
            scc = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                scc.append(w)
                if w == v:
                    break
            if len(scc) > 1:
                sccs.append(tuple(sorted(scc)))

    for node in sorted(graph):
        if node not in num:
            visit(node)
    return sorted(sccs)


@dataclass(frozen=True)
class RefinementReport:
    passed: bool
    discharge_map: Optional[DischargeMap]
    promoted: dict[str, str] = field(default_factory=dict)
    inheritance: dict[str, tuple[str, ...]] = field(default_factory=dict)
    cycles: tuple[tuple[str, ...], ...] = ()
    findings: tuple[Finding, ...] = ()


def check_refinement(model: SystemModel) -> RefinementReport:
    problems = structural_findings(model)
    if problems:
        return RefinementReport(False, None, findings=tuple(problems))

    dmap = build_discharge_map(model)
    findings = list(dmap.findings)
    for entry in dmap.open():
        if entry.status == UNDISCHARGED:
            findings.append(Finding("undischarged", entry.assumption,
                                    "no provider and not promoted"))

    index = model.clause_index()
    promoted = dmap.promoted()
    for child_a, parent_a in promoted.items():
        child = index[child_a][1]
        parent = index[parent_a][1]
        if child.formal and parent.formal and not predicate_entails(parent.predicate,
                                                                   child.predicate):
            findings.append(Finding("weak promotion", child_a,
                                    f"{parent_a} does not cover {child_a}"))

    inheritance: dict[str, tuple[str, ...]] = {}
    for comp in model.composites():
        decisions = {ch.id for ch in comp.children if ch.kind == DECISION}
        for g in comp.contract.guarantees:
            heirs = tuple(comp.inherits.get(g.id, ()))
            inheritance[g.id] = heirs
            if not heirs:
                findings.append(Finding("not inherited", g.id,
                                        f"{g.id} not inherited by a Decision guarantee"))
                continue
            if len(heirs) > 1:
                findings.append(Finding("multiple heirs", g.id,
                                        f"inherited by {', '.join(heirs)}"))
            for heir in heirs:
                owner, clause = index[heir]
                if owner.id not in decisions:
                    findings.append(Finding("not inherited", g.id,
                                            f"{heir} is not a Decision guarantee"))
                elif clause.formal and g.formal and not predicate_entails(
                        clause.predicate, g.predicate):
                    findings.append(Finding("weak inheritance", g.id,
                                            f"{heir} is weaker than {g.id}"))

    cycles = _informal_cycles(model)
    for cycle in cycles:
        findings.append(Finding("discharge cycle", ",".join(cycle),
                                "explicit links form a cycle of informal dependencies"))

    return RefinementReport(
        passed=not findings,
        discharge_map=dmap,
        promoted=promoted,
        inheritance=inheritance,
        cycles=tuple(cycles),
        findings=tuple(findings),
    )
