"""Evidence, claims and the rendered assurance report.

A claim is bound to one guarantee clause. Its status is always computed:
refuted by any refuting evidence, supported when children are supported,
observation coverage reaches the threshold and refinement passed, otherwise
undetermined. Insight and circumstantial evidence annotate but never add
coverage.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Mapping, Optional, Sequence

from . import __version__
from .contracts import RefinementReport
from .model import COMPOSITE, Component, SystemModel
from .predicates import describe
from .schema import SCHEMA_VERSION

if TYPE_CHECKING:
    from .sbt.campaign import CampaignReport

EVIDENCE_KINDS = ("observation", "insight", "circumstantial")
RESULTS = ("supports", "refutes", "inconclusive")
SUPPORTED, REFUTED, UNDETERMINED = "supported", "refuted", "undetermined"


class AssuranceError(ValueError):
    pass


@dataclass(frozen=True)
class EvidenceItem:
    id: str
    kind: str
    target_clauses: tuple[str, ...]
    source: str
    coverage: float = 0.0
    result: str = "inconclusive"
    counterexamples: tuple[str, ...] = ()
    annotations: Mapping[str, str] = field(default_factory=dict)  # strength, relevance, ...

    def __post_init__(self):
        if self.kind not in EVIDENCE_KINDS:
            raise AssuranceError(f"evidence {self.id}: unknown kind {self.kind!r}")
        if self.result not in RESULTS:
            raise AssuranceError(f"evidence {self.id}: unknown result {self.result!r}")
        if not 0.0 <= self.coverage <= 1.0:
            raise AssuranceError(f"evidence {self.id}: coverage must lie in [0, 1]")
        if not self.target_clauses:
            raise AssuranceError(f"evidence {self.id}: no target clauses")
        object.__setattr__(self, "target_clauses", tuple(self.target_clauses))
        object.__setattr__(self, "counterexamples", tuple(self.counterexamples))
        object.__setattr__(self, "annotations", dict(self.annotations))

    def __hash__(self):
        return hash(self.id)

    def to_dict(self) -> dict:
        return {"id": self.id, "kind": self.kind, "target_clauses": list(self.target_clauses),
                "source": self.source, "coverage": self.coverage, "result": self.result,
                "counterexamples": list(self.counterexamples),
                "annotations": dict(sorted(self.annotations.items()))}

    @classmethod
    def from_dict(cls, data: dict) -> "EvidenceItem":
        return cls(data["id"], data["kind"], tuple(data["target_clauses"]), data["source"],
                   float(data.get("coverage", 0.0)), data.get("result", "inconclusive"),
                   tuple(data.get("counterexamples", ())), data.get("annotations", {}))


@dataclass(frozen=True)
class ClaimNode:
    id: str
    clause_id: str
    claim: str
    children: tuple["ClaimNode", ...] = ()
    evidence: tuple[str, ...] = ()

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


def evaluate_claim_status(node: ClaimNode, threshold: float,
                          evidence: Mapping[str, EvidenceItem],
                          refinement_ok: bool = True) -> str:
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must lie in (0, 1]")
    items = []
    for eid in node.evidence:
        if eid not in evidence:
            raise AssuranceError(f"claim {node.id}: dangling evidence id {eid}")
        items.append(evidence[eid])
    child_status = [evaluate_claim_status(c, threshold, evidence, refinement_ok)
                    for c in node.children]
    if any(e.result == "refutes" for e in items):
        return REFUTED
    coverage = max((e.coverage for e in items
                    if e.kind == "observation" and e.result == "supports"), default=0.0)
    if (all(s == SUPPORTED for s in child_status) and coverage >= threshold
            and refinement_ok):
        return SUPPORTED
    return UNDETERMINED


def build_claims(model: SystemModel, evidence: Sequence[EvidenceItem]) -> list[ClaimNode]:
    """One claim per composite guarantee, its heirs as sub-claims.

    Other guarantees get a claim of their own when evidence targets them.
    """
    index = model.clause_index()
    by_clause: dict[str, list[str]] = {}
    for e in evidence:
        for cid in e.target_clauses:
            by_clause.setdefault(cid, []).append(e.id)

    def node(clause_id: str, children=()) -> ClaimNode:
        clause = index[clause_id][1]
        return ClaimNode(f"C-{clause_id}", clause_id, clause.text, tuple(children),
                         tuple(sorted(by_clause.get(clause_id, ()))))

    claims: list[ClaimNode] = []
    covered: set[str] = set()
    for comp in model.composites():
        for g in comp.contract.guarantees:
            heirs = [h for h in comp.inherits.get(g.id, ()) if h in index]
            claims.append(node(g.id, [node(h) for h in heirs]))
            covered.add(g.id)
            covered.update(heirs)
    for cid in sorted(by_clause):
        if cid not in covered and cid in index and index[cid][1].kind == "guarantee":
            claims.append(node(cid))
    return claims


@dataclass(frozen=True)
class ReportBundle:
    markdown: str
    json: str
    dot: str

    def files(self) -> dict[str, str]:
        return {"report.md": self.markdown, "report.json": self.json, "model.dot": self.dot}


def _md_escape(text: str) -> str:
    return text.replace("|", "\\|").replace("\n", " ")


def _clause_cell(clause) -> str:
    text = _md_escape(clause.text)
    if clause.formal:
        text += " `" + "; ".join(describe(a) for a in clause.predicate) + "`"
    else:
        text += " (informal)"
    return text


def _contract_table(comp: Component) -> list[str]:
    c = comp.contract
    rows = [
        ("R", _md_escape(c.responsibility)),
        ("F", _md_escape(c.function)),
        ("I", ", ".join(c.inputs)),
        ("O", ", ".join(c.outputs)),
    ]
    rows += [(cl.local_id, _clause_cell(cl)) for cl in c.assumptions]
    rows += [(cl.local_id, _clause_cell(cl)) for cl in c.guarantees]
    out = [f"### {comp.id} ({comp.kind})", "", "| | |", "|---|---|"]
    out += [f"| {k} | {v} |" for k, v in rows]
    return out + [""]


def _check_references(model: SystemModel, campaigns, claims, evidence) -> None:
    index = model.clause_index()
    ids = {c.id for c in model.walk()}
    missing = []
    for rep in campaigns:
        if rep.component not in ids:
            missing.append(rep.component)
        missing += [c for c in rep.monitored_guarantees + rep.monitored_assumptions
                    if c not in index]
    for e in evidence.values():
        missing += [c for c in e.target_clauses if c not in index]
    for root in claims:
        for n in root.walk():
            if n.clause_id not in index:
                missing.append(n.clause_id)
            missing += [e for e in n.evidence if e not in evidence]
    if missing:
        raise AssuranceError("unresolvable reference(s): " + ", ".join(sorted(set(missing))))


def render_report(model: SystemModel, refinement: RefinementReport,
                  campaigns: Sequence["CampaignReport"], claims: Optional[Sequence[ClaimNode]],
                  threshold: float = 0.8,
                  extra_evidence: Sequence[EvidenceItem] = ()) -> ReportBundle:
    """Markdown, JSON and DOT renderings; identical inputs give identical bytes."""
    evidence = {e.id: e for e in [c.evidence() for c in campaigns] + list(extra_evidence)}
    if claims is None:
        claims = build_claims(model, list(evidence.values()))
    _check_references(model, campaigns, claims, evidence)
    statuses = {n.id: evaluate_claim_status(n, threshold, evidence, refinement.passed)
                for root in claims for n in root.walk()}
    dmap = refinement.discharge_map
    entries = sorted(dmap.entries.values(), key=lambda e: e.assumption) if dmap else []
    risk = {link.consumer: link.risk_source for link in model.links}

    md = [f"# Assurance report: {model.name or 'unnamed model'}", "",
          f"Tool version {__version__}, schema {SCHEMA_VERSION}. "
          f"Assurance context: {model.assurance_context}.", "", "## Contracts", ""]
    for comp in model.walk():
        md += _contract_table(comp)

    md += ["## Discharge", ""]
    if entries:
        md += ["| Assumption | Status | Provider | Via | Risk source |",
               "|---|---|---|---|---|"]
        md += [f"| {e.assumption} | {e.status} | {e.provider or '-'} | {e.via or '-'} "
               f"| {risk.get(e.assumption) or '-'} |" for e in entries]
        md.append("")
        md += ["Edges:", ""]
        md += [f"- {a} -> {g}" for a, g in sorted(dmap.edges())]
    promoted = sorted(refinement.promoted.items())
    if promoted:
        md += ["", "Promoted to the composite:", ""]
        md += [f"- {a} -> {p}" for a, p in promoted]
    if refinement.inheritance:
        md += ["", "Inherited guarantees:", ""]
        md += [f"- {g} <- {', '.join(h) or 'none'}"
               for g, h in sorted(refinement.inheritance.items())]
    md += ["", "## Refinement", "", f"Result: {'pass' if refinement.passed else 'fail'}", ""]
    md += [f"- {f}" for f in refinement.findings]
    if refinement.findings:
        md.append("")

    md += ["## Campaigns", ""]
    for rep in campaigns:
        md += [f"### {rep.campaign_id}", "",
               f"Component {rep.component}, policy {rep.plan.policy}, "
               f"master seed {rep.master_seed}"
               + (f", break mode {rep.plan.break_mode}" if rep.plan.break_mode else "") + ".",
               "",
               "| Samples | Pass | Falsified | Vacuous | Coverage | Min separation (m) |",
               "|---|---|---|---|---|---|",
               f"| {len(rep.verdicts)} | {rep.pass_count} | {rep.falsification_count} "
               f"| {rep.vacuous_count} | {rep.coverage:.4f} | {_fmt(rep.min_separation)} |", ""]
        falsified = [v.scenario_id for v in rep.verdicts if v.classification == "falsified"]
        if falsified:
            md += ["Falsifying scenarios: " + ", ".join(falsified), ""]
        for cx in rep.counterexamples:
            md.append(f"- counterexample {cx['id']} violates {', '.join(cx['violated'])}; "
                      f"shrunk in {cx['simulations']} runs, "
                      f"still falsified: {'yes' if cx['still_falsified'] else 'no'}")
        if rep.counterexamples:
            md.append("")
        boundary = rep.boundary()
        if boundary:
            md.append("Smallest passing margins: "
                      + ", ".join(f"{sid} ({_fmt(m)} m)" for sid, m in boundary))
            md.append("")

    md += ["## Claims", "", f"Coverage threshold {threshold:g}.", ""]

    def claim_lines(node: ClaimNode, depth: int) -> list[str]:
        ev = f" [evidence: {', '.join(node.evidence)}]" if node.evidence else ""
        line = (f"{'  ' * depth}- **{statuses[node.id]}** {node.clause_id}: "
                f"{_md_escape(node.claim)}{ev}")
        cites = []
        for eid in node.evidence:
            if evidence[eid].result == "refutes" and evidence[eid].counterexamples:
                cites.append(f"{'  ' * (depth + 1)}- falsified by scenario(s) "
                             + ", ".join(evidence[eid].counterexamples))
        out = [line] + cites
        for child in node.children:
            out += claim_lines(child, depth + 1)
        return out

    for root in claims:
        md += claim_lines(root, 0)
    markdown = "\n".join(md).rstrip() + "\n"

    def claim_json(node: ClaimNode) -> dict:
        return {"id": node.id, "clause": node.clause_id, "claim": node.claim,
                "status": statuses[node.id], "evidence": list(node.evidence),
                "children": [claim_json(c) for c in node.children]}

    data = {
        "tool_version": __version__,
        "schema_version": SCHEMA_VERSION,
        "model": model.name,
        "assurance_context": model.assurance_context,
        "components": [{"id": c.id, "kind": c.kind,
                        "clauses": [cl.id for cl in c.contract.clauses]}
                       for c in model.walk()],
        "discharge": [{"assumption": e.assumption, "status": e.status,
                       "provider": e.provider, "via": e.via,
                       "risk_source": risk.get(e.assumption)} for e in entries],
        "edges": [list(edge) for edge in sorted(dmap.edges())] if dmap else [],
        "promoted": dict(promoted),
        "inheritance": {g: list(h) for g, h in sorted(refinement.inheritance.items())},
        "refinement": {"passed": refinement.passed,
                       "findings": [str(f) for f in refinement.findings]},
        "campaigns": [{
            "id": rep.campaign_id, "component": rep.component, "policy": rep.plan.policy,
            "break_mode": rep.plan.break_mode, "master_seed": rep.master_seed,
            "samples": len(rep.verdicts), "pass": rep.pass_count,
            "falsified": rep.falsification_count, "vacuous": rep.vacuous_count,
            "coverage": rep.coverage, "min_separation": _finite(rep.min_separation),
            "counterexamples": [cx["id"] for cx in rep.counterexamples],
        } for rep in campaigns],
        "evidence": [evidence[k].to_dict() for k in sorted(evidence)],
        "threshold": threshold,
        "claims": [claim_json(c) for c in claims],
    }
    text = json.dumps(data, sort_keys=True, indent=1, allow_nan=False) + "\n"
    return ReportBundle(markdown, text, render_dot(model, refinement))


def render_dot(model: SystemModel, refinement: RefinementReport) -> str:
    lines = ["digraph model {", "  rankdir=LR;", "  node [shape=box];"]
    for comp in model.walk():
        if comp.kind == COMPOSITE:
            lines.append(f'  subgraph "cluster_{comp.id}" {{')
            lines.append(f'    label="{comp.id} ({comp.kind})";')
            for child in comp.children:
                lines.append(f'    "{child.id}" [label="{child.id}\\n{child.kind}"];')
            lines.append("  }")
    children = {ch.id for c in model.composites() for ch in c.children}
    for comp in model.walk():
        if comp.kind != COMPOSITE and comp.id not in children:
            lines.append(f'  "{comp.id}" [label="{comp.id}\\n{comp.kind}"];')
    index = model.clause_index()
    dmap = refinement.discharge_map
    if dmap is not None:
        for a, g in sorted(dmap.edges()):
            lines.append(f'  "{index[a][0].id}" -> "{index[g][0].id}" '
                         f'[label="{a} -> {g}"];')
        for a, p in sorted(dmap.promoted().items()):
            lines.append(f'  "{index[a][0].id}" -> "{index[p][0].id}" '
                         f'[label="{a} promoted to {p}", style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _finite(x: float) -> Optional[float]:
    return x if x == x and abs(x) != float("inf") else None


def _fmt(x: float) -> str:
    return "n/a" if _finite(x) is None else f"{x:.3f}"
