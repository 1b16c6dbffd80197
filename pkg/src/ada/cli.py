"""Command-line entry point: ``ada check | identify | simulate | campaign | report``.

Exit codes: 0 success, 1 findings or failed checks, 2 unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import os
import shutil
import sys
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional, Sequence

from . import __version__
from .assurance import AssuranceError, render_report
from .contracts import check_refinement, structural_findings, validate_contract
from .identification import (IdentificationError, check_responsibility_structure,
                             derive_all_stubs, factors_from_list, risk_source_coverage)
from .model import ModelError, SystemModel
from .predicates import PredicateError
from .schema import SCHEMA_VERSION, SchemaError, load_json, load_model

EXIT_OK, EXIT_FINDINGS, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _color(text: str, code: str) -> str:
    if os.environ.get("ADA_NO_COLOR") or not sys.stdout.isatty():
        return text
    return f"\033[{code}m{text}\033[0m"


def _read_model(path: str) -> SystemModel:
    try:
        return load_model(path)
    except OSError as exc:
        raise InputError(f"{path}: cannot read: {exc.strerror or exc}") from None
    except SchemaError as exc:
        loc = exc.location if exc.location.startswith(str(path)) else f"{path}: {exc.location}"
        raise InputError(f"{loc}: {str(exc).split(': ', 1)[-1]}") from None
    except (ModelError, PredicateError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _read_json(path: str):
    try:
        return load_json(path)
    except OSError as exc:
        raise InputError(f"{path}: cannot read: {exc.strerror or exc}") from None
    except SchemaError as exc:
        raise InputError(str(exc)) from None


@contextmanager
def atomic_dir(target: str) -> Iterator[Path]:
    """Build a directory under a temporary name, then rename it into place."""
    target_path = Path(target)
    parent = target_path.parent
    parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{target_path.name}.tmp", dir=parent))
    os.chmod(tmp, 0o755)
    try:
        yield tmp
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    if target_path.exists():
        old = Path(tempfile.mkdtemp(prefix=f".{target_path.name}.old", dir=parent))
        os.rmdir(old)
        os.replace(target_path, old)
        os.replace(tmp, target_path)
        shutil.rmtree(old, ignore_errors=True)
    else:
        os.replace(tmp, target_path)


def _write_file_atomic(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.chmod(tmp, 0o644)
    os.replace(tmp, target)


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def cmd_check(args) -> int:
    model = _read_model(args.model)
    findings = []
    for comp in model.walk():
        findings += validate_contract(comp.contract, comp.kind, comp.id)
    structural = structural_findings(model)
    findings += structural
    if not structural:
        findings += check_responsibility_structure(model)
    refinement = check_refinement(model)
    findings += [f for f in refinement.findings if f not in findings]
    seen = set()
    for f in findings:
        line = str(f)
        if line in seen:
            continue
        seen.add(line)
        print(_color("finding", "31") + ": " + line)
    if refinement.discharge_map is not None and args.verbose:
        for a, g in sorted(refinement.discharge_map.edges()):
            print(f"edge: {a} -> {g}")
        for a, p in sorted(refinement.promoted.items()):
            print(f"promoted: {a} -> {p}")
    ok = not seen and refinement.passed
    print(_color("ok", "32") if ok else _color(f"{len(seen)} finding(s)", "31"))
    return EXIT_OK if ok else EXIT_FINDINGS


def cmd_identify(args) -> int:
    model = _read_model(args.model)
    try:
        factors = factors_from_list(_read_json(args.factors))
    except IdentificationError as exc:
        raise InputError(f"{args.factors}: {exc}") from None
    try:
        stubs = derive_all_stubs(factors, model)
        table = risk_source_coverage(model, factors)
    except IdentificationError as exc:
        print(_color("error", "31") + f": {exc}")
        return EXIT_FINDINGS

    patch: dict = {}
    markers = []
    for s in stubs:
        if s.is_marker:
            markers.append({"component": s.component, "factor": s.factor_id, "text": s.text})
            continue
        section = patch.setdefault(s.component, {"assumptions": [], "guarantees": []})
        section["assumptions" if s.kind == "assumption" else "guarantees"].append(
            {"id": s.id, "text": s.text, "predicate": None, "factor": s.factor_id,
             "rs_type": s.rs_type, "paired_with": s.paired_with})
    doc = {"schema_version": SCHEMA_VERSION, "model": model.name,
           "add_clauses": patch, "sub_identification": markers,
           "stubs": [{"component": s.component, "kind": s.kind, "id": s.id, "text": s.text,
                      "factor": s.factor_id, "rs_type": s.rs_type,
                      "paired_with": s.paired_with} for s in stubs]}
    with atomic_dir(args.out) as tmp:
        _write(tmp / "stubs.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
        _write(tmp / "coverage.csv", table.to_csv())
    print(f"{len(stubs)} stub(s) written to {Path(args.out) / 'stubs.json'}")
    print(table.to_csv(), end="")
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .sim.params import ScenarioError, ScenarioParams
    from .sim.scenario import run_scenario

    data = _read_json(args.scenario)
    if args.seed is not None:
        data["seed"] = args.seed
    try:
        params = ScenarioParams.from_dict(data)
        params.validate()
        trace = run_scenario(params, args.policy)
    except (ScenarioError, ValueError, TypeError, KeyError) as exc:
        raise InputError(f"{args.scenario}: {exc}") from None
    _write_file_atomic(args.out, trace.to_ndjson())
    csv_path = args.csv or str(Path(args.out).with_suffix(".csv"))
    buf = io.StringIO()
    trace.write_csv(buf)
    _write_file_atomic(csv_path, buf.getvalue())
    sep = trace.min_separation
    print(f"ticks {trace.n_ticks}, min separation "
          f"{'inf' if sep == float('inf') else f'{sep:.3f} m'}, "
          f"final progress {trace.signals['own.progress'][-1]:.1f} m")
    return EXIT_OK


def cmd_campaign(args) -> int:
    from .sbt.campaign import CampaignError, CampaignPlan, run_campaign
    from .sbt.space import SpaceError, derive_parameter_space
    from .sim.mpcs import POLICIES

    model = _read_model(args.model)
    if args.policy not in POLICIES:
        raise InputError(f"unknown policy {args.policy!r}; choose from {', '.join(POLICIES)}")
    try:
        space = derive_parameter_space(model, args.component)
    except KeyError:
        print(_color("error", "31") + f": unknown component {args.component}")
        return EXIT_FINDINGS
    except (SpaceError, ModelError) as exc:
        print(_color("error", "31") + f": {exc}")
        return EXIT_FINDINGS
    plan = CampaignPlan(n=args.n, k=args.k, rounds=args.rounds, sigma0=args.sigma0,
                        seed=args.seed, policy=args.policy, break_mode=args.break_mode,
                        shrink_budget=args.shrink_budget)
    try:
        plan.validate()
    except ValueError as exc:
        raise InputError(str(exc)) from None

    code = EXIT_OK
    with atomic_dir(args.out) as tmp:
        trace_dir = str(tmp / "traces") if args.keep_traces else None
        try:
            report = run_campaign(space, plan, model, jobs=args.jobs, trace_dir=trace_dir)
        except CampaignError as exc:
            report = exc.partial
            print(_color("error", "31") + f": campaign aborted: {exc}")
            code = EXIT_FINDINGS
        _write(tmp / "campaign.json", report.to_json())
        if report.counterexamples:
            (tmp / "falsified").mkdir()
            for cx in report.counterexamples:
                _write(tmp / "falsified" / f"{cx['id']}.json",
                       json.dumps(cx["scenario"], indent=2, sort_keys=True) + "\n")
    print(f"{report.campaign_id}: {len(report.verdicts)} scenarios, pass {report.pass_count}, "
          f"falsified {report.falsification_count}, vacuous {report.vacuous_count}, "
          f"coverage {report.coverage:.3f}")
    if report.falsification_count:
        code = EXIT_FINDINGS
    return code


def cmd_report(args) -> int:
    from .sbt.campaign import CampaignReport

    model = _read_model(args.model)
    campaigns = []
    for path in args.campaign or []:
        try:
            campaigns.append(CampaignReport.from_dict(_read_json(path)))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path}: not a campaign file ({exc})") from None
    refinement = check_refinement(model)
    try:
        bundle = render_report(model, refinement, campaigns, None, threshold=args.threshold)
    except AssuranceError as exc:
        print(_color("error", "31") + f": {exc}")
        return EXIT_FINDINGS
    with atomic_dir(args.out) as tmp:
        for name, text in bundle.files().items():
            _write(tmp / name, text)
    print(f"report written to {args.out}")
    return EXIT_OK


def _threshold(text: str) -> float:
    value = float(text)
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError("threshold must lie in (0, 1]")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ada", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version",
                   version=f"ada {__version__} (model schema {SCHEMA_VERSION})")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="validate contracts, responsibility and refinement")
    c.add_argument("model")
    c.set_defaults(func=cmd_check)

    i = sub.add_parser("identify", help="derive clause stubs from causal factors")
    i.add_argument("--model", required=True)
    i.add_argument("--factors", required=True)
    i.add_argument("--out", default="identify")
    i.set_defaults(func=cmd_identify)

    s = sub.add_parser("simulate", help="run one scenario and write its trace")
    s.add_argument("--scenario", required=True)
    s.add_argument("--out", required=True, help="NDJSON trace path")
    s.add_argument("--csv", help="CSV summary path (default: trace path with .csv)")
    s.add_argument("--policy", default="nominal")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate)

    k = sub.add_parser("campaign", help="run a Latin-hypercube test campaign")
    k.add_argument("--model", required=True)
    k.add_argument("--component", default="MPCS")
    k.add_argument("--n", type=_positive, default=1000)
    k.add_argument("--rounds", type=int, default=3)
    k.add_argument("--k", type=int, default=10)
    k.add_argument("--sigma0", type=float, default=0.1)
    k.add_argument("--seed", type=int, default=42)
    k.add_argument("--policy", default="nominal")
    k.add_argument("--break", dest="break_mode", choices=("maneuver", "violating-noise"))
    k.add_argument("--shrink-budget", type=int, default=32)
    k.add_argument("--jobs", type=_positive, default=1)
    k.add_argument("--keep-traces", action="store_true")
    k.add_argument("--out", required=True)
    k.set_defaults(func=cmd_campaign)

    r = sub.add_parser("report", help="render the assurance report")
    r.add_argument("--model", required=True)
    r.add_argument("--campaign", action="append")
    r.add_argument("--threshold", type=_threshold, default=0.8)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_report)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"ada: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
