#!/usr/bin/env python3
"""Walk the ferry example through every ada subcommand.

    python3 demos/walkthrough.py [--n 200] [--out demo-out]

Each step prints the command it runs and the lines worth reading. The
campaign size defaults to 200 so the whole walk takes a minute or two; use
--n 1000 for the full-size run.
"""

import argparse
import json
import sys
from pathlib import Path

from ada.cli import main as ada

HERE = Path(__file__).resolve().parent


def step(title, argv):
    print()
    print("=" * 72)
    print(title)
    print("$ ada " + " ".join(argv))
    print("-" * 72)
    code = ada(argv)
    print(f"(exit {code})")
    return code


def run(n, out):
    model = str(HERE / "ferry.json")

    step("1. Contracts, responsibility structure and refinement", ["-v", "check", model])

    step("2. Clause stubs from the STPA causal factors",
         ["identify", "--model", model, "--factors", str(HERE / "ferry_factors.json"),
          "--out", str(out / "identify")])

    step("3. One crossing scenario, trace as NDJSON plus CSV",
         ["simulate", "--scenario", str(HERE / "crossing_scenario.json"),
          "--out", str(out / "crossing" / "trace.ndjson")])

    step("4a. Campaign against the correct MPCS",
         ["campaign", "--model", model, "--n", str(n), "--seed", "42",
          "--out", str(out / "nominal")])
    step("4b. Same campaign against the mutant that ignores estimate accuracy",
         ["campaign", "--model", model, "--n", str(n), "--seed", "42",
          "--policy", "mutant-no-accuracy", "--out", str(out / "mutant")])
    step("4c. Scenarios that break the obstacle-behaviour assumption",
         ["campaign", "--model", model, "--n", str(max(n // 5, 10)), "--seed", "42",
          "--break", "maneuver", "--rounds", "0", "--out", str(out / "maneuver")])

    mutant = json.loads((out / "mutant" / "campaign.json").read_text())
    for cx in mutant["counterexamples"][:3]:
        print(f"  counterexample {cx['id']}: violates {', '.join(cx['violated'])}, "
              f"shrunk in {cx['simulations']} runs")

    for name, label in (("nominal", "5a. Assurance report from the nominal campaign"),
                        ("mutant", "5b. Assurance report from the mutant campaign")):
        step(label, ["report", "--model", model,
                     "--campaign", str(out / name / "campaign.json"),
                     "--out", str(out / f"report-{name}")])
        data = json.loads((out / f"report-{name}" / "report.json").read_text())
        coverage = data["campaigns"][0]["coverage"]
        print(f"  campaign coverage {coverage:.3f} (threshold {data['threshold']:g})")
        for c in data["claims"]:
            print(f"  {c['clause']}: {c['status']}")
    print(f"\nReports: {out / 'report-nominal' / 'report.md'}, "
          f"{out / 'report-mutant' / 'report.md'}")

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=200)
    parser.add_argument("--out", type=Path, default=Path("demo-out"))
    args = parser.parse_args()
    run(args.n, args.out)
    sys.exit(0)
