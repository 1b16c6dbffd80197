import json
import math

import numpy as np
import pytest

from ada.sbt.campaign import (CampaignPlan, CampaignReport, adaptive_refine, grid_coverage,
                              run_campaign, scenario_id)
from ada.sbt.space import (Dimension, ParameterSpace, derive_parameter_space, lhs_points,
                           scenario_seed)
from ada.sbt.verdict import FALSIFIED, PASS, VACUOUS, ScenarioVerdict


@pytest.fixture(scope="module")
def short_space(ferry):
    """Ferry space with 60 s transits to keep campaign tests quick."""
    space = derive_parameter_space(ferry, "MPCS")
    return ParameterSpace(space.dimensions, {**space.fixed, "duration": 60.0}, "MPCS")


@pytest.fixture(scope="module")
def small_report(short_space, ferry):
    return run_campaign(short_space, CampaignPlan(n=6, k=2, rounds=2, seed=5), ferry)


def test_same_seed_gives_identical_campaign_json(short_space, ferry, small_report):
    again = run_campaign(short_space, CampaignPlan(n=6, k=2, rounds=2, seed=5), ferry)
    assert again.to_json() == small_report.to_json()


def test_worker_processes_do_not_change_results(short_space, ferry, small_report):
    parallel = run_campaign(short_space, CampaignPlan(n=6, k=2, rounds=2, seed=5), ferry, jobs=2)
    assert parallel.to_json() == small_report.to_json()


def test_report_layout(small_report):
    assert len(small_report.verdicts) == 6 + 2 * 2
    assert [v.scenario_id for v in small_report.verdicts] == [scenario_id(i) for i in range(10)]
    assert [v.round for v in small_report.verdicts] == [0] * 6 + [1, 1, 2, 2]
    data = json.loads(small_report.to_json())
    assert data["summary"]["samples"] == 10
    assert data["master_seed"] == 5
    assert data["monitored"]["guarantees"] == ["Ferry.G1", "MPCS.G1", "MPCS.G2"]
    assert data["space"]["dimensions"][0]["source"] == "MPCS.A2"


def test_campaign_json_round_trip(small_report):
    back = CampaignReport.from_dict(json.loads(small_report.to_json()))
    assert back.to_json() == small_report.to_json()


def test_scenario_seeds_follow_master(small_report):
    assert [v.seed for v in small_report.verdicts] == [scenario_seed(5, i) for i in range(10)]


def test_trace_files_written(short_space, ferry, tmp_path):
    run_campaign(short_space, CampaignPlan(n=2, k=0, rounds=0, seed=1), ferry,
                 trace_dir=str(tmp_path / "traces"))
    names = sorted(p.name for p in (tmp_path / "traces").iterdir())
    assert names == ["0000.ndjson", "0001.ndjson"]


def test_coverage_nondecreasing_in_samples():
    pts = lhs_points(4, 400, seed=3)
    values = [grid_coverage(pts[:n]) for n in range(1, 401, 13)]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] > 0.9


def test_coverage_of_known_layouts():
    assert grid_coverage(np.empty((0, 3))) == 0.0
    corners = np.array([[0.0, 0.0], [1.0, 1.0]])
    assert grid_coverage(corners) == pytest.approx(2 / 100)
    full = np.array([[(i + 0.5) / 10, (j + 0.5) / 10] for i in range(10) for j in range(10)])
    assert grid_coverage(full) == 1.0
    assert grid_coverage(np.array([[0.05], [0.15], [0.16]])) == pytest.approx(0.2)


def fake_verdict(i, margin, classification=PASS, point=(0.5, 0.5)):
    return ScenarioVerdict(scenario_id(i), {}, classification, (), margin + 30.0, margin,
                           point, i, 0)


def fake_report(verdicts):
    space = ParameterSpace((Dimension("a", "m", 0.0, 1.0, "X.A1"),
                            Dimension("b", "m", 0.0, 1.0, "X.A1")))
    return CampaignReport("c", "MPCS", space, CampaignPlan(), list(verdicts), ["X.G1"])


def echo_run(tasks):
    return [fake_verdict(i, 1.0, point=pt) for i, _, pt, _ in tasks]


def test_refine_zero_rounds_changes_nothing():
    report = fake_report([fake_verdict(i, float(i)) for i in range(5)])
    before = list(report.verdicts)
    assert adaptive_refine(report, k=3, rounds=0, sigma0=0.1, seed=0, run=echo_run) == []
    assert report.verdicts == before


def test_refine_targets_lowest_margins_and_shrinks_sigma():
    verdicts = [fake_verdict(i, m, point=(0.5, 0.5)) for i, m in enumerate([5.0, 1.0, 3.0, 0.5])]
    verdicts.append(fake_verdict(4, -100.0, VACUOUS))
    report = fake_report(verdicts)
    seen = []

    def run(tasks):
        seen.append(tasks)
        return [fake_verdict(i, 99.0, point=pt) for i, _, pt, _ in tasks]

    adaptive_refine(report, k=2, rounds=3, sigma0=0.2, seed=0, run=run)
    assert [len(t) for t in seen] == [2, 2, 2]
    assert [t[0] for t in seen[0]] == [5, 6]
    spreads = [np.abs(np.array([pt for _, _, pt, _ in t]) - 0.5).mean() for t in seen]
    assert spreads[0] > spreads[2]


def test_refine_with_equal_or_infinite_margins_is_deterministic():
    def go():
        report = fake_report([fake_verdict(i, math.inf) for i in range(4)])
        adaptive_refine(report, k=2, rounds=2, sigma0=0.1, seed=7, run=echo_run)
        return [v.to_dict() for v in report.verdicts]

    first = go()
    assert first == go()
    assert len(first) == 8


def test_refine_rejects_empty_campaign():
    with pytest.raises(ValueError):
        adaptive_refine(fake_report([]), 1, 1, 0.1, 0, echo_run)


def test_refine_with_only_vacuous_stops():
    report = fake_report([fake_verdict(0, 1.0, VACUOUS)])
    assert adaptive_refine(report, 1, 3, 0.1, 0, echo_run) == []


def test_violating_noise_is_vacuous_and_inconclusive(short_space, ferry):
    plan = CampaignPlan(n=6, k=0, rounds=0, seed=2, break_mode="violating-noise")
    report = run_campaign(short_space, plan, ferry)
    assert report.vacuous_count > 0
    assert report.falsification_count == 0
    ev = report.evidence()
    assert ev.result == ("supports" if report.pass_count else "inconclusive")


def test_evidence_follows_counts():
    assert fake_report([fake_verdict(0, 1.0)]).evidence().result == "supports"
    refuted = fake_report([fake_verdict(0, 1.0), fake_verdict(1, -1.0, FALSIFIED)])
    ev = refuted.evidence()
    assert ev.result == "refutes" and ev.counterexamples == ("0001",)
    assert fake_report([fake_verdict(0, 1.0, VACUOUS)]).evidence().result == "inconclusive"


@pytest.mark.parametrize("bad", [dict(n=0), dict(k=-1), dict(sigma0=0.0), dict(decay=1.5),
                                 dict(seed=-1)])
def test_plan_validation(bad):
    with pytest.raises(ValueError):
        CampaignPlan(**bad).validate()
