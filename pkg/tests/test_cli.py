import csv
import json
import subprocess
import sys

import pytest

from ada import __version__
from ada.cli import main
from ada.fixtures import FERRY_FACTORS_PATH, FERRY_MODEL_PATH

from .conftest import DEMOS, clause_entry

MODEL = str(FERRY_MODEL_PATH)
FACTORS = str(FERRY_FACTORS_PATH)


@pytest.fixture
def write_json(tmp_path):
    def write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)
    return write


def test_check_fixture_passes(capsys):
    assert main(["check", MODEL]) == 0
    assert capsys.readouterr().out.strip().endswith("ok")


def test_check_verbose_lists_edges(capsys):
    assert main(["-v", "check", MODEL]) == 0
    out = capsys.readouterr().out
    assert "edge: MPCS.A2 -> SITAW.G1" in out
    assert "promoted: SITAW.A1 -> Ferry.A1" in out


def test_check_dangling_link_reports_finding(ferry_dict, write_json, capsys):
    ferry_dict["links"].append({"consumer": "MPCS.A1", "provider": "Ghost.G1"})
    assert main(["check", write_json("bad.json", ferry_dict)]) == 1
    assert "Ghost.G1" in capsys.readouterr().out


def test_check_weakened_provider_fails(ferry_dict, write_json, capsys):
    for atom in clause_entry(ferry_dict, "SITAW.G1")["predicate"]:
        if atom["signal"] == "position_m":
            atom["epsilon"] = 5.0
    assert main(["check", write_json("weak.json", ferry_dict)]) == 1
    assert "MPCS.A2" in capsys.readouterr().out


def test_check_truncated_file_exits_2_with_location(tmp_path, capsys):
    bad = tmp_path / "cut.json"
    bad.write_text(FERRY_MODEL_PATH.read_text()[:300])
    assert main(["check", str(bad)]) == 2
    err = capsys.readouterr().err
    assert f"{bad}:" in err and err.startswith("ada: error:")


def test_check_missing_file_exits_2(tmp_path, capsys):
    assert main(["check", str(tmp_path / "nope.json")]) == 2


def test_identify_writes_stubs_and_coverage(tmp_path, capsys):
    out = tmp_path / "id"
    assert main(["identify", "--model", MODEL, "--factors", FACTORS, "--out", str(out)]) == 0
    doc = json.loads((out / "stubs.json").read_text())
    assert doc["stubs"]
    rows = list(csv.reader((out / "coverage.csv").read_text().splitlines()))
    assert rows[0][0] == "component"
    assert sorted(p.name for p in out.iterdir()) == ["coverage.csv", "stubs.json"]


def test_identify_empty_factor_list(write_json, tmp_path):
    out = tmp_path / "id"
    assert main(["identify", "--model", MODEL, "--factors", write_json("f.json", []),
                 "--out", str(out)]) == 0
    assert json.loads((out / "stubs.json").read_text())["stubs"] == []


def test_identify_non_decision_target_exits_1(write_json, tmp_path, capsys):
    factors = json.loads(FERRY_FACTORS_PATH.read_text())
    factors[0]["target_decision"] = "SITAW"
    code = main(["identify", "--model", MODEL, "--factors", write_json("f.json", factors),
                 "--out", str(tmp_path / "id")])
    assert code == 1
    assert not (tmp_path / "id").exists()


def test_simulate_writes_trace_and_csv(tmp_path, capsys):
    scenario = json.loads((DEMOS / "crossing_scenario.json").read_text())
    scenario["duration"] = 20.0
    path = tmp_path / "s.json"
    path.write_text(json.dumps(scenario))
    out = tmp_path / "run" / "trace.ndjson"
    assert main(["simulate", "--scenario", str(path), "--out", str(out), "--seed", "3"]) == 0
    lines = out.read_text().splitlines()
    assert json.loads(lines[0])["params"]["seed"] == 3
    assert len(lines) == 201 + 2
    assert (tmp_path / "run" / "trace.csv").read_text().startswith("t,sep_min,margin,")
    assert "min separation" in capsys.readouterr().out


def test_simulate_invalid_scenario_exits_2(write_json, tmp_path):
    assert main(["simulate", "--scenario", write_json("s.json", {"dt": -1.0}),
                 "--out", str(tmp_path / "t.ndjson")]) == 2


def test_campaign_and_report_round_trip(tmp_path, capsys):
    camp = tmp_path / "camp"
    assert main(["campaign", "--model", MODEL, "--n", "2", "--rounds", "0", "--k", "0",
                 "--seed", "4", "--out", str(camp), "--keep-traces"]) == 0
    data = json.loads((camp / "campaign.json").read_text())
    assert data["summary"]["samples"] == 2
    assert sorted(p.name for p in (camp / "traces").iterdir()) == ["0000.ndjson", "0001.ndjson"]
    rep = tmp_path / "rep"
    assert main(["report", "--model", MODEL, "--campaign", str(camp / "campaign.json"),
                 "--out", str(rep)]) == 0
    assert sorted(p.name for p in rep.iterdir()) == ["model.dot", "report.json", "report.md"]


def test_campaign_rejects_bad_inputs(tmp_path, capsys):
    out = str(tmp_path / "c")
    assert main(["campaign", "--model", MODEL, "--policy", "reckless", "--out", out]) == 2
    assert main(["campaign", "--model", MODEL, "--component", "DP", "--out", out]) == 1
    assert main(["campaign", "--model", MODEL, "--component", "Nobody", "--out", out]) == 1
    with pytest.raises(SystemExit):
        main(["campaign", "--model", MODEL, "--n", "0", "--out", out])
    assert not (tmp_path / "c").exists()


def test_report_rejects_non_campaign_file(write_json, tmp_path):
    assert main(["report", "--model", MODEL, "--campaign", write_json("c.json", {"a": 1}),
                 "--out", str(tmp_path / "r")]) == 2


def test_out_directory_replaced_atomically(tmp_path):
    out = tmp_path / "id"
    out.mkdir()
    (out / "stale.txt").write_text("old")
    assert main(["identify", "--model", MODEL, "--factors", FACTORS, "--out", str(out)]) == 0
    assert not (out / "stale.txt").exists()
    assert [p.name for p in tmp_path.iterdir()] == ["id"]


def test_failed_command_leaves_existing_output_alone(tmp_path, write_json):
    out = tmp_path / "id"
    out.mkdir()
    (out / "keep.txt").write_text("keep")
    factors = json.loads(FERRY_FACTORS_PATH.read_text())
    factors[0]["target_decision"] = "SITAW"
    main(["identify", "--model", MODEL, "--factors", write_json("f.json", factors),
          "--out", str(out)])
    assert (out / "keep.txt").read_text() == "keep"


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_installed_entry_point():
    done = subprocess.run([sys.executable, "-m", "ada.cli", "check", MODEL],
                          capture_output=True, text=True)
    assert done.returncode == 0, done.stderr
