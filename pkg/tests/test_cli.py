import csv
import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

import patrolsched.matching as matching
from patrolsched.cli import CSV_HEADER, EXIT_INPUT, EXIT_INTERNAL, EXIT_OK, main


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _generate(tmp_path, config, name="schedule.json", *extra):
    cfg = _write(tmp_path / f"{name}.cfg", config)
    out = tmp_path / name
    code = main(["generate", "--config", cfg, "--out", str(out), "--quiet", *extra])
    return code, out


def _analyze(tmp_path, schedule):
    out, gaps = tmp_path / "analysis.json", tmp_path / "gaps.csv"
    code = main(["analyze", str(schedule), "--out", str(out), "--csv", str(gaps), "--quiet"])
    if code != EXIT_OK:
        return code, None, None
    with gaps.open() as fh:
        rows = list(csv.reader(fh))
    return code, json.loads(out.read_text()), rows


CONFIGS = [
    {"strategy": "dyadic", "values": ["1/2", "1/3", "1/6"], "seed": 7},
    {"strategy": "dyadic", "values": ["1/2", "1/3", "1/6"], "seed": 7, "mixture_mode": "sampled", "samples": 5},
    {"strategy": "golden", "values": ["1/2", "1/2"], "seed": 1, "steps": 100},
    {"strategy": "golden", "values": ["3/10", "3/10", "2/5"], "seed": 2, "steps": 5000},
    {"strategy": "matching", "values": ["1/4", "1/4", "1/4", "1/4"], "seed": 3, "epsilon": 1.0},
    {"strategy": "iid", "values": [0.25, 0.35, 0.4], "seed": 4, "steps": 2000},
    {"strategy": "iid", "values": ["1/3", "1/3", "1/3"], "seed": 4, "steps": 2000},
]


@pytest.mark.parametrize("config", CONFIGS, ids=lambda c: c["strategy"])
def test_round_trip(tmp_path, config):
    code, schedule = _generate(tmp_path, config)
    assert code == EXIT_OK
    artifact = json.loads(schedule.read_text())
    assert artifact["strategy"] == config["strategy"] and artifact["seed"] == config["seed"]
    code, analysis, rows = _analyze(tmp_path, schedule)
    assert code == EXIT_OK
    assert tuple(rows[0]) == CSV_HEADER
    assert len(analysis["targets"]) == len(config["values"])
    assert analysis["max_ratio_to_quarter"] >= 1 - 1e-9


def test_dyadic_exact_mixture_is_optimal(tmp_path):
    _, schedule = _generate(tmp_path, CONFIGS[0])
    artifact = json.loads(schedule.read_text())
    assert {r["period"] for r in artifact["mixture"]} <= {4, 8}
    assert F(artifact["K"]) <= 2
    _, analysis, _ = _analyze(tmp_path, schedule)
    for t in analysis["targets"]:
        assert abs(t["best_response"]["ratio_to_quarter"] - 1.0) < 1e-9
        assert t["best_response"]["utility_exact"] == "1/4"


def test_golden_short_run_frequencies(tmp_path):
    _, schedule = _generate(tmp_path, CONFIGS[2])
    artifact = json.loads(schedule.read_text())
    assert len(artifact["sequence"]) == 100
    assert all(abs(f - 0.5) < 0.1 for f in artifact["frequencies"])


def test_golden_histogram_has_three_gaps(tmp_path):
    _, schedule = _generate(tmp_path, CONFIGS[3])
    _, _, rows = _analyze(tmp_path, schedule)
    assert {int(r[1]) for r in rows[1:] if r[0] == "0"} == {2, 3, 5}


def test_same_seed_is_byte_identical(tmp_path):
    for config in CONFIGS:
        _, a = _generate(tmp_path, config, "a.json")
        _, b = _generate(tmp_path, config, "b.json")
        assert a.read_bytes() == b.read_bytes()


def test_seed_flag_overrides_config(tmp_path):
    _, a = _generate(tmp_path, CONFIGS[3], "a.json", "--seed", "99")
    assert json.loads(a.read_text())["seed"] == 99


@pytest.mark.parametrize(
    "config",
    [
        {"strategy": "golden", "values": [0.3, 0.8], "seed": 1},
        {"strategy": "iid", "values": [0.3, 0.8], "seed": 1},
        {"strategy": "dyadic", "values": [0.5, 0.5], "seed": 1},
        {"strategy": "dyadic", "values": ["1/2", "1/3"], "seed": 1},
        {"strategy": "dyadic", "values": ["3/4", "1/4"], "seed": 1},
        {"strategy": "annealing", "values": ["1/2", "1/2"], "seed": 1},
        {"strategy": "golden", "values": ["1/2", "1/2"], "seed": -1},
        {"strategy": "golden", "values": ["1/2", "1/2"], "seed": 1, "steps": 0},
    ],
)
def test_invalid_configs_exit_2(tmp_path, config, capsys):
    code, _ = _generate(tmp_path, config)
    assert code == EXIT_INPUT
    assert "error" in capsys.readouterr().err


def test_missing_config_exits_2(tmp_path):
    assert main(["generate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "x")]) == EXIT_INPUT


@pytest.mark.parametrize(
    "content",
    [
        "",
        "not json",
        json.dumps([1, 2]),
        json.dumps({"strategy": "golden", "values": ["1/2", "1/2"], "sequence": []}),
        json.dumps({"strategy": "dyadic", "values": ["1/2", "1/2"], "mixture": []}),
    ],
)
def test_malformed_or_empty_schedule_exits_2(tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    assert main(["analyze", str(path), "--quiet"]) == EXIT_INPUT


def test_matching_exhaustion_exits_3(tmp_path, monkeypatch, capsys):
    original = matching.build_instance
    monkeypatch.setattr(matching, "build_instance", lambda v, rng: original(v, rng, delta=F(1, 2**80)))
    code, _ = _generate(tmp_path, {"strategy": "matching", "values": ["1/4"] * 4, "seed": 0, "max_retries": 2})
    assert code == EXIT_INTERNAL
    assert "2 attempts" in capsys.readouterr().err


def test_table_output(capsys, tmp_path):
    assert main(["table", "--csv", str(tmp_path / "t.csv")]) == EXIT_OK
    out = capsys.readouterr().out
    for needle in ("1.0000", "1.0058", "1.471", "strategy,ratio,argument"):
        assert needle in out
    assert (tmp_path / "t.csv").read_text().startswith("strategy,ratio,argument")


def test_table_quiet_prints_only_csv(capsys):
    assert main(["table", "--quiet"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "strategy,ratio,argument" and len(lines) == 5


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "patrolsched", "table", "--quiet"], capture_output=True, text=True)
    assert res.returncode == 0 and "golden" in res.stdout
