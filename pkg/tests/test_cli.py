import json
import math
import os

import numpy as np
import pytest

from largesol import parse_config
from largesol.artifacts import dumps, read_profile, to_json_value
from largesol.cli import build_parser, main, run_command
from largesol.schemas import COMMAND_REPORTS, REPORTS

SCHEMA_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "docs", "schemas")


def write_config(directory, data):
    path = directory / "config.json"
    path.write_text(json.dumps(data))
    return str(path)


def read_json(path):
    with open(path, encoding="utf8") as f:
        return json.load(f)


def run_cli(config, command, out=None, *extra):
    argv = ["--config", str(config), "--command", command]
    if out is not None:
        argv += ["--out-dir", str(out)]
    return main(argv + list(extra))


KO_CONFIG = {
    "phi": {"family": "power", "p": 2.0},
    "nonlinearity": {"family": "power", "gamma": 3.0},
}


def test_check_ko(tmp_path):
    out = tmp_path / "out"
    assert run_cli(write_config(tmp_path, KO_CONFIG), "check-ko", out) == 0
    report = read_json(out / "report.json")
    assert report["command"] == "check-ko"
    assert report["report_schema"] == "condition"
    assert report["report"]["verdict"] == "converges"
    assert report["report"]["confidence"] == "analytic"


def test_reports_are_deterministic(tmp_path):
    config = write_config(tmp_path, KO_CONFIG)
    first, second = tmp_path / "first", tmp_path / "second"
    assert run_cli(config, "subadd", first, "--seed", "5") == 0
    assert run_cli(config, "subadd", second, "--seed", "5") == 0
    report = (first / "report.json").read_bytes()
    assert report == (second / "report.json").read_bytes()
    assert read_json(first / "report.json")["seed"] == 5


def test_rejection(tmp_path):
    out = tmp_path / "out"
    assert run_cli(write_config(tmp_path, KO_CONFIG), "entire", out) == 3
    rejection = read_json(out / "rejection.json")
    assert rejection["hypothesis"] == "keller-osserman"
    assert rejection["verdict"] == "converges"
    assert rejection["theorem"] == "entire-large-solution-existence"
    assert not (out / "report.json").exists()


def test_sweep_rejection(tmp_path):
    data = {**KO_CONFIG, "nonlinearity": {"family": "power", "gamma": 1.0}}
    out = tmp_path / "out"
    assert run_cli(write_config(tmp_path, data), "sweep", out) == 3
    rejection = read_json(out / "rejection.json")
    assert rejection["hypothesis"] == "keller-osserman"
    assert rejection["theorem"] == "boundary-blow-up-existence"


def test_diverging_budget_rejection(tmp_path):
    data = {
        **KO_CONFIG,
        "nonlinearity": {"family": "power", "gamma": 0.5},
        "geometry": {"N": 3, "horizon": 200.0},
        "weight": {
            "lower": {"family": "saturating"},
            "upper": {"family": "constant"},
        },
    }
    out = tmp_path / "out"
    assert run_cli(write_config(tmp_path, data), "entire", out) == 3
    rejection = read_json(out / "rejection.json")
    assert rejection["hypothesis"] == "oscillation-budget"
    assert rejection["verdict"] == "diverges"
    assert rejection["theorem"] == "entire-large-solution-existence"


def test_configuration_errors(tmp_path):
    assert run_cli(tmp_path / "missing.json", "check-ko") == 2
    config = write_config(tmp_path, KO_CONFIG)
    assert run_cli(config, "check-ko", tmp_path, "--threads", "0") == 2
    bad = write_config(tmp_path, {**KO_CONFIG, "phi": {"family": "power"}})
    assert run_cli(bad, "indices", tmp_path) == 2


def test_unknown_command(tmp_path):
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--config", "c.json", "--command", "integrate"])
    config = parse_config(write_config(tmp_path, KO_CONFIG))
    assert run_command(config, "integrate", str(tmp_path)) == 2


def test_out_dir_from_environment(tmp_path, monkeypatch):
    out = tmp_path / "from-env"
    monkeypatch.setenv("LARGESOL_OUT_DIR", str(out))
    assert run_cli(write_config(tmp_path, KO_CONFIG), "indices") == 0
    report = read_json(out / "report.json")["report"]
    assert report["indices"] == {"l": 2.0, "m": 2.0, "l1": 1.0, "m1": 1.0}
    assert report["plasticity_constraint"] is None


def test_plasticity_constraint_is_reported(tmp_path):
    data = {
        **KO_CONFIG,
        "phi": {"family": "plasticity-log", "p": 2.0},
        "geometry": {"N": 2},
    }
    out = tmp_path / "out"
    assert run_cli(write_config(tmp_path, data), "indices", out) == 0
    constraint = read_json(out / "report.json")["report"]["plasticity_constraint"]
    assert constraint == {"N": 2, "value": 1.0, "satisfied": False}


def test_solve_ball(tmp_path):
    k = math.cosh(1.0 / math.sqrt(2.0))
    data = {
        "phi": {"family": "constant-two"},
        "nonlinearity": {"family": "power", "gamma": 1.0},
        "run": {"k": k, "points": 11},
    }
    out = tmp_path / "out"
    assert run_cli(write_config(tmp_path, data), "solve-ball", out) == 0
    profile = read_profile(str(out / "profile.csv"))
    assert profile["r"].tolist() == pytest.approx(np.linspace(0.0, 1.0, 11).tolist())
    expected = np.cosh(profile["r"] / math.sqrt(2.0))
    assert profile["u"] == pytest.approx(expected, abs=1e-6)
    meta = read_json(out / "profile.meta.json")
    assert meta["source"] == "shooting"
    assert meta["params"]["k"] == k
    report = read_json(out / "report.json")["report"]
    assert report["flux_residual"] <= 1e-6
    with open(out / "profile.csv", encoding="utf8") as f:
        assert f.readline().strip() == "r,u,du,Q"


def test_verify_bounds_needs_constant_weight(tmp_path):
    data = {
        **KO_CONFIG,
        "weight": {
            "lower": {"family": "saturating"},
            "upper": {"family": "constant"},
        },
    }
    assert run_cli(write_config(tmp_path, data), "verify-bounds", tmp_path) == 2


def test_blowup_radius_scan(tmp_path):
    data = {
        **KO_CONFIG,
        "nonlinearity": {"family": "power", "gamma": 2.0},
        "run": {"alphas": [1.0, 2.0]},
    }
    out = tmp_path / "out"
    assert run_cli(write_config(tmp_path, data), "blowup-radius", out) == 0
    envelope = read_json(out / "report.json")
    assert envelope["report_schema"] == "existence"
    assert envelope["report"]["threshold"] == 0.0
    assert not envelope["report"]["threshold_infinite"]


def test_json_values():
    value = {"a": math.inf, "b": np.float64(1.5), "c": np.array([1, 2])}
    assert to_json_value(value) == {"a": None, "b": 1.5, "c": [1, 2]}
    assert to_json_value(np.bool_(True)) is True
    expected = '{\n  "a": [\n    null\n  ],\n  "b": 1\n}\n'
    assert dumps({"b": 1, "a": [math.nan]}) == expected


def test_command_reports_have_schemas():
    for name in COMMAND_REPORTS.values():
        assert name in REPORTS


@pytest.mark.parametrize("name", sorted(REPORTS))
def test_documented_schemas_match(name):
    documented = read_json(os.path.join(SCHEMA_DIR, f"{name}.json"))
    assert set(documented["properties"]) == set(REPORTS[name].fields)
