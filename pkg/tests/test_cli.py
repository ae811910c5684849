import json

import pytest
import yaml
from click.testing import CliRunner

from qbhardy.cli import main


def power(a, lo=0.0, hi="inf"):
    return {"kind": "power", "exponent": a, "coef": 1.0, "support": [lo, hi]}


@pytest.fixture
def runner():
    return CliRunner()


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return str(path)


def test_classify_writes_report_and_sidecar(runner, tmp_path):
    cfg = write(tmp_path, "c.yaml", {"name": "sqrt", "weight": power(0.5), "beta": -0.5, "p": 2.0})
    out = tmp_path / "r.json"
    res = runner.invoke(main, ["classify", "--config", cfg, "--out", str(out), "--seed", "7"])
    assert res.exit_code == 0, res.output
    rep = json.loads(out.read_text())
    assert rep["seed"] == 7
    (sc,) = rep["scenarios"]
    assert sc["scenario"]["scenario_kind"] == "classify"
    assert sc["constants"]["class_constant"]["value"] == pytest.approx(2.0, rel=5e-3)
    assert (tmp_path / "r.sqrt.ratio_vs_r.csv").exists()


def test_csv_summary_on_stdout(runner, tmp_path):
    cfg = write(tmp_path, "g.yaml", {"function": power(-0.5, 0, 1), "weight": power(0.0, 0, 1),
                                     "p": 2.0, "theta": 1.0})
    res = runner.invoke(main, ["grand-norm", "--config", cfg, "--format", "csv"])
    assert res.exit_code == 0
    header, row = res.stdout.splitlines()[:2]
    assert header == "name,kind,status,ok,constant,value"
    assert float(row.split(",")[-1]) == pytest.approx(2.0, rel=1e-3)


def test_config_error_exit_code(runner, tmp_path):
    cfg = write(tmp_path, "bad.yaml", {"weight": power(0.5), "beta": -1.5, "p": 2.0})
    res = runner.invoke(main, ["classify", "--config", cfg])
    assert res.exit_code == 2
    assert "beta" in res.stderr


def test_kind_must_match_subcommand(runner, tmp_path):
    cfg = write(tmp_path, "k.yaml", {"scenario_kind": "norm", "function": power(0.0, 0, 1),
                                     "weight": power(0.0), "p": 2.0})
    assert runner.invoke(main, ["classify", "--config", cfg]).exit_code == 2
    assert runner.invoke(main, ["norm", "--config", cfg]).exit_code == 0


def test_check_failure_exit_code(runner, tmp_path):
    cfg = write(tmp_path, "f.yaml", {"weight": power(1.0), "p": 2.0})
    res = runner.invoke(main, ["classify", "--config", cfg])
    assert res.exit_code == 1
    assert "fail" in res.stderr


def test_suite_with_expected_failure_exits_zero(runner, tmp_path):
    cfg = write(tmp_path, "s.yaml", {"scenarios": [
        {"scenario_kind": "classify", "name": "member", "weight": power(0.5), "beta": -0.5, "p": 2.0},
        {"scenario_kind": "classify", "name": "boundary", "weight": power(1.0), "p": 2.0,
         "expect": "fail"},
        {"scenario_kind": "hardy-check", "name": "indicator",
         "function": {"kind": "indicator", "support": [0, 1]}, "weight": power(0.0), "p": 2.0},
    ]})
    res = runner.invoke(main, ["suite", "--config", cfg, "--jobs", "2"])
    assert res.exit_code == 0, res.stderr
    rep = json.loads(res.stdout)
    assert [s["status"] for s in rep["summary"]] == ["pass", "fail", "pass"]


def test_tol_override_reaches_every_scenario(runner, tmp_path):
    cfg = write(tmp_path, "t.yaml", {"function": {"kind": "indicator", "support": [0, 1]},
                                     "weight": power(0.0), "p": 2.0})
    res = runner.invoke(main, ["hardy-check", "--config", cfg, "--tol", "0.5"])
    assert json.loads(res.stdout)["scenarios"][0]["scenario"]["tol"] == 0.5


def test_unreadable_config(runner, tmp_path):
    res = runner.invoke(main, ["norm", "--config", str(tmp_path / "none.yaml")])
    assert res.exit_code == 2


def test_help_lists_subcommands(runner):
    res = runner.invoke(main, ["--help"])
    for name in ("classify", "norm", "grand-norm", "hardy-check", "extrapolate", "necessity", "suite"):
        assert name in res.output
