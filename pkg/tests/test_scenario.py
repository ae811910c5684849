import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbhardy.errors import ConfigInvalid, ParameterOutOfTheoremRange
from qbhardy.scenario import (dumps_report, load_config_file, parse_config, run_scenario, run_suite,
                              suite_exit_code, write_sidecars)


def power(a, lo=0.0, hi="inf"):
    return {"kind": "power", "exponent": a, "coef": 1.0, "support": [lo, hi]}


CLASSIFY = {"scenario_kind": "classify", "name": "sqrt-weight", "weight": power(0.5),
            "beta": -0.5, "p": 2.0}
GRAND = {"scenario_kind": "grand-norm", "name": "inverse-sqrt", "function": power(-0.5, 0, 1),
         "weight": power(0.0, 0, 1), "p": 2.0, "theta": 1.0}


def without_timing(report):
    out = dict(report)
    out.pop("timing", None)
    return out


def test_classify_example():
    rep = run_scenario(CLASSIFY)
    assert rep["status"] == "pass" and rep["ok"]
    assert rep["verdicts"]["membership"] == "Member"
    # 1 + (beta p + a + 1)/(p - a - 1) with a = 0.5, beta = -0.5, p = 2
    assert rep["constants"]["class_constant"]["value"] == pytest.approx(2.0, rel=5e-3)
    assert rep["constants"]["class_constant"]["grid"] == "r"


def test_grand_norm_example():
    rep = run_scenario(GRAND)
    assert rep["constants"]["grand_norm"]["value"] == pytest.approx(2.0, rel=1e-3)


def test_malformed_beta_is_a_config_error():
    with pytest.raises(ConfigInvalid) as exc:
        parse_config({**CLASSIFY, "beta": -1.5})
    assert exc.value.field == "beta"


@pytest.mark.parametrize("bad", [
    {**CLASSIFY, "colour": "red"},
    {"scenario_kind": "classify", "p": 2.0},
    {**CLASSIFY, "weight": {"kind": "spline"}},
    {**CLASSIFY, "scenario_kind": "plot"},
    {**CLASSIFY, "r_grid": {"spacing": "log", "lo": 0.0, "hi": 1.0, "n": 5}},
    [1, 2],
])
def test_invalid_configs(bad):
    with pytest.raises(ConfigInvalid):
        parse_config(bad)


def test_theorem_ranges_checked_before_dispatch():
    with pytest.raises(ParameterOutOfTheoremRange):
        parse_config({"scenario_kind": "extrapolate-main", "weight": power(0.0), "p0": 2.0, "p": 1.5})
    with pytest.raises(ParameterOutOfTheoremRange):
        parse_config({"scenario_kind": "lemma-2-2", "function": power(0.0, 0, 1), "p0": 2.0,
                      "eps": 3.0, "t_grid": [1.0]})


def test_numerical_errors_are_reported_not_raised():
    rep = run_scenario({"scenario_kind": "grand-extrapolate", "weight": power(-1.0, 0, 1),
                        "p0": 1.25, "p": 2.0, "theta": 1.0})
    assert rep["status"] == "error" and rep["error"]["type"] == "DivergentWI"
    assert not rep["ok"]


def test_expect_fail_inverts_the_outcome():
    boundary = {"scenario_kind": "classify", "name": "boundary", "weight": power(1.0),
                "beta": 0.0, "p": 2.0, "expect": "fail"}
    out = run_suite([CLASSIFY, boundary])
    assert out["scenarios"][1]["status"] == "fail"
    assert out["exit_code"] == 0
    assert out["counts"] == {"pass": 1, "fail": 1}


def test_failed_expectation_sets_exit_one():
    out = run_suite([{**CLASSIFY, "expect": "fail"}])
    assert out["exit_code"] == 1


def test_config_error_inside_suite_does_not_abort():
    out = run_suite([CLASSIFY, {**CLASSIFY, "beta": -1.5}])
    assert [r["status"] for r in out["scenarios"]] == ["pass", "config-error"]
    assert out["exit_code"] == 2


def test_empty_suite_is_an_error():
    with pytest.raises(ConfigInvalid):
        run_suite([])


def test_exit_code_precedence():
    inc = {"status": "inconclusive", "ok": True}
    assert suite_exit_code([inc]) == 0
    assert suite_exit_code([inc], strict=True) == 3
    assert suite_exit_code([inc, {"status": "fail", "ok": False}], strict=True) == 1


def test_reports_are_deterministic_modulo_timing():
    a, b = run_scenario(CLASSIFY), run_scenario(CLASSIFY)
    assert dumps_report(without_timing(a)) == dumps_report(without_timing(b))


def test_parallel_suite_matches_serial():
    serial = run_suite([CLASSIFY, GRAND], 1)
    par = run_suite([CLASSIFY, GRAND], 2)
    strip = lambda out: [dumps_report(without_timing(r)) for r in out["scenarios"]]
    assert strip(serial) == strip(par)


def test_reports_are_json_with_inf_sentinels():
    rep = run_scenario({"scenario_kind": "norm", "function": power(-0.5, 0, 1),
                        "weight": power(0.0), "p": 2.0})
    assert rep["constants"]["norm"]["value"] == "inf"
    json.loads(dumps_report(rep))


@settings(max_examples=30)
@given(beta=st.floats(-0.95, 0.0), p=st.floats(1.0, 6.0), a=st.floats(-0.9, 3.0),
       tol=st.floats(1e-9, 1e-3), kind=st.sampled_from(["classify", "hat-classify"]))
def test_config_round_trip(beta, p, a, tol, kind):
    raw = {"scenario_kind": kind, "weight": power(a), "beta": beta, "p": p, "tol": tol,
           "r_grid": {"spacing": "log", "lo": 1e-3, "hi": 10.0, "n": 8}}
    norm = parse_config(raw).normalized()
    assert parse_config(norm).normalized() == norm
    assert norm["beta"] == beta and norm["weight"] == raw["weight"]


def test_load_config_file_with_defaults(tmp_path):
    path = tmp_path / "suite.yaml"
    path.write_text(
        "defaults: {beta: -0.5, p: 2.0}\n"
        "scenarios:\n"
        "  - {scenario_kind: classify, name: a, weight: {kind: power, exponent: 0.5}}\n"
        "  - {scenario_kind: classify, name: b, weight: {kind: power, exponent: 0.5}, p: 3.0}\n")
    items = load_config_file(path)
    assert [(i["name"], i["p"], i["beta"]) for i in items] == [("a", 2.0, -0.5), ("b", 3.0, -0.5)]
    single = tmp_path / "one.json"
    single.write_text(json.dumps(CLASSIFY))
    assert load_config_file(single) == [CLASSIFY]
    with pytest.raises(ConfigInvalid):
        load_config_file(tmp_path / "missing.yaml")


def test_sidecars_hold_profiles(tmp_path):
    out = run_suite([CLASSIFY])
    files = write_sidecars(out["scenarios"], tmp_path / "report.json")
    assert [f.name for f in files] == ["report.sqrt-weight.ratio_vs_r.csv"]
    lines = files[0].read_text().splitlines()
    assert lines[0] == "parameter,value" and len(lines) > 10
