"""Scenario configs, task dispatch, report shape, and the built-in
suites."""

import json
from pathlib import Path

import jsonschema
import pytest

from stardeform.scenarios import (
    ScenarioError,
    build_algebra,
    build_projection,
    builtin_scenario,
    load_scenario_file,
    max_order_cap,
    run_builtin_suite,
    run_scenario,
    run_scenario_dict,
)

ROOT = Path(__file__).resolve().parent.parent
SCHEMA = json.loads((ROOT / "docs" / "report.schema.json").read_text())

MOYAL = {"type": "moyal", "theta": [[0, 1], [-1, 0]], "order": 2,
         "variables": ["x", "p"]}


def mini(tasks, order=2, **extra):
    cfg = {"name": "mini", "algebra": dict(MOYAL, order=order),
           "seed": 9, "tasks": tasks}
    cfg.update(extra)
    return cfg


# -- algebra construction -----------------------------------------------------------

def test_moyal_defaults():
    alg = build_algebra({"type": "moyal", "theta": [[0, 1], [-1, 0]],
                         "order": 2})
    assert alg.variables == ("x1", "x2")
    assert alg.order == 2
    assert alg.coeff_kind == "poly"


def test_moyal_n_shorthand_checked():
    cfg = {"type": "moyal", "n": 2, "theta": [[0, 1], [-1, 0]], "order": 1}
    with pytest.raises(ScenarioError):
        build_algebra(cfg)
    alg = build_algebra(dict(cfg, n=1))
    assert len(alg.variables) == 2


def test_string_theta_entries():
    alg = build_algebra({"type": "moyal",
                         "theta": [["0", "1/2"], ["-1/2", "0"]],
                         "order": 1})
    assert alg.theta[0][1] == 0.5


def test_complex_theta_rejected():
    with pytest.raises(ScenarioError):
        build_algebra({"type": "moyal", "theta": [["0", "i"], ["-i", "0"]],
                       "order": 1})


def test_custom_algebra_spec_fragment():
    cfg = {
        "type": "custom",
        "variables": ["x", "p"],
        "order": 1,
        "cochains": [[{"weight": "i/2", "left": [1, 0], "right": [0, 1]},
                      {"weight": "-i/2", "left": [0, 1], "right": [1, 0]}]],
    }
    alg = build_algebra(cfg)
    from stardeform.parsing import parse_coefficient
    x = parse_coefficient("x", ("x", "p"))
    p = parse_coefficient("p", ("x", "p"))
    got = alg.star(x, p)
    from stardeform.coefficients import GaussianRational, coeff_eq, Poly
    from fractions import Fraction
    assert coeff_eq(got.coeffs[1], Poly.const(
        ("x", "p"), GaussianRational(0, Fraction(1, 2))))


def test_order_validation():
    for bad in (-1, 7, "3", None, True):
        with pytest.raises(ScenarioError):
            build_algebra(dict(MOYAL, order=bad))


def test_env_cap(monkeypatch):
    monkeypatch.setenv("STARDEFORM_MAX_ORDER", "1")
    assert max_order_cap() == 1
    with pytest.raises(ScenarioError):
        build_algebra(dict(MOYAL, order=2))
    monkeypatch.setenv("STARDEFORM_MAX_ORDER", "ten")
    with pytest.raises(ScenarioError):
        max_order_cap()


def test_unknown_algebra_type():
    with pytest.raises(ScenarioError):
        build_algebra({"type": "weyl", "order": 1})


# -- fixture construction -----------------------------------------------------------

def test_bott_fixture_requires_ratfunc():
    alg = build_algebra(MOYAL)  # poly coefficients
    with pytest.raises(ScenarioError):
        build_projection({"kind": "bott"}, alg)


def test_grid_projection_must_be_square():
    alg = build_algebra(dict(MOYAL, coefficients="ratfunc"))
    with pytest.raises(ScenarioError):
        build_projection({"kind": "grid", "entries": [["1", "0"]]}, alg)


def test_unknown_projection_kind():
    alg = build_algebra(MOYAL)
    with pytest.raises(ScenarioError):
        build_projection({"kind": "mystery"}, alg)


def test_shipped_bott_matches_builtin():
    from stardeform.fixtures import bott_projection
    from stardeform.matrices import cgrid_eq
    alg = build_algebra(dict(MOYAL, coefficients="ratfunc"))
    shipped = json.loads((ROOT / "fixtures" / "bott_r2.json").read_text())
    assert cgrid_eq(build_projection(shipped, alg),
                    bott_projection(("x", "p")))


# -- runs and reports ---------------------------------------------------------------

def test_minimal_run_report_shape():
    rep = run_scenario_dict(mini([{"task": "associativity", "samples": 2},
                                  {"task": "vey"}]))
    assert rep.passed
    payload = rep.payload
    assert payload["kind"] == "scenario"
    assert payload["order"] == 2
    assert payload["seed"] == 9
    assert [t["task"] for t in payload["tasks"]] == ["associativity", "vey"]
    jsonschema.validate(payload, SCHEMA)
    assert rep.to_json().endswith("\n")


def test_overrides_take_effect():
    cfg = mini([{"task": "vey"}])
    rep = run_scenario_dict(cfg, order_override=1, seed_override=123)
    assert rep.payload["order"] == 1
    assert rep.payload["seed"] == 123


def test_determinism_of_seeded_tasks():
    cfg = mini([{"task": "associativity", "samples": 4},
                {"task": "hermitian", "samples": 4}])
    a = run_scenario_dict(cfg).to_json()
    b = run_scenario_dict(cfg).to_json()
    assert a == b


def test_timings_are_opt_in():
    cfg = mini([{"task": "vey"}])
    plain = run_scenario_dict(cfg)
    timed = run_scenario_dict(cfg, timings=True)
    assert "time_ms" not in plain.payload["tasks"][0]
    assert "time_ms" in timed.payload["tasks"][0]


def test_explicit_value_lists():
    cfg = mini([{"task": "associativity",
                 "triples": [["x", "p", "x*p"], ["x^2", "p", "x + p"]]},
                {"task": "hermitian", "pairs": [["x + i*p", "x^2"]]}])
    rep = run_scenario_dict(cfg)
    assert rep.passed
    assert rep.payload["tasks"][0]["samples"] == 2


def test_failing_task_reports_order():
    cfg = {
        "name": "bad",
        "algebra": {"type": "custom", "variables": ["x", "p"], "order": 2,
                    "cochains": [
                        [{"weight": "1", "left": [1, 0], "right": [1, 0]}],
                        []]},
        "seed": 0,
        "tasks": [{"task": "associativity",
                   "triples": [["x^2", "x", "x"]]}],
    }
    rep = run_scenario_dict(cfg)
    assert not rep.passed
    entry = rep.payload["tasks"][0]
    assert entry["status"] == "fail"
    assert entry["first_failing_order"] == 2
    jsonschema.validate(rep.payload, SCHEMA)


def test_engine_error_becomes_error_entry():
    # module brackets need a skew first cochain; this one is symmetric,
    # so the task errors out rather than failing a comparison
    cfg = {
        "name": "err",
        "algebra": {"type": "custom", "variables": ["x", "p"], "order": 1,
                    "coefficients": "ratfunc",
                    "cochains": [
                        [{"weight": "1", "left": [1, 0], "right": [1, 0]}]]},
        "seed": 0,
        "fixtures": {"projections": {"d": {"kind": "diag",
                                           "diagonal": [1, 0]}}},
        "tasks": [{"task": "module_bracket_checks", "samples": 1}],
    }
    rep = run_scenario_dict(cfg)
    assert not rep.passed
    entry = rep.payload["tasks"][0]
    assert entry["status"] == "error"
    assert "skew" in entry["detail"]
    jsonschema.validate(rep.payload, SCHEMA)


def test_unknown_task_is_usage_error():
    with pytest.raises(ScenarioError):
        run_scenario_dict(mini([{"task": "transmogrify"}]))


def test_unknown_fixture_reference():
    cfg = mini([{"task": "module_laws", "projection": "ghost"}],
               fixtures={"projections": {"d": {"kind": "diag",
                                               "diagonal": [1, 0]}}})
    cfg["algebra"]["coefficients"] = "ratfunc"
    with pytest.raises(ScenarioError):
        run_scenario_dict(cfg)


def test_scenario_file_errors(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario_file(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ScenarioError) as e:
        load_scenario_file(str(bad))
    assert "line" in str(e.value)


def test_shipped_negative_fixture():
    rep = run_scenario(str(ROOT / "fixtures" / "diag2_negative.json"))
    assert not rep.passed
    entry = rep.payload["tasks"][0]
    assert entry["task"] == "strong_fullness"
    assert entry["status"] == "fail"
    assert any(f["detail"] == "residual 1" for f in entry["failures"])
    jsonschema.validate(rep.payload, SCHEMA)


# -- built-in suites ----------------------------------------------------------------

def test_builtin_scenarios_are_well_formed():
    for name in ("algebra", "matrix", "module", "semiclassical", "morita"):
        cfg = builtin_scenario(name, 3)
        assert cfg["seed"] == 3
        assert cfg["tasks"]


def test_unknown_suite():
    with pytest.raises(ScenarioError):
        run_builtin_suite("everything")
    with pytest.raises(ScenarioError):
        builtin_scenario("everything", 0)


def test_algebra_suite_runs_and_validates():
    rep = run_builtin_suite("algebra", seed=42)
    assert rep.passed
    payload = rep.payload
    assert payload["kind"] == "suite"
    assert payload["suites"][0]["suite"] == "algebra"
    jsonschema.validate(payload, SCHEMA)


def test_semiclassical_suite_deterministic():
    a = run_builtin_suite("semiclassical", seed=42).to_json()
    b = run_builtin_suite("semiclassical", seed=42).to_json()
    assert a == b
    jsonschema.validate(json.loads(a), SCHEMA)
