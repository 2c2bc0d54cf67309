import json

import pytest

from flowcat.cli import main

ROTATION_CONFIG = {
    "kind": "flow-closed",
    "label": "half-turn",
    "space": {"coords": [{"kind": "line", "lo": -2, "hi": 2}, {"kind": "line", "lo": -2, "hi": 2}]},
    "exprs": ["x1*cos(pi*t) - x2*sin(pi*t)", "x1*sin(pi*t) + x2*cos(pi*t)"],
    "domain": "min(x1^2 + x2^2 - 1, 4 - x1^2 - x2^2)",
    "section": {"g": "x2", "domain": "x1"},
}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_catalog_lists_systems(capsys):
    code, doc = run(capsys, "catalog")
    assert code == 0
    assert doc["meta"]["tool"] == "flowcat"
    assert "annulus_phi1" in {e["name"] for e in doc["results"]}


def test_orbit(capsys):
    code, doc = run(capsys, "orbit", "--system", "annulus_phi1", "--point", "[1.5, 0]", "--t0", "0", "--t1", "1",
                    "--step", "0.5")
    assert code == 0
    last = doc["results"]["orbit"][-1]
    assert last["t"] == 1.0
    assert last["point"] == pytest.approx([-1.5, 0.0], abs=1e-12)


def test_map_orbit_needs_integer_times(capsys):
    code, _ = run(capsys, "orbit", "--system", "circle_rotation", "--point", "[0.1]", "--t1", "1.5", "--step", "0.5")
    assert code == 2


def test_return_map_grid(capsys):
    code, doc = run(capsys, "return-map", "--system", "annulus_phi2", "--from", "[1.2, 0]", "--to", "[1.8, 0]",
                    "--n", "4")
    assert code == 0
    records = doc["results"]["records"]
    assert len(records) == 4
    assert all(r["return_time"] == pytest.approx(1.0, abs=1e-9) for r in records)


def test_return_map_numerical_failure(capsys):
    code, _ = run(capsys, "return-map", "--system", "plane_tangent", "--points", "[[0, 1]]")
    assert code == 3


def test_suspend(capsys):
    code, doc = run(capsys, "suspend", "--system", "interval_square", "--samples", "5")
    assert code == 0
    assert all(r["return_time"] == 1.0 for r in doc["results"]["records"])


@pytest.mark.parametrize("suite", ["flow-laws", "poincare", "suspension", "adjunction", "naturality", "rate"])
def test_verify_suites_pass(capsys, suite):
    code, doc = run(capsys, "verify", "--system", "annulus_phi2", "--suite", suite, "--samples", "5")
    assert code == 0
    assert doc["results"]["pass"] is True
    assert doc["meta"]["seed"] == 0


@pytest.mark.parametrize("suite", ["poincare", "adjunction", "rate"])
def test_verify_map_systems(capsys, suite):
    code, _ = run(capsys, "verify", "--system", "circle_rotation", "--suite", suite, "--samples", "5")
    assert code == 0


def test_verify_reports_law_failure(capsys):
    code, doc = run(capsys, "verify", "--system", "broken_flow", "--suite", "flow-laws", "--samples", "5")
    assert code == 1
    assert doc["results"]["pass"] is False


def test_verify_from_config(capsys, tmp_path):
    cfg = tmp_path / "rot.json"
    cfg.write_text(json.dumps(ROTATION_CONFIG))
    out = tmp_path / "out.json"
    code = main(["verify", "--config", str(cfg), "--suite", "poincare", "--samples", "5", "-o", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["results"]["pass"] is True


@pytest.mark.parametrize("argv", [
    ["verify", "--system", "nope", "--suite", "flow-laws"],
    ["verify", "--system", "circle_rotation", "--param", "alpha=5", "--suite", "flow-laws"],
    ["verify", "--system", "broken_flow", "--suite", "poincare"],
    ["promote", "--system", "annulus_phi1", "--target-system", "annulus_phi2", "--h", "x1", "--h", "x2",
     "--tau", "t*"],
    ["verify", "--system", "annulus_phi1", "--suite", "flow-laws", "--tol-law", "-1"],
])
def test_config_errors(capsys, argv):
    assert main(argv) == 2
    assert "config error" in capsys.readouterr().err


def test_promote(capsys):
    code, doc = run(capsys, "promote", "--system", "annulus_phi1", "--target-system", "annulus_phi2",
                    "--h", "x1", "--h", "x2", "--tau", "t/2", "--samples", "4")
    assert code == 0
    assert doc["results"]["reports"][0]["pass"] is True
    row = doc["results"]["table"][0]
    assert row["tau"]["1.0"] == pytest.approx(0.5, abs=1e-8)


def test_promote_rejects_non_morphism(capsys):
    code, _ = run(capsys, "promote", "--system", "annulus_phi1", "--target-system", "annulus_phi2",
                  "--h", "x1", "--h", "x2", "--samples", "3")
    assert code == 1


def test_output_is_byte_identical_for_a_fixed_seed(capsys):
    argv = ["verify", "--system", "annulus_radial_speed", "--suite", "rate", "--samples", "5", "--seed", "7"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first
