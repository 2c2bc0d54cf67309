import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flowcat import Circle, FlowSystem, Line, MapSystem, Point, Space, check_flow_laws, map_apply, reverse
from flowcat.errors import ConfigError, DimensionError, OrbitError
from flowcat.sampling import flow_law_samples, map_samples
from flowcat.systems import check_map_laws

PLANE = Space.of(Line(-10.0, 10.0), Line(-10.0, 10.0))
times = st.floats(-3, 3)


@pytest.fixture(scope="module")
def rotation():
    return FlowSystem.closed_form(PLANE, ["x1*cos(t) - x2*sin(t)", "x1*sin(t) + x2*cos(t)"], label="rot")


@pytest.fixture(scope="module")
def rotation_field():
    return FlowSystem.ode(PLANE, ["-x2", "x1"], step=1e-3, label="rot-ode")


@given(st.floats(-1, 1), st.floats(-1, 1), times, times)
def test_closed_form_group_law(rotation, a, b, s, t):
    x = Point((a, b))
    lhs = rotation.evolve(rotation.evolve(x, t), s)
    assert PLANE.distance(lhs, rotation.evolve(x, s + t)) < 1e-12


def test_flow_law_report(rotation, rotation_field):
    for fl in (rotation, rotation_field):
        report = check_flow_laws(fl, flow_law_samples_plane(10), 1e-6)
        assert report.passed, report.summary()


def flow_law_samples_plane(n):
    rng = np.random.default_rng(0)
    return [(Point(tuple(rng.uniform(-1, 1, 2))), *rng.uniform(-2, 2, 2)) for _ in range(n)]


def test_broken_flow_fails_group_law():
    from flowcat import catalog_get

    broken = catalog_get("broken_flow")
    report = check_flow_laws(broken, [(Point((0.0,)), 1.0, 1.0)], 1e-6)
    assert not report.passed
    assert report.max_residual == pytest.approx(2.0)


def test_rk4_matches_closed_form(rotation, rotation_field):
    x = Point((1.0, 0.5))
    for t in (0.3, -1.7, 2 * math.pi):
        assert PLANE.distance(rotation_field.evolve(x, t), rotation.evolve(x, t)) < 1e-10


def test_rk4_error_is_fourth_order():
    x = Point((1.0, 0.0))
    exact = (math.cos(1.0), math.sin(1.0))
    errs = []
    for h in (0.1, 0.05):
        fl = FlowSystem.ode(PLANE, ["-x2", "x1"], step=h)
        errs.append(math.dist(fl.evolve(x, 1.0).values, exact))
    assert 12 < errs[0] / errs[1] < 20


def test_trajectory_matches_evolve(rotation, rotation_field):
    offsets = np.linspace(0.0, 3.0, 7)
    x = Point((0.4, -0.2))
    for fl in (rotation, rotation_field):
        traj = fl.trajectory(x, offsets)
        for row, o in zip(traj, offsets):
            assert np.allclose(row, fl.evolve(x, o).values, atol=1e-12)


def test_reverse_is_involution(rotation):
    rev = reverse(rotation)
    x = Point((1.0, 1.0))
    assert PLANE.distance(rev.evolve(x, 0.7), rotation.evolve(x, -0.7)) == 0.0
    assert reverse(rev).label == "rot"


def test_orbit_leaving_box_raises():
    fl = FlowSystem.closed_form(Space.of(Line(-1.0, 1.0)), ["x1 + t"])
    with pytest.raises(OrbitError):
        fl.evolve(Point((0.0,)), 5.0)


def test_flow_construction_errors():
    with pytest.raises(DimensionError):
        FlowSystem.closed_form(PLANE, ["x1 + t"])
    with pytest.raises(ConfigError):
        FlowSystem.ode(PLANE, ["-x2", "x1"], step=0.0)
    with pytest.raises(Exception):
        FlowSystem.closed_form(PLANE, ["x1 + y", "x2"])


def test_circle_rotation_map_laws(circle):
    report = check_map_laws(circle, map_samples(circle, 30, 0), 1e-12)
    assert report.passed
    x = Point((0.95,))
    assert circle.space.distance(map_apply(circle, x, 3), Point((0.25,))) < 1e-12
    assert circle.space.distance(map_apply(circle, map_apply(circle, x, 5), -5), x) < 1e-12
    with pytest.raises(ValueError):
        map_apply(circle, x, 0.5)


def test_non_homeomorphism_fails_map_laws():
    bad = MapSystem.from_exprs(Space.of(Circle(1.0)), ["2*x1"], ["x1"])
    assert not check_map_laws(bad, map_samples(bad, 20, 0), 1e-6).passed


def test_state_values_agree_with_evolve(rotation, rotation_field):
    x = Point((0.3, -1.1))
    for fl in (rotation, rotation_field, reverse(rotation)):
        assert np.allclose(fl.state_values(x.values, 0.8), fl.evolve(x, 0.8).values, atol=1e-14)
