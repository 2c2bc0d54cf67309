import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from flowcat import GlobalSectionSystem, Point, catalog_get, poincare_map, return_time
from flowcat.errors import OrbitError
from flowcat.sampling import section_samples, space_samples
from flowcat.sections import (
    poincare_inverse,
    poincare_system,
    recurrence_check,
    return_time_partial_sums,
    transversality_probe,
)

radii = st.floats(1.01, 1.99)


@given(radii)
def test_rotation_returns_to_start(phi1, r):
    x = Point((r, 0.0))
    assert return_time(phi1, x) == pytest.approx(2.0, abs=1e-9)
    assert phi1.space.distance(poincare_map(phi1, x), x) < 1e-8


@given(radii)
def test_radial_speed_return_time(radial, r):
    assert return_time(radial, Point((r, 0.0))) == pytest.approx(2 * math.pi / r, abs=1e-8)


def test_crossings_are_on_section(phi2):
    x = Point((1.5, 0.0))
    hits = phi2.crossings(x, 0.0, 3.5)
    assert [round(c.time, 8) for c in hits] == [1.0, 2.0, 3.0]
    assert all(phi2.on_section(c.point) for c in hits)
    assert all(c.direction == 1 for c in hits)


def test_negative_real_axis_is_not_admitted(phi1):
    # the zero set of x2 also meets the annulus on the negative real axis
    hits = phi1.crossings(Point((1.5, 0.0)), 0.0, 1.5)
    assert hits == []


def test_backward_crossings_report_positive_times(phi1):
    hits = phi1.backward_crossings(Point((0.0, 1.5)), 0.0, 3.0)
    assert [round(c.time, 8) for c in hits] == [0.5, 2.5]


def test_inverse_map_undoes_forward(radial):
    for x in section_samples(radial, 10, 1):
        assert radial.space.distance(poincare_inverse(radial, poincare_map(radial, x)), x) < 1e-8


def test_poincare_system_is_cached(phi1):
    m = poincare_system(phi1)
    assert m is poincare_system(phi1)
    assert m.label == "poincare(annulus_phi1)"


def test_last_hit(phi1):
    s, x = phi1.last_hit(Point((0.0, 1.5)))
    assert s == pytest.approx(0.5, abs=1e-9)
    assert phi1.space.distance(x, Point((1.5, 0.0))) < 1e-8


def test_partial_sums_increase(phi2):
    sums = return_time_partial_sums(phi2, Point((1.2, 0.0)), 20)
    assert sums == sorted(sums)
    assert sums[-1] == pytest.approx(20.0, abs=1e-7)
    with pytest.raises(ValueError):
        return_time_partial_sums(phi2, Point((1.2, 0.0)), 0)


def test_recurrence_and_transversality(phi1):
    assert recurrence_check(phi1, space_samples(phi1, 10, 0), 10.0).passed
    for x in section_samples(phi1, 5, 0):
        assert transversality_probe(phi1, x)


def test_tangent_section_has_no_recurrence():
    plane = catalog_get("plane_tangent")
    x = Point((0.0, 0.0))
    assert not transversality_probe(plane, x)
    report = recurrence_check(plane, [x, Point((0.0, 1.0))], 10.0)
    assert not report.passed
    with pytest.raises(OrbitError):  # it drifts out of the box before any crossing
        return_time(plane, Point((0.0, 1.0)))


def test_orientation_filters_crossings(phi1):
    x = Point((1.5, 0.0))
    down = GlobalSectionSystem(phi1.flow, "x2", orientation=-1, label="down")
    up = GlobalSectionSystem(phi1.flow, "x2", orientation=1, label="up")
    (c,) = down.crossings(x, 0.0, 1.5)
    assert c.time == pytest.approx(1.0, abs=1e-9)
    assert c.point[0] == pytest.approx(-1.5)
    assert [round(c.time, 8) for c in up.crossings(x, 0.0, 2.5)] == [2.0]
    assert down.reversed_system.orientation == 1


def test_section_on_a_circle_coordinate():
    from flowcat import Circle, FlowSystem, Line, Space

    fl = FlowSystem.closed_form(Space.of(Circle(1.0), Line(-1.0, 1.0)), ["x1 + t", "x2"], label="drift")
    sys = GlobalSectionSystem(fl, "sin(2*pi*x1)", orientation=1, label="drift")
    t, y = sys.first_return(Point((0.0, 0.5)))
    assert t == pytest.approx(1.0, abs=1e-9)
    assert sys.space.distance(y, Point((0.0, 0.5))) < 1e-9
    assert return_time(sys, Point((0.0, 0.5))) == t
    assert sys.last_hit(Point((0.25, 0.5)))[0] == pytest.approx(0.25, abs=1e-9)
