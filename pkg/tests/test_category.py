import pytest
from hypothesis import given
from hypothesis import strategies as st

from flowcat import MapMorphism, Point, TorusPoint, WeakMorphism, catalog_get
from flowcat import R_integral, R_integral_inverse, counit, k_eval, k_inverse, tau_eval, unit, unit_l
from flowcat import promote_to_rate_preserving, rate_composition_check, rate_preserving_check, rate_scaling_check
from flowcat import triangle_identity_1, triangle_identity_2, weak_compose, weak_morphism_check
from flowcat.category import (
    equivalence_witness_check,
    k_bijectivity_check,
    k_tau_check,
    naturality_check_k,
    naturality_check_l,
    poincare_functor_check,
    sigma_functor_check,
    unit_intertwining_check,
)
from flowcat.errors import PreconditionError
from flowcat.morphisms import identity_morphism
from flowcat.sampling import base_torus_samples, map_samples, section_samples, space_samples, torus_samples
from flowcat.sampling import weak_samples
from flowcat.suspension import suspend_system

from test_morphisms import TWIST_H, TWIST_TAU

TOL = 1e-6
X0 = Point((1.5, 0.0))


@pytest.fixture(scope="module")
def half_speed(phi1, phi2):
    return WeakMorphism.from_exprs(phi1, phi2, ["x1", "x2"], tau="t/2")


@pytest.fixture(scope="module")
def twist(phi1):
    return WeakMorphism.from_exprs(phi1, phi1, TWIST_H, tau=TWIST_TAU, label="twist")


def test_step_integral_values(phi1, radial):
    assert R_integral(phi1, X0, 1.5) == pytest.approx(3.0, abs=1e-9)
    assert R_integral(phi1, X0, -1.0) == pytest.approx(-2.0, abs=1e-9)
    assert R_integral(phi1, X0, 0.0) == 0.0
    x = Point((1.2, 0.0))
    assert R_integral(radial, x, 2.5) == pytest.approx(2.5 * 6.283185307179586 / 1.2, abs=1e-8)


@given(st.floats(-5, 5))
def test_step_integral_inverse(phi2, a):
    assert R_integral_inverse(phi2, X0, R_integral(phi2, X0, a)) == pytest.approx(a, abs=1e-9)


def test_k_and_tau_closed_forms(phi1):
    y = k_eval(phi1, TorusPoint(X0, 0.25))
    assert phi1.space.distance(y, Point((0.0, 1.5))) < 1e-9
    for s in (-1.3, 0.4, 2.7):
        assert tau_eval(phi1, TorusPoint(X0, 0.25), s) == pytest.approx(2 * s, abs=1e-9)


def test_k_inverse(phi1):
    p = k_inverse(phi1, Point((0.0, -1.5)))
    assert p.height == pytest.approx(0.75, abs=1e-9)
    assert phi1.space.distance(p.base, X0) < 1e-8
    assert k_inverse(phi1, X0) == TorusPoint(X0, 0.0)


def test_counit_and_unit_shapes(phi1, circle):
    w = counit(phi1)
    assert w.label == "counit[annulus_phi1]"
    assert w.time_kind == "section-derived"
    assert w.target is phi1
    assert unit_l(circle, Point((0.3,))) == TorusPoint(Point((0.3,)), 0.0)
    assert unit(circle).target.label == "poincare(susp(circle_rotation(alpha=0.1)))"


@pytest.mark.parametrize("name", ["annulus_phi1", "annulus_phi2", "annulus_radial_speed"])
def test_k_is_a_weak_morphism(name):
    sys = catalog_get(name)
    assert k_tau_check(sys, torus_samples(sys, 30, 0), TOL).passed


@pytest.mark.parametrize("name", ["annulus_phi1", "annulus_radial_speed", "suspended_circle_rotation"])
def test_k_is_bijective(name):
    sys = catalog_get(name)
    tps = [TorusPoint(x, t) for x, t, _ in torus_samples(sys, 20, 1)]
    assert k_bijectivity_check(sys, space_samples(sys, 20, 1), tps, TOL).passed


@pytest.mark.parametrize("name", ["circle_rotation", "interval_identity", "interval_square"])
def test_first_triangle(name):
    m = catalog_get(name)
    report = triangle_identity_1(m, base_torus_samples(m, 30, 0), 1e-9)
    assert report.passed, report.summary()
    assert unit_intertwining_check(m, map_samples(m, 20, 0), 1e-12).passed
    assert equivalence_witness_check(m, map_samples(m, 20, 0), 1e-9).passed


@pytest.mark.parametrize("name", ["annulus_phi1", "annulus_phi2", "annulus_radial_speed"])
def test_second_triangle(name):
    sys = catalog_get(name)
    assert triangle_identity_2(sys, section_samples(sys, 20, 0), TOL).passed


def test_naturality_of_counit(phi1, half_speed):
    assert naturality_check_k(identity_morphism(phi1), torus_samples(phi1, 20, 0), TOL).passed
    assert naturality_check_k(half_speed, torus_samples(phi1, 20, 0), TOL).passed


def test_naturality_of_unit(circle):
    h = MapMorphism.from_exprs(circle, circle, ["x1 + 0.5"])
    report = naturality_check_l(h, map_samples(circle, 20, 0), TOL)
    assert report.passed and report.max_residual == 0.0


def test_naturality_gate_rejects_quarter_turn(phi1):
    w = WeakMorphism.from_exprs(phi1, phi1, ["-x2", "x1"])
    with pytest.raises(PreconditionError):
        naturality_check_k(w, torus_samples(phi1, 5, 0), TOL)


def test_rate_preservation(phi1, half_speed):
    samples = torus_samples(phi1, 20, 0)
    ident = rate_preserving_check(identity_morphism(phi1), samples, TOL)
    assert ident.passed and ident.max_residual < 1e-12
    assert rate_preserving_check(half_speed, samples, TOL).passed
    assert rate_scaling_check(half_speed, [(x, t) for x, t, _ in samples], TOL).passed
    assert rate_preserving_check(counit(phi1), [(TorusPoint(x, 0.0), t, s) for x, t, s in samples], TOL).passed


def test_rate_composition(phi1, phi2, half_speed):
    back = WeakMorphism.from_exprs(phi2, phi1, ["x1", "x2"], tau="2*t")
    assert rate_composition_check(back, half_speed, torus_samples(phi1, 15, 0), TOL).passed


def test_twist_is_not_rate_preserving(phi1, twist):
    report = rate_preserving_check(twist, torus_samples(phi1, 20, 0), TOL)
    assert not report.passed
    assert report.max_residual > 0.01


def test_promotion_of_twist(phi1, twist):
    promoted = promote_to_rate_preserving(twist)
    assert promoted.time_kind == "section-derived"
    assert weak_morphism_check(promoted, weak_samples(phi1, 10, 0), TOL, monotone_points=0).passed
    assert rate_preserving_check(promoted, torus_samples(phi1, 10, 0), TOL).passed
    for x in section_samples(phi1, 5, 0):
        assert phi1.space.distance(promoted.h(x), twist.h(x)) < 1e-8


def test_promotion_of_half_speed(phi1, half_speed):
    promoted = promote_to_rate_preserving(half_speed)
    y = Point((0.3, 1.2))
    assert phi1.space.distance(promoted.h(y), y) < 1e-8
    assert promoted.tau(y, 1.7) == pytest.approx(0.85, abs=1e-8)


def test_promotion_needs_a_weak_morphism(phi1, phi2):
    with pytest.raises(PreconditionError):
        promote_to_rate_preserving(WeakMorphism.from_exprs(phi1, phi2, ["x1", "x2"]))


def test_functor_laws(circle, phi1, phi2, half_speed):
    h = MapMorphism.from_exprs(circle, circle, ["x1 + 0.5"])
    g = MapMorphism.from_exprs(circle, circle, ["x1 + 0.25"])
    sm = suspend_system(circle)
    pts = [TorusPoint(x, t) for x, t, _ in base_torus_samples(circle, 20, 0)]
    assert sigma_functor_check(h, g, pts, 1e-12).passed
    assert sm.label.startswith("susp(")
    back = WeakMorphism.from_exprs(phi2, phi1, ["x1", "x2"], tau="2*t")
    assert poincare_functor_check(half_speed, back, section_samples(phi1, 10, 0), TOL).passed


def test_half_speed_chain_through_three_speeds(phi1, phi2, half_speed):
    phi4 = catalog_get("annulus_rotation", {"omega": 4 * 3.141592653589793})
    second = WeakMorphism.from_exprs(phi2, phi4, ["x1", "x2"], tau="t/2")
    chain = weak_compose(second, half_speed)
    assert chain.tau(X0, 2.0) == pytest.approx(0.5)
    assert weak_morphism_check(chain, weak_samples(phi1, 20, 0), 1e-9).passed
    assert rate_composition_check(second, half_speed, torus_samples(phi1, 10, 0), TOL).passed


def test_plain_identity_preserves_sections(phi1, phi2):
    from flowcat import section_preservation_check
    from flowcat.sampling import preservation_samples

    w = WeakMorphism.from_exprs(phi1, phi2, ["x1", "x2"])
    assert section_preservation_check(w, phi1, phi2, preservation_samples(phi1, 24, 0)).passed
