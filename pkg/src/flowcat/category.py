"""The comparison data of the suspension / Poincaré-map adjunction and verifiers for its laws.

For a system with a global section, ``k([x, t])`` flows the section point ``x``
for the fraction ``t`` of its return time. It maps the suspension of the
Poincaré map back onto the flow, and ``tau`` is the matching time change built
from the step function of successive return times.
"""

from __future__ import annotations

import math
from typing import Any, Sequence

from . import sampling
from .errors import PreconditionError, RecurrenceError
from .morphisms import (
    MapMorphism,
    WeakMorphism,
    compose_map_morphisms,
    identity_map_morphism,
    identity_morphism,
    map_morphism_check,
    same_system,
    section_preservation_check,
    weak_compose,
    weak_morphism_check,
)
from .reports import CheckReport, run_check
from .sections import SectionedFlow, poincare_functor_on_morphism, poincare_system
from .suspension import TorusPoint, TorusSpace, suspend_morphism, suspend_system, torus_canonicalize
from .systems import MapSystem

GATE_SAMPLES = 12
_MAX_CELLS = 1_000_000


# -- the step function of return times ---------------------------------------------

def R_integral(sys: SectionedFlow, x, a: float) -> float:
    """Signed integral from 0 to ``a`` of the return-time step function along the orbit of ``x``."""
    if not math.isfinite(a):
        raise ValueError(f"integration bound must be finite, got {a}")
    if a == 0:
        return 0.0
    n = math.floor(a)
    frac = a - n
    if abs(n) > _MAX_CELLS:
        raise RecurrenceError(f"integration bound {a} needs more than {_MAX_CELLS} return times")
    total = 0.0
    if a > 0:
        for _ in range(n):
            t, x = sys.first_return(x)
            total += t
        if frac:
            total += frac * sys.first_return(x)[0]
        return total
    # cells [i, i+1) for i = -1 .. n have widths equal to successive backward return times
    for _ in range(-n - 1):
        t, x = sys.first_return_backward(x)
        total += t
    t_last, _ = sys.first_return_backward(x)
    total += (1.0 - frac) * t_last
    return -total


def R_integral_inverse(sys: SectionedFlow, x, target: float) -> float:
    """The ``a`` with ``R_integral(sys, x, a) = target``."""
    if not math.isfinite(target):
        raise ValueError(f"target must be finite, got {target}")
    if target == 0:
        return 0.0
    cells = 0
    if target > 0:
        acc = 0.0
        while True:
            t, y = sys.first_return(x)
            if acc + t >= target:
                return cells + (target - acc) / t
            acc += t
            x = y
            cells += 1
            if cells > _MAX_CELLS:
                raise RecurrenceError(f"target {target} needs more than {_MAX_CELLS} return times")
    acc = 0.0
    while True:
        t, y = sys.first_return_backward(x)
        if acc + t >= -target:
            return -cells - (-target - acc) / t
        acc += t
        x = y
        cells += 1
        if cells > _MAX_CELLS:
            raise RecurrenceError(f"target {target} needs more than {_MAX_CELLS} return times")


# -- k, its inverse, and tau ---------------------------------------------------------

def k_eval(sys: SectionedFlow, p: TorusPoint):
    """Flow the section point ``p.base`` for ``p.height`` times its return time."""
    if p.height == 0:
        return p.base
    return sys.evolve(p.base, p.height * sys.first_return(p.base)[0])


def k_inverse(sys: SectionedFlow, y) -> TorusPoint:
    s, x = sys.last_hit(y)
    if s == 0:
        return TorusPoint(x, 0.0)
    return torus_canonicalize(poincare_system(sys), x, s / sys.first_return(x)[0])


def tau_eval(sys: SectionedFlow, p: TorusPoint, s: float) -> float:
    """Integral of the step function up to ``s + height``, minus ``height`` times the return time."""
    if s == 0:
        return 0.0
    x, t = p.base, p.height
    if t == 0:
        return R_integral(sys, x, s)
    return R_integral(sys, x, s + t) - t * sys.first_return(x)[0]


def counit(sys: SectionedFlow) -> WeakMorphism:
    """The counit ``(k, tau)`` from the suspension of the Poincaré map of ``sys`` to ``sys``."""
    return WeakMorphism(
        suspend_system(poincare_system(sys)), sys,
        lambda p: k_eval(sys, p), lambda p, s: tau_eval(sys, p, s),
        label=f"counit[{sys.label}]", time_kind="section-derived",
    )


def unit_l(m: MapSystem, x) -> TorusPoint:
    return TorusPoint(x, 0.0)


def unit(m: MapSystem) -> MapMorphism:
    """The unit ``x -> [x, 0]`` from ``m`` to the Poincaré map of its suspension."""
    return MapMorphism(m, poincare_system(suspend_system(m)), lambda x: TorusPoint(x, 0.0), label=f"l[{m.label}]")


# -- verifiers -------------------------------------------------------------------------

def _gate(report: CheckReport, what: str) -> None:
    if not report.passed:
        raise PreconditionError(what, report)


def _gate_sections(w, seed) -> None:
    samples = sampling.preservation_samples(w.source, GATE_SAMPLES, seed)
    _gate(section_preservation_check(w, w.source, w.target, samples, seed=seed),
          f"{w.label} does not preserve the sections")


def k_tau_check(sys: SectionedFlow, samples: Sequence[tuple[Any, float, float]], tol: float,
                seed: int | None = None) -> CheckReport:
    """``k`` carries the suspension flow to the flow, with time change ``tau``, on ``(x, t, s)`` samples."""
    w = counit(sys)
    report = weak_morphism_check(w, [(TorusPoint(x, t), s) for x, t, s in samples], tol, seed)
    report.name = f"k-tau-law[{sys.label}]"
    return report


def k_bijectivity_check(sys: SectionedFlow, points: Sequence, torus_points: Sequence[TorusPoint], tol: float,
                        seed: int | None = None) -> CheckReport:
    """Round trips ``k(k_inverse(y))`` on flow-space points and ``k_inverse(k(p))`` on torus points."""
    d = sys.space.distance
    dt = suspend_system(poincare_system(sys)).space.distance
    there = run_check(f"k-bijective[{sys.label}]", tol, points, lambda y: d(k_eval(sys, k_inverse(sys, y)), y), seed)
    back = run_check("k-inverse-left", tol, torus_points, lambda p: dt(k_inverse(sys, k_eval(sys, p)), p), seed)
    return there.merge(back)


def rate_preserving_check(w: WeakMorphism, samples: Sequence[tuple[Any, float, float]], tol: float,
                          seed: int | None = None, gate: bool = True) -> CheckReport:
    """``w.tau(k1(p), tau1(p, s)) = tau2([h(x), t], s)`` with ``p = [x, t]``, on ``(x, t, s)`` samples, ``x`` on the section."""
    sys1, sys2 = w.source, w.target
    if gate:
        _gate_sections(w, seed)

    def residual(sample):
        x, t, s = sample
        p = TorusPoint(x, t)
        lhs = w.tau(k_eval(sys1, p), tau_eval(sys1, p, s))
        rhs = tau_eval(sys2, TorusPoint(w.h(x), t), s)
        return abs(lhs - rhs)

    return run_check(f"rate-preserving[{w.label}]", tol, samples, residual, seed)


def rate_scaling_check(w: WeakMorphism, samples: Sequence[tuple[Any, float]], tol: float,
                       seed: int | None = None, gate: bool = True) -> CheckReport:
    """``w.tau(x, t * T(x)) = t * w.tau(x, T(x))`` with ``T`` the return time, on ``(x, t)`` samples."""
    sys1 = w.source
    if gate:
        rng = sampling.rng_for(seed)
        triples = [(x, t, float(rng.uniform(-2.0, 2.0))) for x, t in samples[:GATE_SAMPLES]]
        _gate(rate_preserving_check(w, triples, tol, seed), f"{w.label} is not rate-preserving")

    def residual(sample):
        x, t = sample
        period = sys1.first_return(x)[0]
        return abs(w.tau(x, t * period) - t * w.tau(x, period))

    return run_check(f"rate-scaling[{w.label}]", tol, samples, residual, seed)


def rate_composition_check(w2: WeakMorphism, w1: WeakMorphism, samples: Sequence[tuple[Any, float, float]],
                           tol: float, seed: int | None = None) -> CheckReport:
    """The composite of two rate-preserving morphisms is rate-preserving."""
    _gate(rate_preserving_check(w1, samples, tol, seed), f"{w1.label} is not rate-preserving")
    mid = [(w1.h(x), t, s) for x, t, s in samples]
    _gate(rate_preserving_check(w2, mid, tol, seed), f"{w2.label} is not rate-preserving")
    report = rate_preserving_check(weak_compose(w2, w1), samples, tol, seed)
    report.name = f"rate-composition[{w2.label}.{w1.label}]"
    return report


def triangle_identity_1(m: MapSystem, samples: Sequence[tuple[Any, float, float]], tol: float,
                        seed: int | None = None) -> CheckReport:
    """The counit of ``susp(m)`` after the suspended unit of ``m`` is the identity, in space and in time."""
    sm = suspend_system(m)
    comp = weak_compose(counit(sm), suspend_morphism(unit(m)))
    d = sm.space.distance

    def residual(sample):
        x, t, s = sample
        p = TorusPoint(x, t)
        return max(d(comp.h(p), p), abs(comp.tau(p, s) - s))

    return run_check(f"triangle-1[{m.label}]", tol, samples, residual, seed)


def triangle_identity_2(sys: SectionedFlow, section_samples: Sequence, tol: float,
                        seed: int | None = None) -> CheckReport:
    """The restricted counit of ``sys`` after the unit of its Poincaré map is the identity."""
    pk = poincare_functor_on_morphism(counit(sys), seed=seed or 0)
    lp = unit(poincare_system(sys))
    d = sys.space.distance
    return run_check(f"triangle-2[{sys.label}]", tol, section_samples, lambda x: d(pk.h(lp.h(x)), x), seed)


def naturality_check_k(w: WeakMorphism, samples: Sequence[tuple[Any, float, float]], tol: float,
                       seed: int | None = None, gate: bool = True) -> CheckReport:
    """Both naturality squares of the counit along ``w``: space part and time part."""
    sys1, sys2 = w.source, w.target
    if gate:
        _gate_sections(w, seed)
    d = sys2.space.distance

    def residual(sample):
        x, t, s = sample
        p = TorusPoint(x, t)
        q = TorusPoint(w.h(x), t)
        y = k_eval(sys1, p)
        space = d(w.h(y), k_eval(sys2, q))
        time = abs(w.tau(y, tau_eval(sys1, p, s)) - tau_eval(sys2, q, s))
        return max(space, time)

    return run_check(f"naturality-k[{w.label}]", tol, samples, residual, seed)


def naturality_check_l(h: MapMorphism, samples: Sequence, tol: float, seed: int | None = None,
                       gate: bool = True) -> CheckReport:
    """The suspended ``h`` after the unit equals the unit after ``h``."""
    if gate:
        _gate(map_morphism_check(h, samples[:GATE_SAMPLES], tol, seed), f"{h.label} is not a map morphism")
    bar = suspend_morphism(h)
    d = TorusSpace(h.target).distance
    f, g = h.source, h.target
    return run_check(
        f"naturality-l[{h.label}]", tol, samples, lambda x: d(bar.h(unit_l(f, x)), unit_l(g, h.h(x))), seed
    )


def unit_intertwining_check(m: MapSystem, samples: Sequence, tol: float, seed: int | None = None) -> CheckReport:
    """``unit(f(x))`` equals the Poincaré map of the suspension applied to ``unit(x)``."""
    sm = suspend_system(m)
    pm = poincare_system(sm)
    d = sm.space.distance
    return run_check(f"unit-intertwining[{m.label}]", tol, samples,
                     lambda x: d(unit_l(m, m.forward(x)), pm.forward(unit_l(m, x))), seed)


def equivalence_witness_check(m: MapSystem, samples: Sequence, tol: float, seed: int | None = None) -> CheckReport:
    """The unit and the height-0 restriction of ``k`` are mutually inverse between ``m`` and the section of its suspension."""
    sm = suspend_system(m)
    d_base = m.space.distance
    d_torus = sm.space.distance

    def residual(x):
        q = unit_l(m, x)
        y = k_eval(sm, TorusPoint(q, 0.0))
        back = k_inverse(sm, y)
        return max(d_base(y.base, x), d_torus(back.base, q), abs(back.height), d_torus(unit_l(m, y.base), y))

    report = run_check(f"equivalence-witness[{m.label}]", tol, samples, residual, seed)
    return report.merge(unit_intertwining_check(m, samples, tol, seed))


def sigma_functor_check(h1: MapMorphism, h2: MapMorphism, samples: Sequence[TorusPoint], tol: float,
                        seed: int | None = None) -> CheckReport:
    """Suspension keeps identities and composites, on torus points over the source of ``h1``."""
    ident = suspend_morphism(identity_map_morphism(h1.source))
    whole = suspend_morphism(compose_map_morphisms(h2, h1))
    parts = weak_compose(suspend_morphism(h2), suspend_morphism(h1))
    d_src = TorusSpace(h1.source).distance
    d_tgt = TorusSpace(h2.target).distance

    def residual(p):
        return max(d_src(ident.h(p), p), d_tgt(whole.h(p), parts.h(p)))

    return run_check(f"suspension-functor[{h2.label}.{h1.label}]", tol, samples, residual, seed)


def poincare_functor_check(w1: WeakMorphism, w2: WeakMorphism, section_samples: Sequence, tol: float,
                           seed: int | None = None) -> CheckReport:
    """Restriction to sections keeps identities and composites, on section samples of the source of ``w1``."""
    s = seed or 0
    ident = poincare_functor_on_morphism(identity_morphism(w1.source), seed=s)
    whole = poincare_functor_on_morphism(weak_compose(w2, w1), seed=s)
    parts = compose_map_morphisms(poincare_functor_on_morphism(w2, seed=s), poincare_functor_on_morphism(w1, seed=s))
    d_src = w1.source.space.distance
    d_tgt = w2.target.space.distance

    def residual(x):
        return max(d_src(ident.h(x), x), d_tgt(whole.h(x), parts.h(x)))

    return run_check(f"poincare-functor[{w2.label}.{w1.label}]", tol, section_samples, residual, seed)


# -- promotion to a rate-preserving morphism -----------------------------------------

def promote_to_rate_preserving(w: WeakMorphism, inverse: WeakMorphism | None = None, samples: Sequence | None = None,
                               tol: float | None = None, seed: int = 0) -> WeakMorphism:
    """Conjugate ``w`` by the counit isomorphisms: ``k2(lift(w)(k1_inverse(y)))``.

    The result has the same space part on the section as ``w`` and the canonical
    section-derived time change. ``inverse`` (if given) is checked to be a
    two-sided inverse of ``w`` on samples.
    """
    sys1, sys2 = w.source, w.target
    tol = sys1.tol.tol_law if tol is None else tol
    if samples is None:
        samples = sampling.weak_samples(sys1, GATE_SAMPLES, seed)
    _gate(weak_morphism_check(w, samples, tol, seed), f"{w.label} is not a weak morphism")
    _gate_sections(w, seed)
    if inverse is not None:
        if not (same_system(inverse.source, sys2) and same_system(inverse.target, sys1)):
            raise PreconditionError(f"{inverse.label} does not run from {sys2.label} to {sys1.label}",
                                    CheckReport(f"inverse[{inverse.label}]", tol))
        d1, d2 = sys1.space.distance, sys2.space.distance
        pts = [x for x, _ in samples]
        _gate(run_check(f"inverse[{inverse.label}]", tol, pts,
                        lambda x: max(d1(inverse.h(w.h(x)), x), d2(w.h(inverse.h(w.h(x))), w.h(x))), seed),
              f"{inverse.label} is not inverse to {w.label}")
    poincare_functor_on_morphism(w, seed=seed)
    h = w.h

    def h_new(y):
        p = k_inverse(sys1, y)
        return k_eval(sys2, TorusPoint(h(p.base), p.height))

    def tau_new(y, s):
        if s == 0:
            return 0.0
        p = k_inverse(sys1, y)
        x, t = p.base, p.height
        hx = h(x)
        a = R_integral_inverse(sys1, x, s + t * sys1.first_return(x)[0])
        return R_integral(sys2, hx, a) - t * sys2.first_return(hx)[0]

    return WeakMorphism(sys1, sys2, h_new, tau_new, label=f"promote({w.label})", time_kind="section-derived")
