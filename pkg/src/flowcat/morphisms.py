"""Morphisms of map systems and (weak) morphisms of flows, with their law checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .errors import SystemMismatchError
from .reports import CheckReport, run_check
from .systems import MapSystem, compile_point_map, compile_time_map

TIME_GRID = np.linspace(-10.0, 10.0, 64)


def same_system(a, b) -> bool:
    return a is b or (getattr(a, "label", None) is not None and a.label == getattr(b, "label", None))


def _ambient_dim(sys) -> int:
    return sys.space.dim


@dataclass(frozen=True, eq=False)
class MapMorphism:
    """A map ``h`` between map systems with ``h(f(x)) = g(h(x))``."""

    source: MapSystem
    target: MapSystem
    h: Callable[[Any], Any]
    label: str = "h"

    @classmethod
    def from_exprs(cls, source: MapSystem, target: MapSystem, exprs: Sequence[str],
                   params: Mapping[str, float] | None = None, label: str | None = None) -> "MapMorphism":
        h = compile_point_map(exprs, _ambient_dim(source), target.space, params)
        return cls(source, target, h, label or f"h[{', '.join(exprs)}]")

    def __call__(self, x):
        return self.h(x)


def identity_map_morphism(m: MapSystem) -> MapMorphism:
    return MapMorphism(m, m, lambda x: x, label=f"id[{m.label}]")


def compose_map_morphisms(h2: MapMorphism, h1: MapMorphism) -> MapMorphism:
    if not same_system(h1.target, h2.source):
        raise SystemMismatchError(f"cannot compose {h2.label} after {h1.label}: systems differ")
    f1, f2 = h1.h, h2.h
    return MapMorphism(h1.source, h2.target, lambda x: f2(f1(x)), label=f"{h2.label}.{h1.label}")


def map_morphism_check(h: MapMorphism, samples: Sequence, tol: float, seed: int | None = None) -> CheckReport:
    f, g = h.source.forward, h.target.forward
    d = h.target.space.distance
    return run_check(
        f"map-morphism[{h.label}]", tol, samples, lambda x: d(h.h(f(x)), g(h.h(x))), seed
    )


@dataclass(frozen=True, eq=False)
class WeakMorphism:
    """A pair ``(h, tau)`` with ``h(source.evolve(x, t)) = target.evolve(h(x), tau(x, t))``.

    ``time_kind`` is ``"identity"`` for flow morphisms (``tau(x, t) = t``),
    ``"closed-form"`` for user expressions and ``"section-derived"`` when ``tau``
    is computed from return times.
    """

    source: Any
    target: Any
    h: Callable[[Any], Any]
    tau: Callable[[Any, float], float]
    label: str = "(h, tau)"
    time_kind: str = "closed-form"

    @classmethod
    def from_exprs(cls, source, target, h_exprs: Sequence[str], tau: str = "t",
                   params: Mapping[str, float] | None = None, label: str | None = None) -> "WeakMorphism":
        h = compile_point_map(h_exprs, _ambient_dim(source), target.space, params)
        if tau.strip() == "t":
            tau_fn, kind = (lambda x, t: t), "identity"
        else:
            tau_fn, kind = compile_time_map(tau, _ambient_dim(source), params), "closed-form"
        return cls(source, target, h, tau_fn, label or f"([{', '.join(h_exprs)}], {tau})", kind)

    @property
    def is_flow_morphism(self) -> bool:
        return self.time_kind == "identity"


def identity_morphism(sys) -> WeakMorphism:
    return WeakMorphism(sys, sys, lambda x: x, lambda x, t: t, label=f"id[{sys.label}]", time_kind="identity")


def flow_morphism(source, target, h: Callable, label: str = "h") -> WeakMorphism:
    return WeakMorphism(source, target, h, lambda x, t: t, label=label, time_kind="identity")


def weak_compose(w2: WeakMorphism, w1: WeakMorphism) -> WeakMorphism:
    """Composite with space part ``h2(h1(x))`` and time part ``tau2(h1(x), tau1(x, t))``."""
    if not same_system(w1.target, w2.source):
        raise SystemMismatchError(f"cannot compose {w2.label} after {w1.label}: systems differ")
    h1, h2, t1, t2 = w1.h, w2.h, w1.tau, w2.tau

    def tau(x, t):
        return t2(h1(x), t1(x, t))

    if w1.is_flow_morphism and w2.is_flow_morphism:
        kind = "identity"
    elif "section-derived" in (w1.time_kind, w2.time_kind):
        kind = "section-derived"
    else:
        kind = "closed-form"
    return WeakMorphism(w1.source, w2.target, lambda x: h2(h1(x)), tau, f"{w2.label}.{w1.label}", kind)


def weak_morphism_check(
    w: WeakMorphism,
    samples: Sequence[tuple[Any, float]],
    tol: float,
    seed: int | None = None,
    monotone_points: int = 8,
) -> CheckReport:
    """Intertwining residual, ``tau(x, 0) = 0`` and strict monotonicity of ``tau(x, .)``.

    Monotonicity is checked on a 64-point grid over ``[-10, 10]`` for the first
    ``monotone_points`` distinct sample points.
    """
    phi, psi = w.source, w.target
    d = psi.space.distance

    def residual(sample):
        x, t = sample
        law = d(w.h(phi.evolve(x, t)), psi.evolve(w.h(x), w.tau(x, t)))
        return max(law, abs(w.tau(x, 0.0)))

    report = run_check(f"weak-morphism[{w.label}]", tol, samples, residual, seed)
    seen = []
    for x, _ in samples:
        if len(seen) >= monotone_points:
            break
        if any(x is s or x == s for s in seen):
            continue
        seen.append(x)
        try:
            values = [w.tau(x, float(t)) for t in TIME_GRID]
        except (ArithmeticError, ValueError) as exc:
            report.fail(x, math.inf, f"tau evaluation failed on the time grid: {exc}")
            continue
        steps = np.diff(values)
        if np.any(steps <= 0):
            worst = float(-steps.min())
            report.fail(x, worst, f"tau(x, .) is not strictly increasing (drop {worst:.3e})")
    return report


def section_preservation_check(w, sys1=None, sys2=None, samples: Sequence = (), seed: int | None = None) -> CheckReport:
    """On samples, ``h(x)`` lies on the target section exactly when ``x`` lies on the source section."""
    sys1 = w.source if sys1 is None else sys1
    sys2 = w.target if sys2 is None else sys2

    def residual(x):
        return 0.0 if sys2.on_section(w.h(x)) == sys1.on_section(x) else 1.0

    return run_check(f"section-preservation[{w.label}]", 0.0, samples, residual, seed)


def period_correspondence_check(w, sys1, sys2, section_samples: Sequence, tol: float,
                                seed: int | None = None) -> CheckReport:
    """Return time of ``h(x)`` in ``sys2`` equals ``tau(x, return time of x in sys1)``, for section points ``x``."""

    def residual(x):
        t1 = sys1.first_return(x)[0]
        t2 = sys2.first_return(w.h(x))[0]
        return abs(t2 - w.tau(x, t1))

    return run_check(f"period-correspondence[{w.label}]", tol, section_samples, residual, seed)
