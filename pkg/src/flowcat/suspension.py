"""Mapping tori, suspension flows and the suspension functor."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import sampling
from .errors import ConfigError, NonFiniteError, PreconditionError
from .morphisms import MapMorphism, WeakMorphism, map_morphism_check
from .sections import Crossing, SectionedFlow
from .spaces import DEFAULT_TOLERANCES, Tolerances
from .systems import MapSystem, check_map_laws, map_apply

VALIDATION_SAMPLES = 8


@dataclass(frozen=True)
class TorusPoint:
    """The class ``[x, t]`` in a mapping torus, stored with ``0 <= height < 1``."""

    base: Any
    height: float

    def to_json(self) -> dict:
        base = self.base.to_json() if hasattr(self.base, "to_json") else self.base
        return {"base": base, "height": self.height}


def torus_canonicalize(m: MapSystem, x, t: float) -> TorusPoint:
    """Normal form of ``(x, t)`` under ``(x, 1) ~ (f(x), 0)``."""
    if not math.isfinite(t):
        raise NonFiniteError(f"non-finite height {t}")
    n = math.floor(t)
    h = t - n
    if h >= 1.0:
        n += 1
        h = 0.0
    return TorusPoint(map_apply(m, x, n), h)


def suspension_eval(m: MapSystem, p: TorusPoint, s: float) -> TorusPoint:
    """``[f^n(x), s + t - n]`` where ``n`` is the integer with ``s + t - 1 < n <= s + t``."""
    return torus_canonicalize(m, p.base, p.height + s)


@dataclass(frozen=True, eq=False)
class TorusSpace:
    """Points of the mapping torus with a distance that respects the gluing seam."""

    base: MapSystem

    def canonicalize(self, x, t: float) -> TorusPoint:
        return torus_canonicalize(self.base, x, t)

    def distance(self, p: TorusPoint, q: TorusPoint) -> float:
        d = self.base.space.distance
        best = math.hypot(d(p.base, q.base), p.height - q.height)
        if abs(p.height - q.height) > 0.5:
            hi, lo = (p, q) if p.height > q.height else (q, p)
            # [x, h] = [f(x), h - 1] and [y, k] = [f^-1(y), k + 1]
            best = min(
                best,
                math.hypot(d(self.base.forward(hi.base), lo.base), hi.height - 1.0 - lo.height),
                math.hypot(d(hi.base, self.base.inverse(lo.base)), hi.height - lo.height - 1.0),
            )
        return best

    def approx_eq(self, p: TorusPoint, q: TorusPoint, tol: float) -> bool:
        return self.distance(p, q) <= tol

    def sample(self, rng: np.random.Generator) -> TorusPoint:
        return TorusPoint(self.base.sample(rng), float(rng.uniform(0.0, 1.0)))

    def point_from_json(self, data) -> TorusPoint:
        if not isinstance(data, dict) or "base" not in data or "height" not in data:
            raise ConfigError(f"torus point must be {{base, height}}, got {data!r}")
        base = self.base.space.point_from_json(data["base"])
        return self.canonicalize(base, float(data["height"]))


@dataclass(frozen=True, eq=False)
class SuspensionSystem(SectionedFlow):
    """The suspension flow of ``base`` with the height-0 section. Return times are exact, not root-found."""

    base: MapSystem
    tol: Tolerances = DEFAULT_TOLERANCES
    label: str | None = None
    _space: TorusSpace = field(init=False, repr=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_space", TorusSpace(self.base))
        if self.label is None:
            object.__setattr__(self, "label", f"susp({self.base.label})")

    @property
    def space(self) -> TorusSpace:
        return self._space

    def evolve(self, p: TorusPoint, s: float) -> TorusPoint:
        return suspension_eval(self.base, p, s)

    def section_value(self, p: TorusPoint) -> float:
        return p.height if p.height < 0.5 else p.height - 1.0

    def on_section(self, p: TorusPoint) -> bool:
        return abs(self.section_value(p)) <= self.tol.tol_space

    def crossings(self, p: TorusPoint, t0: float, t1: float, first_only: bool = False) -> list[Crossing]:
        if not t0 < t1:
            raise ValueError(f"need t0 < t1, got ({t0}, {t1})")
        h = p.height
        k = math.floor(h + t0) + 1
        k_max = math.floor(h + t1)
        out = []
        if k > k_max:
            return out
        x = map_apply(self.base, p.base, k)
        while k <= k_max:
            out.append(Crossing(k - h, TorusPoint(x, 0.0), 1))
            if first_only:
                break
            k += 1
            x = self.base.forward(x)
        return out

    def backward_crossings(self, p: TorusPoint, t0: float, t1: float, first_only: bool = False) -> list[Crossing]:
        if not t0 < t1:
            raise ValueError(f"need t0 < t1, got ({t0}, {t1})")
        h = p.height
        k = math.ceil(h - t0) - 1
        k_min = math.ceil(h - t1)
        out = []
        if k < k_min:
            return out
        x = map_apply(self.base, p.base, k)
        while k >= k_min:
            out.append(Crossing(h - k, TorusPoint(x, 0.0), 1))
            if first_only:
                break
            k -= 1
            x = self.base.inverse(x)
        return out

    def last_hit(self, p: TorusPoint) -> tuple[float, TorusPoint]:
        if p.height == 0.0:
            return 0.0, p
        return p.height, TorusPoint(p.base, 0.0)

    def sample_point(self, rng: np.random.Generator) -> TorusPoint:
        return self._space.sample(rng)

    def sample_section_point(self, rng: np.random.Generator) -> TorusPoint:
        return TorusPoint(self.base.sample(rng), 0.0)


def suspend_system(m: MapSystem, validate: bool = True) -> SuspensionSystem:
    """Suspension of ``m``; the result is cached on ``m`` so repeated calls share one object."""
    cached = m.__dict__.get("_suspension")
    if cached is not None:
        return cached
    if validate:
        report = check_map_laws(m, sampling.map_samples(m, VALIDATION_SAMPLES, 0), DEFAULT_TOLERANCES.tol_law, seed=0)
        if not report.passed:
            raise PreconditionError(f"{m.label} is not a homeomorphism on samples", report)
    sys = SuspensionSystem(m)
    m.__dict__["_suspension"] = sys
    return sys


def suspend_morphism(h: MapMorphism, validate: bool = True) -> WeakMorphism:
    """The lift ``[x, t] -> [h(x), t]``: a flow morphism preserving the height-0 sections."""
    if validate:
        report = map_morphism_check(h, sampling.map_samples(h.source, VALIDATION_SAMPLES, 0),
                                    DEFAULT_TOLERANCES.tol_law, seed=0)
        if not report.passed:
            raise PreconditionError(f"{h.label} does not intertwine the two maps", report)
    hh = h.h

    def bar(p: TorusPoint) -> TorusPoint:
        return TorusPoint(hh(p.base), p.height)

    return WeakMorphism(
        suspend_system(h.source, validate), suspend_system(h.target, validate), bar,
        lambda p, s: s, label=f"susp({h.label})", time_kind="identity",
    )
