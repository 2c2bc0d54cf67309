"""Global Poincaré sections, crossing detection, return times and Poincaré maps."""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from collections import OrderedDict
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from .errors import ConfigError, PreconditionError, RecurrenceError
from .expr import Expression, compile_expr, parse, to_source
from .reports import CheckReport, run_check
from .spaces import DEFAULT_TOLERANCES, Circle, Point, Tolerances
from .systems import FlowSystem, MapSystem, _check_names, coord_names, reverse

log = logging.getLogger(__name__)

_RETURN_CACHE_SIZE = 4096


@dataclass(frozen=True)
class Crossing:
    time: float
    point: Any
    direction: int


class SectionedFlow(ABC):
    """A flow together with a global section ``S``.

    Subclasses supply the flow, membership in ``S`` and the first forward and
    backward hits of ``S``; everything built on return times (Poincaré maps,
    the counit ``(k, tau)``, rate checks) is written against this interface.
    """

    tol: Tolerances
    label: str | None

    @property
    @abstractmethod
    def space(self): ...

    @abstractmethod
    def evolve(self, x, t: float): ...

    @abstractmethod
    def section_value(self, x) -> float:
        """Signed value whose zero set (inside the chart) is the section."""

    @abstractmethod
    def on_section(self, x) -> bool: ...

    @abstractmethod
    def crossings(self, x, t0: float, t1: float, first_only: bool = False) -> list[Crossing]:
        """Admitted crossings of ``S`` by ``evolve(x, t)`` for ``t`` in ``(t0, t1]``."""

    @abstractmethod
    def backward_crossings(self, x, t0: float, t1: float, first_only: bool = False) -> list[Crossing]:
        """Crossings of ``evolve(x, -t)`` for ``t`` in ``(t0, t1]``; times are reported positive."""

    @abstractmethod
    def sample_point(self, rng: np.random.Generator): ...

    def first_return(self, x) -> tuple[float, Any]:
        """``(return time, first return point)`` for ``x`` on the section."""
        cs = self.crossings(x, self.tol.t_min, self.tol.max_horizon, first_only=True)
        if not cs:
            raise RecurrenceError(
                f"no forward return to the section within {self.tol.max_horizon} from {_fmt(x)}"
            )
        return cs[0].time, cs[0].point

    def first_return_backward(self, x) -> tuple[float, Any]:
        """``(return time, first return point)`` for the reversed flow ``(x, t) -> evolve(x, -t)``."""
        cs = self.backward_crossings(x, self.tol.t_min, self.tol.max_horizon, first_only=True)
        if not cs:
            raise RecurrenceError(
                f"no backward return to the section within {self.tol.max_horizon} from {_fmt(x)}"
            )
        return cs[0].time, cs[0].point

    def last_hit(self, y) -> tuple[float, Any]:
        """``(s, x)`` with ``s >= 0`` the first backward hitting time and ``x = evolve(y, -s)``."""
        if self.on_section(y):
            return 0.0, y
        cs = self.backward_crossings(y, 0.0, self.tol.max_horizon, first_only=True)
        if not cs:
            raise RecurrenceError(f"orbit of {_fmt(y)} never met the section in backward time")
        return cs[0].time, cs[0].point

    def sample_section_point(self, rng: np.random.Generator):
        return self.last_hit(self.sample_point(rng))[1]

    def distance(self, p, q) -> float:
        return self.space.distance(p, q)


def _fmt(x) -> str:
    return repr(x.to_json()) if hasattr(x, "to_json") else repr(x)


@dataclass(frozen=True, eq=False)
class GlobalSectionSystem(SectionedFlow):
    """A flow with a section given as the zero set of ``section`` where ``domain > 0``.

    ``orientation`` restricts admitted crossings to one sign of ``d/dt g(evolve(x, t))``
    (+1 or -1); 0 admits both.
    """

    flow: FlowSystem
    section: Expression
    domain: Expression | None = None
    orientation: int = 0
    tol: Tolerances = DEFAULT_TOLERANCES
    label: str | None = None
    _g: Any = field(init=False, repr=False, default=None)
    _gv: Any = field(init=False, repr=False, default=None)
    _dom: Any = field(init=False, repr=False, default=None)
    _cache: Any = field(init=False, repr=False, default=None)
    _wraps: bool = field(init=False, repr=False, default=False)

    def __post_init__(self):
        if isinstance(self.section, str):
            object.__setattr__(self, "section", parse(self.section))
        if isinstance(self.domain, str):
            object.__setattr__(self, "domain", parse(self.domain))
        if self.orientation not in (-1, 0, 1):
            raise ConfigError(f"orientation must be -1, 0 or 1, got {self.orientation}")
        names = coord_names(self.flow.space.dim)
        params = self.flow.params
        allowed = set(names) | set(params)
        _check_names([self.section], allowed, "section function")
        object.__setattr__(self, "_g", compile_expr(self.section, names, params))
        object.__setattr__(self, "_gv", compile_expr(self.section, names, params, vector=True))
        if self.domain is not None:
            _check_names([self.domain], allowed, "section domain")
            object.__setattr__(self, "_dom", compile_expr(self.domain, names, params))
        object.__setattr__(self, "_cache", OrderedDict())
        object.__setattr__(self, "_wraps", any(isinstance(c, Circle) for c in self.flow.space.coords))

    @property
    def space(self):
        return self.flow.space

    def evolve(self, x: Point, t: float) -> Point:
        return self.flow.evolve(x, t)

    def section_value(self, x: Point) -> float:
        return self._g(*x.values)

    def in_chart(self, x: Point) -> bool:
        return self._dom is None or self._dom(*x.values) > 0

    def on_section(self, x: Point) -> bool:
        return abs(self._g(*x.values)) <= self.tol.tol_space and self.in_chart(x)

    def with_tolerances(self, tol: Tolerances) -> "GlobalSectionSystem":
        return replace(self, tol=tol)

    @property
    def reversed_system(self) -> "GlobalSectionSystem":
        rev = self.__dict__.get("_reversed")
        if rev is None:
            label = None if self.label is None else f"{self.label}~rev"
            rev = replace(self, flow=reverse(self.flow), orientation=-self.orientation, label=label)
            self.__dict__["_reversed"] = rev
            rev.__dict__["_reversed"] = self
        return rev

    def _admit(self, p: Point, direction: int) -> bool:
        if self.orientation and direction != self.orientation:
            return False
        return self.in_chart(p)

    def _refine(self, y: Point, t_a: float, t_b: float, g_a: float) -> Crossing | None:
        lo, hi = 0.0, t_b - t_a
        positive = g_a > 0
        tol_time = self.tol.tol_time
        g, flow, vals = self._g, self.flow, y.values
        # the section function sees canonical coordinates, so wrap only when circles are present
        wrap = self._wraps
        while hi - lo > tol_time:
            mid = 0.5 * (lo + hi)
            raw = flow.state_values(vals, mid)
            gm = g(*(flow.space.canonicalize(raw).values if wrap else raw))
            if gm == 0.0:
                lo = hi = mid
                break
            if (gm > 0) == positive:
                lo = mid
            else:
                hi = mid
        tc = 0.5 * (lo + hi)
        p = self.flow.evolve(y, tc)
        direction = -1 if positive else 1
        if not self._admit(p, direction):
            return None
        return Crossing(t_a + tc, p, direction)

    def crossings(self, x: Point, t0: float, t1: float, first_only: bool = False) -> list[Crossing]:
        if not t0 < t1:
            raise ValueError(f"need t0 < t1, got ({t0}, {t1})")
        dt, t_min = self.tol.dt, self.tol.t_min
        out: list[Crossing] = []
        t_left = t0
        y_left = self.flow.evolve(x, t0) if t0 != 0 else x
        g_left = self._g(*y_left.values)
        chunk = 32
        while t_left < t1:
            count = min(chunk, max(1, math.ceil((t1 - t_left) / dt - 1e-9)))
            offs = dt * np.arange(1, count + 1, dtype=float)
            if t_left + offs[-1] > t1:
                offs[-1] = t1 - t_left
            states = self.flow.trajectory(y_left, offs)
            gs = np.asarray(self._gv(*states.T), dtype=float)
            gs = np.broadcast_to(gs, offs.shape)
            gvals = np.concatenate(([g_left], gs))
            times = np.concatenate(([t_left], t_left + offs))
            hits = np.nonzero((gvals[:-1] != 0) & (gvals[:-1] * gvals[1:] <= 0))[0]
            for i in hits:
                y_i = y_left if i == 0 else Point(tuple(float(v) for v in states[i - 1]))
                c = self._refine(y_i, float(times[i]), float(times[i + 1]), float(gvals[i]))
                if c is None:
                    continue
                if out and c.time - out[-1].time < t_min:
                    continue
                if out and c.time - out[-1].time < 2 * dt:
                    log.warning(
                        "crossings at t=%.6g and t=%.6g are closer than 2*dt; crossings may be missed",
                        out[-1].time, c.time,
                    )
                out.append(c)
                if first_only:
                    return out
            t_left = float(times[-1])
            y_left = Point(tuple(float(v) for v in states[-1]))
            g_left = float(gvals[-1])
            chunk = min(2 * chunk, 4096)
        return out

    def backward_crossings(self, x: Point, t0: float, t1: float, first_only: bool = False) -> list[Crossing]:
        return self.reversed_system.crossings(x, t0, t1, first_only)

    def first_return(self, x: Point) -> tuple[float, Point]:
        key = x.values
        cache = self._cache
        hit = cache.get(key)
        if hit is not None:
            cache.move_to_end(key)
            return hit
        result = super().first_return(x)
        cache[key] = result
        if len(cache) > _RETURN_CACHE_SIZE:
            cache.popitem(last=False)
        return result

    def first_return_backward(self, x: Point) -> tuple[float, Point]:
        return self.reversed_system.first_return(x)

    def sample_point(self, rng: np.random.Generator) -> Point:
        return self.flow.sample_point(rng)

    def to_config(self) -> dict:
        cfg = self.flow.to_config()
        cfg["section"] = {
            "g": to_source(self.section),
            "domain": None if self.domain is None else to_source(self.domain),
            "orientation": self.orientation,
        }
        return cfg




# -- operations --------------------------------------------------------------------

def on_section(sys: SectionedFlow, x) -> bool:
    return sys.on_section(x)


def crossing_detect(sys: SectionedFlow, x, t0: float, t1: float) -> list[Crossing]:
    return sys.crossings(x, t0, t1)


def return_time(sys: SectionedFlow, x) -> float:
    return sys.first_return(x)[0]


def poincare_map(sys: SectionedFlow, x):
    return sys.first_return(x)[1]


def poincare_inverse(sys: SectionedFlow, x):
    return sys.first_return_backward(x)[1]


def backward_return_time(sys: SectionedFlow, x) -> float:
    return sys.first_return_backward(x)[0]


def poincare_system(sys: SectionedFlow) -> MapSystem:
    """The first-return map on the section as a map system: the object part of the Poincaré functor."""
    m = sys.__dict__.get("_poincare")
    if m is None:
        m = MapSystem(
            space=sys.space,
            forward=lambda x: sys.first_return(x)[1],
            inverse=lambda x: sys.first_return_backward(x)[1],
            label=f"poincare({sys.label})",
            sampler=sys.sample_section_point,
        )
        sys.__dict__["_poincare"] = m
    return m


def recurrence_check(sys: SectionedFlow, samples: Sequence, horizon: float, seed: int | None = None) -> CheckReport:
    """Every sample must meet the section at some ``t > 0`` and some ``t < 0`` within ``horizon``."""

    def residual(x):
        start = sys.tol.t_min if sys.on_section(x) else 0.0
        if start >= horizon:
            raise RecurrenceError(f"horizon {horizon} is below the minimum return time")
        if not sys.crossings(x, start, horizon, first_only=True):
            raise RecurrenceError(f"no forward crossing within {horizon}")
        if not sys.backward_crossings(x, start, horizon, first_only=True):
            raise RecurrenceError(f"no backward crossing within {horizon}")
        return 0.0

    return run_check(f"recurrence[{sys.label}]", sys.tol.tol_law, samples, residual, seed)


def return_time_partial_sums(sys: SectionedFlow, x, n: int) -> list[float]:
    """Running totals of the return times along the first-return orbit of ``x``, ``n`` of them."""
    if n < 1:
        raise ValueError("n must be positive")
    sums = []
    total = 0.0
    for _ in range(n):
        t, x = sys.first_return(x)
        total += t
        sums.append(total)
    return sums


def transversality_probe(sys: SectionedFlow, x) -> bool:
    """Sign change of the section function across ``x`` with a non-vanishing rate."""
    delta = sys.tol.t_min / 2
    g_plus = sys.section_value(sys.evolve(x, delta))
    g_minus = sys.section_value(sys.evolve(x, -delta))
    if not g_plus * g_minus < 0:
        return False
    rate = abs(g_plus - g_minus) / (2 * delta)
    return rate > sys.tol.tol_space / sys.tol.t_min


def poincare_functor_on_morphism(w, samples: Sequence | None = None, tol: float | None = None, seed: int = 0):
    """Restrict a section-preserving (weak) morphism to the sections.

    Raises :class:`PreconditionError` if ``h`` does not preserve the sections or the
    restricted map fails to conjugate the two Poincaré maps.
    """
    from . import sampling
    from .morphisms import MapMorphism, map_morphism_check, section_preservation_check

    sys1, sys2 = w.source, w.target
    tol = sys1.tol.tol_law if tol is None else tol
    gate = section_preservation_check(w, sys1, sys2, sampling.preservation_samples(sys1, 24, seed), seed=seed)
    if not gate.passed:
        raise PreconditionError(f"{w.label} does not preserve the sections", gate)
    restricted = MapMorphism(poincare_system(sys1), poincare_system(sys2), w.h, label=f"poincare({w.label})")
    if samples is None:
        samples = sampling.section_samples(sys1, 16, seed)
    law = map_morphism_check(restricted, samples, tol, seed=seed)
    if not law.passed:
        raise PreconditionError(f"poincare({w.label}) does not conjugate the Poincaré maps", law)
    return restricted
