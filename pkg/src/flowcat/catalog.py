"""Built-in example systems, addressable by name with validated parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .errors import CatalogError, ConfigError
from .sections import GlobalSectionSystem
from .spaces import Circle, Line, Space
from .systems import FlowSystem, MapSystem

ANNULUS_BOX = Space.of(Line(-2.0, 2.0), Line(-2.0, 2.0))
ANNULUS_DOMAIN = "min(x1^2 + x2^2 - 1, 4 - x1^2 - x2^2)"
# the positive real segment 1 < x < 2
SEGMENT = ("x2", "x1")

ROTATION = ("x1*cos(omega*t) - x2*sin(omega*t)", "x1*sin(omega*t) + x2*cos(omega*t)")
RADIAL = (
    "x1*cos(sqrt(x1^2 + x2^2)*t) - x2*sin(sqrt(x1^2 + x2^2)*t)",
    "x1*sin(sqrt(x1^2 + x2^2)*t) + x2*cos(sqrt(x1^2 + x2^2)*t)",
)


@dataclass(frozen=True)
class Param:
    default: float
    lo: float
    hi: float
    doc: str = ""


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    kind: str  # "map", "flow" or "sectioned"
    doc: str
    build: Callable[[dict], object]
    params: Mapping[str, Param] = field(default_factory=dict)

    def resolve(self, given: Mapping[str, float] | None) -> dict:
        given = dict(given or {})
        unknown = set(given) - set(self.params)
        if unknown:
            raise ConfigError(f"{self.name} has no parameter(s) {sorted(unknown)}")
        out = {}
        for key, param in self.params.items():
            value = float(given.get(key, param.default))
            if not (math.isfinite(value) and param.lo <= value <= param.hi):
                raise ConfigError(f"{self.name}: {key}={value} outside [{param.lo}, {param.hi}]")
            out[key] = value
        return out

    def describe(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "doc": self.doc,
            "params": {k: {"default": p.default, "range": [p.lo, p.hi], "doc": p.doc} for k, p in self.params.items()},
        }


def _label(name: str, params: dict) -> str:
    if not params:
        return name
    return f"{name}(" + ", ".join(f"{k}={v:g}" for k, v in params.items()) + ")"


def _circle_rotation(p):
    return MapSystem.from_exprs(Space.of(Circle(1.0)), ["x1 + alpha"], ["x1 - alpha"], p,
                                label=_label("circle_rotation", p))


def _interval_identity(p):
    return MapSystem.from_exprs(Space.of(Line(1.0, 2.0)), ["x1"], ["x1"], label="interval_identity")


def _interval_square(p):
    return MapSystem.from_exprs(Space.of(Line(1.0, 2.0)), ["1 + (x1 - 1)^2"], ["1 + sqrt(x1 - 1)"],
                                label="interval_square")


def _annulus(name, exprs, params, omega_label=True):
    flow = FlowSystem.closed_form(ANNULUS_BOX, exprs, params=params, domain=ANNULUS_DOMAIN,
                                  label=_label(name, params) if omega_label else name)
    return GlobalSectionSystem(flow, SEGMENT[0], SEGMENT[1], label=flow.label)


def _annulus_rotation(p):
    return _annulus("annulus_rotation", ROTATION, p)


def _annulus_phi1(p):
    return _annulus("annulus_phi1", ROTATION, {"omega": math.pi}, omega_label=False)


def _annulus_phi2(p):
    return _annulus("annulus_phi2", ROTATION, {"omega": 2 * math.pi}, omega_label=False)


def _annulus_radial_speed(p):
    return _annulus("annulus_radial_speed", RADIAL, {}, omega_label=False)


def _annulus_rotation_ode(p):
    step = p["step"]
    params = {"omega": p["omega"]}
    flow = FlowSystem.ode(ANNULUS_BOX, ["-omega*x2", "omega*x1"], step=step, params=params,
                          domain=ANNULUS_DOMAIN, label=_label("annulus_rotation_ode", p))
    return GlobalSectionSystem(flow, SEGMENT[0], SEGMENT[1], label=flow.label)


def _plane_tangent(p):
    box = Space.of(Line(-100.0, 100.0), Line(-100.0, 100.0))
    flow = FlowSystem.closed_form(box, ["x1 + t", "x2"], label="plane_tangent")
    return GlobalSectionSystem(flow, "x2", label="plane_tangent")


def _broken_flow(p):
    return FlowSystem.closed_form(Space.of(Line(-100.0, 100.0)), ["x1 + t^2"], label="broken_flow")


_ENTRIES = [
    CatalogEntry("circle_rotation", "map", "rotation of the unit circle by alpha", _circle_rotation,
                 {"alpha": Param(0.1, -1.0, 1.0, "rotation amount")}),
    CatalogEntry("interval_identity", "map", "identity of the interval (1, 2)", _interval_identity),
    CatalogEntry("interval_square", "map", "x -> 1 + (x - 1)^2 on the interval (1, 2)", _interval_square),
    CatalogEntry("annulus_rotation", "sectioned",
                 "rigid rotation of the annulus 1 < |z| < 2 at angular speed omega; section on the positive real axis",
                 _annulus_rotation, {"omega": Param(math.pi, 0.1, 50.0, "angular speed")}),
    CatalogEntry("annulus_phi1", "sectioned", "z -> z exp(i pi t) on the annulus; return time 2", _annulus_phi1),
    CatalogEntry("annulus_phi2", "sectioned", "z -> z exp(2 i pi t) on the annulus; return time 1", _annulus_phi2),
    CatalogEntry("annulus_radial_speed", "sectioned",
                 "rotation at angular speed |z|; return time 2 pi / |z|", _annulus_radial_speed),
    CatalogEntry("annulus_rotation_ode", "sectioned",
                 "the rigid-rotation field (-omega y, omega x) integrated with RK4", _annulus_rotation_ode,
                 {"omega": Param(2 * math.pi, 0.1, 50.0, "angular speed"),
                  "step": Param(1e-3, 1e-5, 0.1, "RK4 step")}),
    CatalogEntry("plane_tangent", "sectioned",
                 "negative example: translation along a line that is tangent to its section", _plane_tangent),
    CatalogEntry("broken_flow", "flow", "negative example: x -> x + t^2 violates the group law", _broken_flow),
]

CATALOG: dict[str, CatalogEntry] = {e.name: e for e in _ENTRIES}
SUSPENDED_PREFIX = "suspended_"

MAP_SYSTEMS = tuple(e.name for e in _ENTRIES if e.kind == "map")
SECTIONED_SYSTEMS = ("annulus_phi1", "annulus_phi2", "annulus_radial_speed", "annulus_rotation", "annulus_rotation_ode")
NEGATIVE_EXAMPLES = ("plane_tangent", "broken_flow")


def catalog_names() -> list[str]:
    return list(CATALOG) + [SUSPENDED_PREFIX + n for n in MAP_SYSTEMS]


def catalog_entries() -> list[dict]:
    out = [e.describe() for e in _ENTRIES]
    for name in MAP_SYSTEMS:
        base = CATALOG[name].describe()
        out.append({**base, "name": SUSPENDED_PREFIX + name, "kind": "sectioned",
                    "doc": f"suspension flow of {name}"})
    return out


def catalog_get(name: str, params: Mapping[str, float] | None = None):
    """Build a catalog system: a map system, a flow, or a flow with its global section."""
    if name.startswith(SUSPENDED_PREFIX) and name[len(SUSPENDED_PREFIX):] in MAP_SYSTEMS:
        from .suspension import suspend_system

        return suspend_system(catalog_get(name[len(SUSPENDED_PREFIX):], params))
    entry = CATALOG.get(name)
    if entry is None:
        raise CatalogError(f"unknown catalog system {name!r}; known: {', '.join(catalog_names())}")
    return entry.build(entry.resolve(params))
