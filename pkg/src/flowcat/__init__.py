"""Flows with global sections, their Poincaré maps, suspensions, and the laws relating them."""

__version__ = "0.1.0"

from .catalog import catalog_get, catalog_names
from .category import (
    R_integral,
    R_integral_inverse,
    counit,
    k_eval,
    k_inverse,
    promote_to_rate_preserving,
    rate_composition_check,
    rate_preserving_check,
    rate_scaling_check,
    tau_eval,
    triangle_identity_1,
    triangle_identity_2,
    unit,
    unit_l,
)
from .errors import FlowcatError
from .expr import evaluate, parse, to_source
from .morphisms import (
    MapMorphism,
    WeakMorphism,
    map_morphism_check,
    section_preservation_check,
    weak_compose,
    weak_morphism_check,
)
from .reports import CheckReport
from .sections import GlobalSectionSystem, poincare_map, poincare_system, return_time
from .spaces import Circle, Line, Point, Space, Tolerances
from .suspension import SuspensionSystem, TorusPoint, suspend_morphism, suspend_system, suspension_eval
from .systems import FlowSystem, MapSystem, check_flow_laws, flow_eval, map_apply, reverse

__all__ = [
    "CheckReport",
    "Circle",
    "FlowSystem",
    "FlowcatError",
    "GlobalSectionSystem",
    "Line",
    "MapMorphism",
    "MapSystem",
    "Point",
    "R_integral",
    "R_integral_inverse",
    "Space",
    "SuspensionSystem",
    "Tolerances",
    "TorusPoint",
    "WeakMorphism",
    "catalog_get",
    "catalog_names",
    "check_flow_laws",
    "counit",
    "evaluate",
    "flow_eval",
    "k_eval",
    "k_inverse",
    "map_apply",
    "map_morphism_check",
    "parse",
    "poincare_map",
    "poincare_system",
    "promote_to_rate_preserving",
    "rate_composition_check",
    "rate_preserving_check",
    "rate_scaling_check",
    "return_time",
    "reverse",
    "section_preservation_check",
    "suspend_morphism",
    "suspend_system",
    "suspension_eval",
    "tau_eval",
    "to_source",
    "triangle_identity_1",
    "triangle_identity_2",
    "unit",
    "unit_l",
    "weak_compose",
    "weak_morphism_check",
]
