"""Map dynamical systems and flows, in closed form or integrated with RK4."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping, Sequence, Union

import numpy as np

from .errors import ConfigError, DimensionError, OrbitError
from .expr import Expression, build_function, compile_expr, free_variables, parse, python_source, to_source
from .reports import CheckReport, run_check
from .spaces import Line, Point, Space

MAX_REJECTIONS = 100_000


def coord_names(dim: int) -> list[str]:
    return [f"x{i + 1}" for i in range(dim)]


def _as_exprs(sources: Sequence[str | Expression]) -> tuple[Expression, ...]:
    return tuple(parse(s) if isinstance(s, str) else s for s in sources)


def _check_names(exprs: Sequence[Expression], allowed: set[str], what: str) -> None:
    for e in exprs:
        extra = free_variables(e) - allowed
        if extra:
            raise ConfigError(f"{what} uses unknown variable(s) {sorted(extra)}")


def compile_point_map(
    sources: Sequence[str | Expression],
    in_dim: int,
    target: Space,
    params: Mapping[str, float] | None = None,
) -> Callable[[Point], Point]:
    """Compile per-coordinate expressions in ``x1..xn`` into a map onto ``target``."""
    exprs = _as_exprs(sources)
    if len(exprs) != target.dim:
        raise DimensionError(f"{len(exprs)} expressions for a {target.dim}-dimensional target")
    params = dict(params or {})
    names = coord_names(in_dim)
    _check_names(exprs, set(names) | set(params), "map")
    fns = [compile_expr(e, names, params) for e in exprs]

    def apply(p: Point) -> Point:
        if len(p) != in_dim:
            raise DimensionError(f"expected a {in_dim}-dimensional point, got {len(p)}")
        vals = p.values
        return target.canonicalize([f(*vals) for f in fns])

    return apply


def compile_time_map(
    source: str | Expression, in_dim: int, params: Mapping[str, float] | None = None
) -> Callable[[Point, float], float]:
    """Compile a reparametrization expression in ``x1..xn`` and ``t``."""
    (e,) = _as_exprs([source])
    params = dict(params or {})
    names = coord_names(in_dim) + ["t"]
    _check_names([e], set(names) | set(params), "time reparametrization")
    fn = compile_expr(e, names, params)
    return lambda p, t: fn(*p.values, t)


# -- map systems ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MapSystem:
    """A homeomorphism ``forward`` of ``space`` with its inverse.

    ``space`` is anything exposing ``canonicalize``/``distance``/``sample``; for
    Poincaré maps it is the ambient space of the section, and ``sampler``
    draws points of the section itself.
    """

    space: Any
    forward: Callable[[Any], Any]
    inverse: Callable[[Any], Any]
    label: str | None = None
    sampler: Callable[[np.random.Generator], Any] | None = None
    source: dict | None = None

    @classmethod
    def from_exprs(
        cls,
        space: Space,
        forward: Sequence[str],
        inverse: Sequence[str],
        params: Mapping[str, float] | None = None,
        label: str | None = None,
    ) -> "MapSystem":
        params = dict(params or {})
        return cls(
            space=space,
            forward=compile_point_map(forward, space.dim, space, params),
            inverse=compile_point_map(inverse, space.dim, space, params),
            label=label,
            source={
                "space": space.to_dict(),
                "kind": "map",
                "exprs": [s if isinstance(s, str) else to_source(s) for s in forward],
                "inverse_exprs": [s if isinstance(s, str) else to_source(s) for s in inverse],
                "params": params,
            },
        )

    def sample(self, rng: np.random.Generator):
        if self.sampler is not None:
            return self.sampler(rng)
        return self.space.sample(rng)

    def distance(self, p, q) -> float:
        return self.space.distance(p, q)


def map_apply(m: MapSystem, x, n: int = 1):
    """``f^n(x)``; negative ``n`` iterates the inverse."""
    if int(n) != n:
        raise ValueError(f"iterate count must be an integer, got {n}")
    n = int(n)
    step = m.forward if n >= 0 else m.inverse
    for _ in range(abs(n)):
        x = step(x)
    return x


def check_map_laws(m: MapSystem, samples: Sequence, tol: float, seed: int | None = None) -> CheckReport:
    """Sampled homeomorphism check: ``f(f^-1(x))`` and ``f^-1(f(x))`` both return ``x``."""

    def residual(x):
        d = m.space.distance
        return max(d(m.forward(m.inverse(x)), x), d(m.inverse(m.forward(x)), x))

    return run_check(f"map-homeomorphism[{m.label}]", tol, samples, residual, seed)


# -- flows -----------------------------------------------------------------------

@dataclass(frozen=True)
class ClosedForm:
    """The flow given per coordinate as expressions in ``x1..xn`` and ``t``."""

    exprs: tuple[Expression, ...]


@dataclass(frozen=True)
class ODE:
    """Autonomous vector field in ``x1..xn``, integrated with fixed-step RK4."""

    field: tuple[Expression, ...]
    step: float = 1e-3


FlowLaw = Union[ClosedForm, ODE]


@dataclass(frozen=True, eq=False)
class FlowSystem:
    space: Space
    law: FlowLaw
    params: Mapping[str, float] = field(default_factory=dict)
    domain: Expression | None = None
    label: str | None = None
    reversed: bool = False
    _fns: Any = field(init=False, repr=False, compare=False, default=None)
    _vfns: Any = field(init=False, repr=False, compare=False, default=None)
    _dom: Any = field(init=False, repr=False, compare=False, default=None)
    _stepper: Any = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "params", dict(self.params))
        names = coord_names(self.space.dim)
        allowed = set(names) | set(self.params)
        if isinstance(self.law, ClosedForm):
            exprs = self.law.exprs
            _check_names(exprs, allowed | {"t"}, "closed-form flow")
            fns = [compile_expr(e, names + ["t"], self.params) for e in exprs]
            vfns = [compile_expr(e, names + ["t"], self.params, vector=True) for e in exprs]
        elif isinstance(self.law, ODE):
            exprs = self.law.field
            if not (math.isfinite(self.law.step) and self.law.step > 0):
                raise ConfigError(f"ODE step must be positive, got {self.law.step}")
            _check_names(exprs, allowed, "vector field")
            fns = [compile_expr(e, names, self.params) for e in exprs]
            vfns = None
            object.__setattr__(self, "_stepper", _rk4_stepper(exprs, names, self.params))
        else:
            raise ConfigError(f"unknown flow law {self.law!r}")
        if len(exprs) != self.space.dim:
            raise DimensionError(f"{len(exprs)} expressions for a {self.space.dim}-dimensional space")
        object.__setattr__(self, "_fns", fns)
        object.__setattr__(self, "_vfns", vfns)
        if self.domain is not None:
            _check_names([self.domain], allowed, "domain predicate")
            object.__setattr__(self, "_dom", compile_expr(self.domain, names, self.params))

    @classmethod
    def closed_form(cls, space: Space, exprs: Sequence[str], **kw) -> "FlowSystem":
        return cls(space, ClosedForm(_as_exprs(exprs)), **_domain_kw(kw))

    @classmethod
    def ode(cls, space: Space, field_exprs: Sequence[str], step: float = 1e-3, **kw) -> "FlowSystem":
        return cls(space, ODE(_as_exprs(field_exprs), step), **_domain_kw(kw))

    def in_domain(self, x: Point) -> bool:
        if self.space.out_of_bounds(x):
            return False
        return self._dom is None or self._dom(*x.values) > 0

    def sample_point(self, rng: np.random.Generator) -> Point:
        """Uniform draw from the box, rejected until it lands in the domain."""
        for _ in range(MAX_REJECTIONS):
            p = self.space.sample(rng)
            if self.in_domain(p):
                return p
        raise ConfigError(f"could not sample a point in the domain of {self.label}")

    def _bounds_check(self, p: Point, x: Point, t: float) -> Point:
        bad = self.space.out_of_bounds(p)
        if bad:
            raise OrbitError(f"orbit of {list(x.values)} left the box in coordinate(s) {bad} at t={t}")
        return p

    def evolve(self, x: Point, t: float) -> Point:
        """The state at time ``t`` starting from ``x``."""
        if len(x) != self.space.dim:
            raise DimensionError(f"expected a {self.space.dim}-dimensional point, got {len(x)}")
        if not math.isfinite(t):
            raise ValueError(f"time must be finite, got {t}")
        s = -t if self.reversed else t
        if isinstance(self.law, ClosedForm):
            vals = x.values
            p = self.space.canonicalize([f(*vals, s) for f in self._fns])
        else:
            p = self.space.canonicalize(self._rk4(list(x.values), s))
        return self._bounds_check(p, x, t)

    def state_values(self, values: tuple[float, ...], t: float) -> tuple[float, ...]:
        """Raw coordinates at time ``t``: no bounds check, circle coordinates unwrapped.

        For hot loops such as crossing refinement; use :meth:`evolve` elsewhere.
        """
        s = -t if self.reversed else t
        if isinstance(self.law, ClosedForm):
            return tuple([f(*values, s) for f in self._fns])
        if s == 0:
            return tuple(values)
        return self._stepper(*values, s, max(1, math.ceil(abs(s) / self.law.step - 1e-9)))

    def _rk4(self, y: list[float], t: float) -> list[float]:
        if t == 0:
            return y
        n = max(1, math.ceil(abs(t) / self.law.step - 1e-9))
        return list(self._stepper(*y, t, n))

    def trajectory(self, x: Point, offsets: np.ndarray) -> np.ndarray:
        """States at increasing offsets ``o`` from ``x``, as an ``(n, dim)`` array."""
        offsets = np.asarray(offsets, dtype=float)
        if isinstance(self.law, ClosedForm):
            s = -offsets if self.reversed else offsets
            cols = [np.broadcast_to(np.asarray(f(*x.values, s), dtype=float), s.shape) for f in self._vfns]
            arr = np.stack(cols, axis=1)
        else:
            # integrate segment by segment without canonicalizing in between
            sign = -1.0 if self.reversed else 1.0
            step, stepper = self.law.step, self._stepper
            rows = []
            y, prev = x.values, 0.0
            for o in offsets.tolist():
                d = sign * (o - prev)
                if d != 0:
                    y = stepper(*y, d, max(1, math.ceil(abs(d) / step - 1e-9)))
                rows.append(y)
                prev = o
            arr = np.array(rows, dtype=float).reshape(len(offsets), self.space.dim)
        arr = self.space.canonicalize_array(arr)
        for j, c in enumerate(self.space.coords):
            if isinstance(c, Line) and c.bounded:
                col = arr[:, j]
                if np.any((col < c.lo) | (col > c.hi)):
                    raise OrbitError(f"orbit of {list(x.values)} left the box in coordinate {j}")
        return arr

    def to_config(self) -> dict:
        law = self.law
        cfg = {
            "space": self.space.to_dict(),
            "kind": "flow-closed" if isinstance(law, ClosedForm) else "flow-ode",
            "exprs": [to_source(e) for e in (law.exprs if isinstance(law, ClosedForm) else law.field)],
            "params": dict(self.params),
        }
        if isinstance(law, ODE):
            cfg["step"] = law.step
        if self.domain is not None:
            cfg["domain"] = to_source(self.domain)
        if self.reversed:
            cfg["reversed"] = True
        return cfg


def _rk4_stepper(field_exprs: Sequence[Expression], names: list[str], params: Mapping[str, float]):
    """Generate ``(y..., t, n) -> y(t)``: ``n`` classical RK4 steps of size ``t / n``, unrolled per coordinate."""
    dim = len(names)
    ys = [f"y{i}" for i in range(dim)]

    def stage(k: int, arg: list[str]) -> list[str]:
        env = dict(zip(names, arg))
        return [f"        k{k}_{i} = {python_source(e, env, params)}" for i, e in enumerate(field_exprs)]

    lines = [f"def _generated({', '.join(ys)}, t, n):",
             "    h = t / n", "    half = 0.5 * h", "    sixth = h / 6.0", "    for _ in range(n):"]
    lines += stage(1, ys)
    lines += stage(2, [f"({y} + half * k1_{i})" for i, y in enumerate(ys)])
    lines += stage(3, [f"({y} + half * k2_{i})" for i, y in enumerate(ys)])
    lines += stage(4, [f"({y} + h * k3_{i})" for i, y in enumerate(ys)])
    lines += [f"        {y} = {y} + sixth * (k1_{i} + 2.0 * k2_{i} + 2.0 * k3_{i} + k4_{i})" for i, y in enumerate(ys)]
    finite = " and ".join(f"_isfinite({y})" for y in ys)
    lines += [f"    if not ({finite}):", "        raise _DomainError('non-finite RK4 state', t)",
              f"    return ({', '.join(ys)},)"]
    return build_function("\n".join(lines) + "\n", "rk4")


def _domain_kw(kw: dict) -> dict:
    if isinstance(kw.get("domain"), str):
        kw["domain"] = parse(kw["domain"])
    return kw


def flow_eval(fl, x, t: float):
    return fl.evolve(x, t)


def reverse(fl: FlowSystem) -> FlowSystem:
    """The time-reversed flow ``(x, t) -> evolve(x, -t)``."""
    label = None
    if fl.label is not None:
        label = fl.label[:-len("~rev")] if fl.label.endswith("~rev") else fl.label + "~rev"
    return replace(fl, reversed=not fl.reversed, label=label)


def check_flow_laws(fl, samples: Sequence[tuple[Any, float, float]], tol: float, seed: int | None = None) -> CheckReport:
    """Identity and group-law residuals of any flow-like object over ``(x, s, t)`` samples.

    ``fl`` needs ``evolve`` and ``space``; systems with a section qualify too.
    """
    if not samples:
        raise ValueError("check_flow_laws needs at least one sample")
    d = fl.space.distance

    def residual(sample):
        x, s, t = sample
        r_id = d(fl.evolve(x, 0.0), x)
        r_group = d(fl.evolve(fl.evolve(x, t), s), fl.evolve(x, t + s))
        return max(r_id, r_group)

    return run_check(f"flow-laws[{getattr(fl, 'label', None)}]", tol, samples, residual, seed)
