"""Coordinate spaces built from lines and circles, points on them, and tolerances."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import ConfigError, DimensionError, NonFiniteError


@dataclass(frozen=True)
class Line:
    """An unbounded real coordinate, optionally with an advisory box ``[lo, hi]``."""

    lo: float | None = None
    hi: float | None = None

    def __post_init__(self):
        if (self.lo is None) != (self.hi is None):
            raise ConfigError("line bounds need both lo and hi")
        if self.lo is not None and not self.lo < self.hi:
            raise ConfigError(f"line bounds need lo < hi, got {self.lo} >= {self.hi}")

    @property
    def bounded(self) -> bool:
        return self.lo is not None


@dataclass(frozen=True)
class Circle:
    period: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.period) and self.period > 0):
            raise ConfigError(f"circle period must be positive, got {self.period}")


CoordKind = Union[Line, Circle]


@dataclass(frozen=True)
class Point:
    """A state vector. Use :meth:`Space.canonicalize` to construct canonical points."""

    values: tuple[float, ...]

    def __iter__(self) -> Iterator[float]:
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    def to_json(self):
        return list(self.values)


@dataclass(frozen=True)
class Space:
    coords: tuple[CoordKind, ...]

    def __post_init__(self):
        if len(self.coords) == 0:
            raise ConfigError("a space needs at least one coordinate")
        object.__setattr__(self, "coords", tuple(self.coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @classmethod
    def of(cls, *coords: CoordKind) -> "Space":
        return cls(tuple(coords))

    def canonicalize(self, raw: Sequence[float]) -> Point:
        vals = tuple(float(v) for v in raw)
        if len(vals) != self.dim:
            raise DimensionError(f"expected {self.dim} coordinates, got {len(vals)}")
        out = []
        for v, c in zip(vals, self.coords):
            if not math.isfinite(v):
                raise NonFiniteError(f"non-finite coordinate {v}")
            if isinstance(c, Circle):
                v = v % c.period
                if v >= c.period:  # -tiny % p rounds up to p
                    v = 0.0
            out.append(v)
        return Point(tuple(out))

    def canonicalize_array(self, raw: np.ndarray) -> np.ndarray:
        """Row-wise canonicalization of an ``(n, dim)`` array."""
        raw = np.array(raw, dtype=float, copy=True)
        if raw.ndim != 2 or raw.shape[1] != self.dim:
            raise DimensionError(f"expected shape (n, {self.dim}), got {raw.shape}")
        if not np.all(np.isfinite(raw)):
            raise NonFiniteError("non-finite coordinate in trajectory")
        for j, c in enumerate(self.coords):
            if isinstance(c, Circle):
                col = np.mod(raw[:, j], c.period)
                col[col >= c.period] = 0.0
                raw[:, j] = col
        return raw

    def _check(self, p: Point) -> None:
        if len(p) != self.dim:
            raise DimensionError(f"point of dimension {len(p)} in a {self.dim}-dimensional space")

    def distance(self, p: Point, q: Point) -> float:
        self._check(p)
        self._check(q)
        total = 0.0
        for a, b, c in zip(p.values, q.values, self.coords):
            d = abs(a - b)
            if isinstance(c, Circle):
                d = d % c.period
                d = min(d, c.period - d)
            total += d * d
        return math.sqrt(total)

    def approx_eq(self, p: Point, q: Point, tol: float) -> bool:
        if not tol > 0:
            raise ValueError("tol must be positive")
        return self.distance(p, q) <= tol

    def out_of_bounds(self, p: Point) -> list[int]:
        """Indices of bounded line coordinates lying outside their box."""
        bad = []
        for i, (v, c) in enumerate(zip(p.values, self.coords)):
            if isinstance(c, Line) and c.bounded and not (c.lo <= v <= c.hi):
                bad.append(i)
        return bad

    def sample(self, rng: np.random.Generator) -> Point:
        raw = []
        for c in self.coords:
            if isinstance(c, Circle):
                raw.append(rng.uniform(0.0, c.period))
            elif c.bounded:
                raw.append(rng.uniform(c.lo, c.hi))
            else:
                raise ConfigError("cannot sample an unbounded line coordinate; give it lo/hi")
        return self.canonicalize(raw)

    def point_to_json(self, p: Point):
        return p.to_json()

    def point_from_json(self, data) -> Point:
        if not isinstance(data, (list, tuple)):
            raise ConfigError(f"expected a list of coordinates, got {data!r}")
        return self.canonicalize(data)

    def to_dict(self) -> dict:
        out = []
        for c in self.coords:
            if isinstance(c, Circle):
                out.append({"kind": "circle", "period": c.period})
            elif c.bounded:
                out.append({"kind": "line", "lo": c.lo, "hi": c.hi})
            else:
                out.append({"kind": "line"})
        return {"coords": out}

    @classmethod
    def from_dict(cls, data: dict) -> "Space":
        try:
            raw = data["coords"]
        except (KeyError, TypeError):
            raise ConfigError("space descriptor needs a 'coords' list") from None
        coords: list[CoordKind] = []
        for entry in raw:
            kind = entry.get("kind") if isinstance(entry, dict) else None
            if kind == "circle":
                coords.append(Circle(float(entry.get("period", 1.0))))
            elif kind == "line":
                lo, hi = entry.get("lo"), entry.get("hi")
                coords.append(Line(None if lo is None else float(lo), None if hi is None else float(hi)))
            else:
                raise ConfigError(f"unknown coordinate kind in {entry!r}")
        return cls(tuple(coords))


@dataclass(frozen=True)
class Tolerances:
    """Numerical policy for every check.

    ``t_min`` is the smallest admissible return time and also the half-width
    used by the transversality probe.
    """

    tol_space: float = 1e-8
    tol_time: float = 1e-10
    tol_law: float = 1e-6
    t_min: float = 1e-4
    max_horizon: float = 1e3
    dt: float = 1e-2

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"tolerance {f.name} must be positive and finite, got {v}")
        if not self.t_min > self.tol_time:
            raise ConfigError("t_min must exceed tol_time")
        if not self.dt < self.max_horizon:
            raise ConfigError("dt must be smaller than max_horizon")

    def override(self, **changes) -> "Tolerances":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


DEFAULT_TOLERANCES = Tolerances()
