"""Seeded sample generators for the law checkers."""

from __future__ import annotations

import numpy as np

NEAR_OFFSET = 1e-3


def rng_for(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


def section_samples(sys, n: int, seed: int | None = 0) -> list:
    rng = rng_for(seed)
    return [sys.sample_section_point(rng) for _ in range(n)]


def space_samples(sys, n: int, seed: int | None = 0) -> list:
    rng = rng_for(seed)
    return [sys.sample_point(rng) for _ in range(n)]


def map_samples(m, n: int, seed: int | None = 0) -> list:
    rng = rng_for(seed)
    return [m.sample(rng) for _ in range(n)]


def flow_law_samples(sys, n: int, seed: int | None = 0, t_range: float = 3.0) -> list:
    """``(x, s, t)`` triples with times uniform in ``[-t_range, t_range]``."""
    rng = rng_for(seed)
    out = []
    for _ in range(n):
        x = sys.sample_point(rng)
        s, t = rng.uniform(-t_range, t_range, size=2)
        out.append((x, float(s), float(t)))
    return out


def weak_samples(sys, n: int, seed: int | None = 0, t_range: float = 3.0) -> list:
    rng = rng_for(seed)
    return [(sys.sample_point(rng), float(rng.uniform(-t_range, t_range))) for _ in range(n)]


def preservation_samples(sys, n: int, seed: int | None = 0) -> list:
    """Points on the section, just off it along the flow, and generic points."""
    rng = rng_for(seed)
    k = max(1, n // 3)
    on = [sys.sample_section_point(rng) for _ in range(k)]
    near = [sys.evolve(x, NEAR_OFFSET if i % 2 == 0 else -NEAR_OFFSET) for i, x in enumerate(on)]
    off = [sys.sample_point(rng) for _ in range(max(1, n - 2 * k))]
    return on + near + off


def torus_samples(sys, n: int, seed: int | None = 0, s_range: float = 3.0) -> list:
    """``(x, t, s)``: ``x`` on the section, height ``t`` in ``[0, 1)``, time ``s``."""
    rng = rng_for(seed)
    out = []
    for _ in range(n):
        x = sys.sample_section_point(rng)
        out.append((x, float(rng.uniform(0.0, 1.0)), float(rng.uniform(-s_range, s_range))))
    return out


def base_torus_samples(m, n: int, seed: int | None = 0, s_range: float = 3.0) -> list:
    """``(x, t, s)`` with ``x`` drawn from a map system's space."""
    rng = rng_for(seed)
    out = []
    for _ in range(n):
        x = m.sample(rng)
        out.append((x, float(rng.uniform(0.0, 1.0)), float(rng.uniform(-s_range, s_range))))
    return out
