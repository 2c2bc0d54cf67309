"""Residual reports produced by every law checker."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from .errors import FlowcatError


@dataclass
class CheckReport:
    name: str
    tol: float
    samples_used: int = 0
    max_residual: float = 0.0
    failures: list[tuple[Any, float]] = field(default_factory=list)
    seed: int | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and self.max_residual <= self.tol

    def record(self, sample: Any, residual: float) -> None:
        self.samples_used += 1
        if math.isnan(residual):
            residual = math.inf
        self.max_residual = max(self.max_residual, residual)
        if residual > self.tol:
            self.failures.append((sample, residual))

    def record_error(self, sample: Any, exc: Exception) -> None:
        self.samples_used += 1
        self.max_residual = math.inf
        self.failures.append((sample, math.inf))
        self.notes.append(f"{type(exc).__name__}: {exc}")

    def fail(self, sample: Any, residual: float, note: str) -> None:
        """Record a failure that is not expressed by the residual alone."""
        self.failures.append((sample, residual))
        self.notes.append(note)

    def merge(self, other: "CheckReport") -> "CheckReport":
        """Fold ``other`` into this report (in place) and return ``self``."""
        self.samples_used += other.samples_used
        self.max_residual = max(self.max_residual, other.max_residual)
        self.failures.extend(other.failures)
        self.notes.extend(other.notes)
        return self

    def to_dict(self, sample_to_json: Callable[[Any], Any] | None = None, max_failures: int = 20) -> dict:
        enc = sample_to_json or _jsonable
        return {
            "name": self.name,
            "pass": self.passed,
            "tol": self.tol,
            "samples_used": self.samples_used,
            "max_residual": _json_float(self.max_residual),
            "failure_count": len(self.failures),
            "failures": [
                {"sample": enc(s), "residual": _json_float(r)} for s, r in self.failures[:max_failures]
            ],
            "notes": list(dict.fromkeys(self.notes))[:max_failures],
            "seed": self.seed,
        }

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.name}: max residual {self.max_residual:.3e} "
            f"(tol {self.tol:.1e}, {self.samples_used} samples)"
        )


def _json_float(x: float):
    if math.isinf(x):
        return "inf"
    if math.isnan(x):
        return "nan"
    return x


def _jsonable(obj: Any):
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, (list, tuple)):
        return [_jsonable(o) for o in obj]
    if isinstance(obj, float):
        return _json_float(obj)
    return obj


def run_check(
    name: str,
    tol: float,
    samples: Iterable[Any],
    residual: Callable[[Any], float],
    seed: int | None = None,
) -> CheckReport:
    """Evaluate ``residual`` on every sample; evaluation errors become failures."""
    report = CheckReport(name=name, tol=tol, seed=seed)
    for s in samples:
        try:
            r = residual(s)
        except (FlowcatError, ArithmeticError, ValueError) as exc:
            report.record_error(s, exc)
        else:
            report.record(s, r)
    return report
