"""Experiment reports and their byte-stable JSON / CSV serialization.

Floats are always written with 17 significant digits so that two runs can
be compared byte for byte.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = ["Verdict", "Stat", "ExperimentReport", "dumps", "format_float",
           "SCHEMA_VERSION"]

SCHEMA_VERSION = 1


def format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _plain(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    return obj


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text with 17-significant-digit floats; keys keep insertion order."""
    obj = _plain(obj)
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(_plain(v), (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass(frozen=True)
class Verdict:
    """Outcome of one inequality check ``lhs <relation> rhs``."""

    id: str
    passed: bool
    lhs: float
    rhs: float
    relation: str = "<="

    @property
    def margin(self) -> float:
        # positive margin means the check holds with room to spare
        if self.relation in ("<=", "<"):
            return self.rhs - self.lhs
        if self.relation in (">=", ">"):
            return self.lhs - self.rhs
        return -abs(self.lhs - self.rhs)

    def as_dict(self):
        return {"id": self.id, "passed": self.passed, "lhs": self.lhs,
                "relation": self.relation, "rhs": self.rhs, "margin": self.margin}


def check(id: str, lhs: float, relation: str, rhs: float) -> Verdict:
    ops = {"<=": lambda a, b: a <= b, "<": lambda a, b: a < b,
           ">=": lambda a, b: a >= b, ">": lambda a, b: a > b,
           "==": lambda a, b: a == b}
    return Verdict(id, bool(ops[relation](lhs, rhs)), float(lhs), float(rhs), relation)


@dataclass(frozen=True)
class Stat:
    """A named quantity at one rho: estimate, its error, and reference values."""

    name: str
    estimate: float
    std_error: float | None = None
    exact: float | None = None
    limit: float | None = None
    bound: float | None = None

    def as_dict(self):
        return {k: v for k, v in (
            ("name", self.name), ("estimate", self.estimate),
            ("std_error", self.std_error), ("exact", self.exact),
            ("limit", self.limit), ("bound", self.bound)) if v is not None}


@dataclass
class ExperimentReport:
    experiment: str
    config: dict[str, Any]
    records: list[dict[str, Any]] = field(default_factory=list)
    verdicts: list[Verdict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def n_passed(self) -> int:
        return sum(v.passed for v in self.verdicts)

    @property
    def n_failed(self) -> int:
        return sum(not v.passed for v in self.verdicts)

    def verdict(self, id: str) -> Verdict:
        for v in self.verdicts:
            if v.id == id:
                return v
        raise KeyError(id)

    def stat(self, rho_index: int, name: str) -> Stat:
        for s in self.records[rho_index]["stats"]:
            if s.name == name:
                return s
        raise KeyError(name)

    def as_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "config": self.config,
            "records": [
                {**{k: v for k, v in rec.items() if k != "stats"},
                 "stats": [s.as_dict() for s in rec["stats"]]}
                for rec in self.records
            ],
            "verdicts": [v.as_dict() for v in self.verdicts],
            "summary": {"passed": self.n_passed, "failed": self.n_failed},
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return dumps(self.as_dict()) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["rho", "statistic", "estimate", "std_error", "exact", "limit", "bound"]
        buf.write(",".join(cols) + "\n")
        for rec in self.records:
            rho = rec.get("rho")
            rho_txt = (";".join(format_float(r) for r in rho)
                       if isinstance(rho, (list, tuple)) else format_float(rho))
            for s in rec["stats"]:
                row = [rho_txt, s.name]
                for v in (s.estimate, s.std_error, s.exact, s.limit, s.bound):
                    row.append("" if v is None else format_float(v))
                buf.write(",".join(row) + "\n")
        return buf.getvalue()
