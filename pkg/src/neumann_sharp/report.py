"""Result records shared by the geometry and bounds modules."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

RELATIONS = ("<", "<=", ">", ">=")


def fmt(x: Any) -> Any:
    """Round floats to 12 significant digits for reproducible text output."""
    if isinstance(x, float):
        if math.isfinite(x):
            return float(f"{x:.12g}")
        return repr(x)
    if isinstance(x, dict):
        return {k: fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [fmt(v) for v in x]
    return x


def signed_margin(lhs: float, rhs: float, relation: str) -> float:
    """Distance by which ``lhs relation rhs`` holds; negative when violated."""
    if relation in ("<", "<="):
        return rhs - lhs
    if relation in (">", ">="):
        return lhs - rhs
    raise ValueError(f"unknown relation {relation!r}")


def decide(margin: float, relation: str, tol: float = 0.0) -> bool:
    """Pass rule: strict relations need ``margin > tol``, weak ones ``margin >= -tol``."""
    if relation in ("<", ">"):
        return margin > tol
    if relation in ("<=", ">="):
        return margin >= -tol
    raise ValueError(f"unknown relation {relation!r}")


@dataclass(frozen=True)
class BoundReport:
    """One checked inequality instance ``lhs relation rhs``.

    ``tol`` is the declared tolerance. For strict relations it is the margin
    the check must exceed; for weak relations it is the slack allowed below
    zero. ``passed`` is always recomputed from the other fields.
    """

    id: str
    lhs: float
    rhs: float
    relation: str
    tol: float = 0.0
    context: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")

    @property
    def margin(self) -> float:
        return signed_margin(self.lhs, self.rhs, self.relation)

    @property
    def passed(self) -> bool:
        return decide(self.margin, self.relation, self.tol)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "relation": self.relation,
            "margin": self.margin,
            "tol": self.tol,
            "pass": self.passed,
            "context": self.context,
        }

    def to_json(self) -> str:
        return json.dumps(fmt(self.to_dict()), sort_keys=True)

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"[{verdict}] {self.id}: {self.lhs:.8g} {self.relation} {self.rhs:.8g} "
                f"(margin {self.margin:.3g})")


def reports_to_jsonl(reports) -> str:
    return "".join(r.to_json() + "\n" for r in reports)


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "lhs", "relation", "rhs", "margin", "tol", "pass"])
    for r in reports:
        w.writerow([r.id, fmt(r.lhs), r.relation, fmt(r.rhs), fmt(r.margin), fmt(r.tol),
                    int(r.passed)])
    return buf.getvalue()


@dataclass
class SweepTable:
    """Rows of ``(parameter, value, limit, gap, *extra)`` ordered by parameter."""

    parameter: str
    rows: list = field(default_factory=list)
    extra_columns: tuple = ()
    flags: dict = field(default_factory=dict)
    context: dict = field(default_factory=dict)

    @property
    def params(self) -> list:
        return [r[0] for r in self.rows]

    @property
    def values(self) -> list:
        return [r[1] for r in self.rows]

    @property
    def ok(self) -> bool:
        return all(self.flags.values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([self.parameter, "value", "limit", "gap", *self.extra_columns])
        for row in self.rows:
            w.writerow([fmt(float(x)) if isinstance(x, float) else x for x in row])
        return buf.getvalue()
