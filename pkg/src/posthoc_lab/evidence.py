"""The ordered evidence space of decisions.

A decision is either a non-rejection or a rejection at some level. Smaller
levels are stronger, so the order is the order of the numeric representation
``0`` for non-rejection and ``1/level`` for a rejection.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Mapping

from .backend import INF, close, format_number, is_exact, reciprocal, to_number

NONREJECT = "nonreject"
REJECT = "reject"


@functools.total_ordering
@dataclass(frozen=True, eq=False)
class Decision:
    """An element of the evidence space.

    ``level`` is ``None`` for a non-rejection. Rejection levels are positive;
    level 0 stands for rejecting at every level (infinite evidence).
    """

    kind: str
    level: object = None

    def __post_init__(self):
        if self.kind == NONREJECT:
            if self.level is not None:
                raise ValueError("a non-rejection has no level")
        elif self.kind == REJECT:
            if self.level is None or self.level < 0 or (isinstance(self.level, float) and math.isnan(self.level)):
                raise ValueError(f"invalid rejection level {self.level!r}")
        else:
            raise ValueError(f"unknown decision kind {self.kind!r}")

    @property
    def rejects(self) -> bool:
        return self.kind == REJECT

    def __eq__(self, other) -> bool:
        if not isinstance(other, Decision):
            return NotImplemented
        return compare(self, other) == 0

    def __lt__(self, other) -> bool:
        if not isinstance(other, Decision):
            return NotImplemented
        return compare(self, other) < 0

    def __hash__(self) -> int:
        return hash((self.kind, float(self.level) if self.level is not None else None))

    def __repr__(self) -> str:
        return "NonReject" if self.kind == NONREJECT else f"RejectAt({self.level})"

    def to_json(self) -> dict:
        if self.kind == NONREJECT:
            return {"kind": NONREJECT}
        return {"kind": REJECT, "level": format_number(self.level)}

    @classmethod
    def from_json(cls, data: Mapping, backend: str = "rational") -> "Decision":
        if data["kind"] == NONREJECT:
            return NON_REJECT
        return reject_at(to_number(data["level"], backend))


NON_REJECT = Decision(NONREJECT)


def reject_at(level) -> Decision:
    return Decision(REJECT, level)


def numeric_rep(d: Decision):
    """0 for a non-rejection, ``1/level`` for a rejection (``inf`` at level 0)."""
    if d.kind == NONREJECT:
        return 0
    return reciprocal(d.level)


def compare(d1: Decision, d2: Decision) -> int:
    """Three-way comparison: -1, 0 or 1.

    Level equality is exact for rationals and within 1e-12 for doubles.
    """
    if d1.kind == NONREJECT or d2.kind == NONREJECT:
        return (d1.kind == REJECT) - (d2.kind == REJECT)
    a, b = d1.level, d2.level
    if a == b or (not (is_exact(a) and is_exact(b)) and close(a, b)):
        return 0
    # smaller level means stronger decision
    return 1 if a < b else -1


def from_numeric(value) -> Decision:
    """Inverse of :func:`numeric_rep` on ``{0} U (0, inf]``."""
    if value == 0:
        return NON_REJECT
    if value == INF:
        return reject_at(0)
    return reject_at(reciprocal(value))
