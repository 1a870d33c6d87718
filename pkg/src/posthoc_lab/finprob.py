"""Exact probability on finite sample spaces.

A :class:`FiniteSpace` carries outcomes and their masses; a
:class:`RandomVariable` assigns an extended nonnegative (or general real) value
to every outcome. Masses and values may be ``Fraction`` (exact) or ``float``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping

from .backend import (
    DOUBLE,
    DOUBLE_TOL,
    RATIONAL,
    div,
    exact_sum,
    format_number,
    is_exact,
    mul,
    to_number,
)


class SpaceMismatchError(ValueError):
    """Objects defined on different sample spaces were combined."""


class ZeroMassCellWarning(UserWarning):
    """A conditioning cell had zero probability and was dropped."""


@dataclass(frozen=True, eq=False)
class FiniteSpace:
    """Finite sample space with a probability mass function.

    ``masses[i]`` is the probability of ``outcomes[i]``.
    """

    outcomes: tuple
    masses: tuple

    def __init__(self, outcomes: Iterable[Hashable], masses: Iterable | Mapping, backend: str | None = None):
        outcomes = tuple(outcomes)
        if isinstance(masses, Mapping):
            masses = [masses[o] for o in outcomes]
        masses = list(masses)
        if backend is not None:
            masses = [to_number(m, backend) for m in masses]
        if len(masses) != len(outcomes):
            raise ValueError("outcomes and masses differ in length")
        if not outcomes:
            raise ValueError("a sample space needs at least one outcome")
        if len(set(outcomes)) != len(outcomes):
            raise ValueError("outcome identifiers must be unique")
        if any(m < 0 for m in masses):
            raise ValueError("masses must be nonnegative")
        total = sum(masses)
        if all(is_exact(m) for m in masses):
            if total != 1:
                raise ValueError(f"masses sum to {total}, not 1")
        elif abs(total - 1) > DOUBLE_TOL:
            raise ValueError(f"masses sum to {total!r}, not 1 within {DOUBLE_TOL}")
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "masses", tuple(masses))
        object.__setattr__(self, "_index", {o: i for i, o in enumerate(outcomes)})
        object.__setattr__(self, "_exact", all(is_exact(m) for m in masses))

    @classmethod
    def uniform(cls, outcomes: Iterable[Hashable], backend: str = RATIONAL) -> "FiniteSpace":
        outcomes = tuple(outcomes)
        n = len(outcomes)
        m = Fraction(1, n) if backend == RATIONAL else 1.0 / n
        masses = [m] * n
        if backend == DOUBLE:
            # keep the float sum within tolerance for large n
            masses[-1] = 1.0 - m * (n - 1)
        return cls(outcomes, masses)

    @classmethod
    def from_mapping(cls, mass: Mapping, backend: str | None = None) -> "FiniteSpace":
        return cls(list(mass), mass, backend=backend)

    def __len__(self) -> int:
        return len(self.outcomes)

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, FiniteSpace):
            return NotImplemented
        return self.outcomes == other.outcomes and self.masses == other.masses

    def __hash__(self) -> int:
        return hash((self.outcomes, self.masses))

    def __repr__(self) -> str:
        return f"FiniteSpace(n={len(self.outcomes)})"

    @property
    def mass(self) -> dict:
        return dict(zip(self.outcomes, self.masses))

    @property
    def exact(self) -> bool:
        return self._exact

    @property
    def backend(self) -> str:
        return RATIONAL if self.exact else DOUBLE

    def index(self, outcome) -> int:
        return self._index[outcome]

    def mass_of(self, outcome):
        return self.masses[self._index[outcome]]

    def probability(self, event: Iterable[Hashable]):
        return exact_sum(self.masses[self._index[o]] for o in set(event))

    def to_json(self) -> dict:
        return {
            "outcomes": [_outcome_key(o) for o in self.outcomes],
            "mass": {_outcome_key(o): format_number(m) for o, m in zip(self.outcomes, self.masses)},
        }

    @classmethod
    def from_json(cls, data: Mapping, backend: str = RATIONAL) -> "FiniteSpace":
        outcomes = list(data["outcomes"])
        return cls(outcomes, [data["mass"][o] for o in outcomes], backend=backend)


def _outcome_key(o) -> str:
    return o if isinstance(o, str) else str(o)


def check_same_space(*spaces: FiniteSpace) -> FiniteSpace:
    first = spaces[0]
    for s in spaces[1:]:
        if s is not first and s != first:
            raise SpaceMismatchError("objects live on different sample spaces")
    return first


@dataclass(frozen=True, eq=False)
class RandomVariable:
    """A map from the outcomes of ``space`` to (extended) real values."""

    space: FiniteSpace
    values: tuple

    def __init__(self, space: FiniteSpace, values: Iterable | Mapping):
        if not isinstance(values, (list, tuple)) and isinstance(values, Mapping):
            missing = [o for o in space.outcomes if o not in values]
            if missing:
                raise ValueError(f"random variable undefined on {missing[:5]}")
            values = [values[o] for o in space.outcomes]
        values = tuple(values)
        if len(values) != len(space.outcomes):
            raise ValueError("one value per outcome is required")
        for v in values:
            if isinstance(v, float) and math.isnan(v):
                raise ValueError("NaN values are not allowed")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, space: FiniteSpace, c) -> "RandomVariable":
        return cls(space, [c] * len(space))

    def __getitem__(self, outcome):
        return self.values[self.space.index(outcome)]

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RandomVariable):
            return NotImplemented
        return self.space == other.space and self.values == other.values

    def __repr__(self) -> str:
        shown = ", ".join(str(v) for v in self.values[:6])
        more = ", ..." if len(self.values) > 6 else ""
        return f"RandomVariable([{shown}{more}])"

    def as_dict(self) -> dict:
        return dict(zip(self.space.outcomes, self.values))

    def map(self, f: Callable) -> "RandomVariable":
        return RandomVariable(self.space, [f(v) for v in self.values])

    def _combine(self, other, op) -> "RandomVariable":
        if isinstance(other, RandomVariable):
            check_same_space(self.space, other.space)
            return RandomVariable(self.space, [op(a, b) for a, b in zip(self.values, other.values)])
        return RandomVariable(self.space, [op(a, other) for a in self.values])

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __mul__(self, other):
        return self._combine(other, mul)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._combine(other, lambda a, b: a / b)

    def support_values(self) -> list:
        """Values on outcomes with positive mass."""
        return [v for v, m in zip(self.values, self.space.masses) if m > 0]


@dataclass(frozen=True, eq=False)
class Partition:
    """Disjoint, nonempty cells covering the outcomes of ``space``."""

    space: FiniteSpace
    cells: tuple

    def __init__(self, space: FiniteSpace, cells: Iterable[Iterable[Hashable]]):
        cells = tuple(tuple(c) for c in cells)
        seen: set = set()
        for cell in cells:
            if not cell:
                raise ValueError("partition cells must be nonempty")
            for o in cell:
                if o not in space._index:
                    raise SpaceMismatchError(f"outcome {o!r} is not in the space")
                if o in seen:
                    raise ValueError(f"outcome {o!r} appears in two cells")
                seen.add(o)
        if len(seen) != len(space):
            raise ValueError("partition does not cover the space")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def trivial(cls, space: FiniteSpace) -> "Partition":
        return cls(space, [space.outcomes])

    @classmethod
    def singletons(cls, space: FiniteSpace) -> "Partition":
        return cls(space, [[o] for o in space.outcomes])

    @classmethod
    def by_value(cls, rv: RandomVariable) -> "Partition":
        """Preimages of the distinct values of ``rv``, in order of first appearance."""
        groups: dict = {}
        for o, v in zip(rv.space.outcomes, rv.values):
            groups.setdefault(v, []).append(o)
        return cls(rv.space, groups.values())

    def __len__(self) -> int:
        return len(self.cells)

    def as_sets(self) -> set:
        return {frozenset(c) for c in self.cells}


def expectation(X: RandomVariable):
    """Mass-weighted sum; ``+inf`` when an infinite value has positive mass."""
    return exact_sum(mul(m, v) for v, m in zip(X.values, X.space.masses) if m and v)


def esssup(X: RandomVariable):
    """Maximum over outcomes with positive mass."""
    return max(X.support_values())


def essinf(X: RandomVariable):
    return min(X.support_values())


def quantile(X: RandomVariable, tau):
    """Left-continuous quantile ``inf{x : P(X <= x) >= tau}``."""
    if not 0 < tau < 1:
        raise ValueError("tau must lie strictly between 0 and 1")
    pairs = sorted((v, m) for v, m in zip(X.values, X.space.masses) if m > 0)
    cum = 0
    for i, (v, m) in enumerate(pairs):
        cum = cum + m
        if is_exact(cum) and is_exact(tau):
            reached = cum >= tau
        else:
            reached = cum >= tau - DOUBLE_TOL
        if reached or i == len(pairs) - 1:
            return v
    raise AssertionError("unreachable")


def conditional_expectation(X: RandomVariable, pi: Partition) -> RandomVariable:
    """E[X | pi]: constant on each cell, equal to the cell's mass-weighted mean.

    Zero-mass cells carry no information; they are set to 0 and reported through
    a :class:`ZeroMassCellWarning`.
    """
    space = check_same_space(X.space, pi.space)
    out = list(X.values)
    for cell in pi.cells:
        idx = [space.index(o) for o in cell]
        cell_mass = exact_sum(space.masses[i] for i in idx)
        if cell_mass == 0:
            warnings.warn(f"dropping zero-mass cell of size {len(cell)}", ZeroMassCellWarning, stacklevel=2)
            value = 0
        else:
            weighted = exact_sum(mul(space.masses[i], X.values[i]) for i in idx if space.masses[i] and X.values[i])
            value = div(weighted, cell_mass)
        for i in idx:
            out[i] = value
    return RandomVariable(space, out)
