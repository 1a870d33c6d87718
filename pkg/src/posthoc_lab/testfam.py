"""Families of level-alpha tests and data-dependent levels.

Two family forms are supported:

* :class:`ThresholdFamily` rejects at level ``alpha`` exactly when the critical
  level ``kappa(x) <= alpha``. ``kappa(x) == 1`` is the never-reject sentinel,
  ``kappa(x) == 0`` rejects at every level.
* :class:`CoupledFamily` rejects at every level on one shared randomized event
  ``A`` with ``P(A | x) = r(x)``. External randomization is carried by ``r``
  and never simulated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .backend import exact_sum, format_number, leq, to_number
from .evidence import NON_REJECT, Decision, reject_at
from .finprob import FiniteSpace, Partition, RandomVariable, check_same_space

THRESHOLD = "threshold"
COUPLED = "coupled"

#: Critical level of an outcome at which the family never rejects.
NEVER = 1


class RandomizedComparisonError(ValueError):
    """Pointwise comparison of randomized tests without a shared event."""


def _values(space: FiniteSpace, values, name: str) -> tuple:
    if isinstance(values, RandomVariable):
        check_same_space(space, values.space)
        return values.values
    if isinstance(values, Mapping):
        values = [values[o] for o in space.outcomes]
    values = tuple(values)
    if len(values) != len(space):
        raise ValueError(f"{name} needs one value per outcome")
    return values


class TestFamily:
    """Common interface: ``space`` and per-outcome rejection behaviour."""

    __test__ = False  # keep pytest from collecting this class

    form: str
    space: FiniteSpace

    def reject_probability(self, alpha) -> tuple:
        """Per-outcome probability that ``phi(alpha)`` rejects."""
        raise NotImplementedError

    def rejection_probability(self, alpha):
        """``P(phi(alpha) = d_alpha)`` under the space's mass."""
        return exact_sum(m * r for m, r in zip(self.space.masses, self.reject_probability(alpha)) if m and r)


@dataclass(frozen=True, eq=False)
class ThresholdFamily(TestFamily):
    space: FiniteSpace
    kappa: tuple
    form = THRESHOLD

    def __init__(self, space: FiniteSpace, kappa):
        kappa = _values(space, kappa, "kappa")
        if any(k < 0 or k > 1 for k in kappa):
            raise ValueError("critical levels must lie in [0, 1]")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "kappa", kappa)

    def rejects(self, outcome_index: int, alpha) -> bool:
        k = self.kappa[outcome_index]
        return k != NEVER and k <= alpha

    def reject_probability(self, alpha) -> tuple:
        return tuple(1 if (k != NEVER and k <= alpha) else 0 for k in self.kappa)

    def decision(self, outcome, alpha) -> Decision:
        i = self.space.index(outcome)
        return reject_at(alpha) if self.rejects(i, alpha) else NON_REJECT

    def to_json(self) -> dict:
        return {
            "form": THRESHOLD,
            "kappa": {str(o): format_number(k) for o, k in zip(self.space.outcomes, self.kappa)},
        }


@dataclass(frozen=True, eq=False)
class CoupledFamily(TestFamily):
    space: FiniteSpace
    r: tuple
    form = COUPLED

    def __init__(self, space: FiniteSpace, r):
        r = _values(space, r, "r")
        if any(p < 0 or p > 1 for p in r):
            raise ValueError("rejection probabilities must lie in [0, 1]")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "r", r)

    @property
    def deterministic(self) -> bool:
        return all(p in (0, 1) for p in self.r)

    def reject_probability(self, alpha) -> tuple:
        return self.r

    def to_json(self) -> dict:
        return {
            "form": COUPLED,
            "r": {str(o): format_number(p) for o, p in zip(self.space.outcomes, self.r)},
        }


def family_from_json(data: Mapping, space: FiniteSpace, backend: str = "rational") -> TestFamily:
    form = data["form"]
    if form == THRESHOLD:
        return ThresholdFamily(space, [to_number(data["kappa"][str(o)], backend) for o in space.outcomes])
    if form == COUPLED:
        return CoupledFamily(space, [to_number(data["r"][str(o)], backend) for o in space.outcomes])
    raise ValueError(f"unknown family form {form!r}")


@dataclass(frozen=True, eq=False)
class DataDependentLevel:
    """A level in (0, 1) for every outcome."""

    space: FiniteSpace
    levels: tuple

    def __init__(self, space: FiniteSpace, levels):
        levels = _values(space, levels, "levels")
        for a in levels:
            if not 0 < a < 1:
                raise ValueError(f"data-dependent levels must lie in (0, 1), got {a}")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "levels", levels)

    @classmethod
    def constant(cls, space: FiniteSpace, alpha) -> "DataDependentLevel":
        return cls(space, [alpha] * len(space))

    def __getitem__(self, outcome):
        return self.levels[self.space.index(outcome)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, DataDependentLevel):
            return NotImplemented
        return self.space == other.space and self.levels == other.levels

    def as_random_variable(self) -> RandomVariable:
        return RandomVariable(self.space, self.levels)

    def distinct(self) -> list:
        return sorted(set(self.levels))

    def to_json(self) -> dict:
        return {str(o): format_number(a) for o, a in zip(self.space.outcomes, self.levels)}

    @classmethod
    def from_json(cls, data: Mapping, space: FiniteSpace, backend: str = "rational") -> "DataDependentLevel":
        return cls(space, [to_number(data[str(o)], backend) for o in space.outcomes])


@dataclass(frozen=True)
class RandomizedDecisionProfile:
    """Law of ``phi(alpha_tilde)`` given each outcome.

    At outcome ``i`` the decision is ``RejectAt(levels[i])`` with probability
    ``reject_prob[i]`` and ``NonReject`` otherwise.
    """

    space: FiniteSpace
    levels: tuple
    reject_prob: tuple

    def decision(self, outcome) -> Decision:
        i = self.space.index(outcome)
        r = self.reject_prob[i]
        if r == 1:
            return reject_at(self.levels[i])
        if r == 0:
            return NON_REJECT
        raise RandomizedComparisonError(f"decision at {outcome!r} is randomized (P(reject) = {r})")

    def numeric(self) -> RandomVariable:
        """Expected numeric evidence per outcome: ``P(reject | x) / level``."""
        return RandomVariable(self.space, [r / a if r else 0 for a, r in zip(self.levels, self.reject_prob)])


def evaluate(phi: TestFamily, alpha_tilde: DataDependentLevel) -> RandomizedDecisionProfile:
    """Plug a data-dependent level into ``phi``, outcome by outcome."""
    space = check_same_space(phi.space, alpha_tilde.space)
    if isinstance(phi, ThresholdFamily):
        probs = tuple(
            1 if (k != NEVER and k <= a) else 0 for k, a in zip(phi.kappa, alpha_tilde.levels)
        )
    else:
        probs = phi.r
    return RandomizedDecisionProfile(space, alpha_tilde.levels, probs)


@dataclass(frozen=True)
class ValidityResult:
    """Verdict with the quantity it was decided on.

    ``score`` is compared against ``bound``; ``margin = bound - score``.
    """

    passed: bool
    score: object
    bound: object
    notion: str = ""

    def __bool__(self) -> bool:
        return self.passed

    @property
    def margin(self):
        return self.bound - self.score

    def to_json(self) -> dict:
        return {
            "notion": self.notion,
            "passed": self.passed,
            "score": format_number(self.score),
            "bound": format_number(self.bound),
        }


def classical_validity(phi: TestFamily, alpha, P: FiniteSpace | None = None) -> ValidityResult:
    """``P(phi(alpha) = d_alpha) <= alpha``, with the exact rejection probability."""
    if P is not None:
        check_same_space(phi.space, P)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    p = phi.rejection_probability(alpha)
    return ValidityResult(leq(p, alpha), p, alpha, "classical")


def conditioning_partition(alpha_tilde: DataDependentLevel) -> Partition:
    """Preimages of the distinct values of the data-dependent level."""
    return Partition.by_value(alpha_tilde.as_random_variable())


def dominates(phi: TestFamily, at1: DataDependentLevel, at2: DataDependentLevel) -> bool:
    """Whether ``phi(at1) <= phi(at2)`` as decisions at every outcome.

    Coupled families share their rejection event across levels, so the
    comparison reduces to ``at1 >= at2`` wherever the event can occur.
    """
    check_same_space(phi.space, at1.space, at2.space)
    if isinstance(phi, ThresholdFamily):
        for k, a1, a2 in zip(phi.kappa, at1.levels, at2.levels):
            if k == NEVER or k > a1:
                continue
            if not (k <= a2 and a1 >= a2):
                return False
        return True
    if isinstance(phi, CoupledFamily):
        return all(a1 >= a2 for r, a1, a2 in zip(phi.r, at1.levels, at2.levels) if r > 0)
    raise RandomizedComparisonError(f"cannot compare decisions of {type(phi).__name__}")
