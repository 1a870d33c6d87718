"""E-values as multi-decision tests.

An :class:`EValue` assigns a decision to every outcome; its numeric
representation is the ``[0, inf]``-valued variable ``numeric_rep(e)``. The
e-value of a family is the pointwise supremum of its decisions over levels in
(0, 1), which for a threshold family is ``RejectAt(kappa)`` (numeric
``1/kappa``) except at the never-reject sentinel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .backend import format_number, leq, to_number
from .evidence import NON_REJECT, Decision, compare, numeric_rep, reject_at
from .finprob import FiniteSpace, RandomVariable, check_same_space, expectation
from .testfam import (
    NEVER,
    CoupledFamily,
    DataDependentLevel,
    TestFamily,
    ThresholdFamily,
    evaluate,
)
from .validity import EXPECTATION_RHO, LossFunction, Notion, general_validity


class InteriorRandomizationError(ValueError):
    """A coupled family rejects with probability strictly between 0 and 1."""


@dataclass(frozen=True, eq=False)
class EValue:
    space: FiniteSpace
    decisions: tuple

    def numeric(self) -> RandomVariable:
        return RandomVariable(self.space, [numeric_rep(d) for d in self.decisions])

    def expected(self):
        """``E[numeric_rep(e)]``; infinite when infinite evidence has positive mass."""
        return expectation(self.numeric())

    def __getitem__(self, outcome) -> Decision:
        return self.decisions[self.space.index(outcome)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, EValue):
            return NotImplemented
        return self.space == other.space and all(
            compare(a, b) == 0 for a, b in zip(self.decisions, other.decisions)
        )

    def to_json(self) -> dict:
        return {
            "evidence": {
                str(o): format_number(v) for o, v in zip(self.space.outcomes, self.numeric().values)
            }
        }

    @classmethod
    def from_json(cls, data: Mapping, space: FiniteSpace, backend: str = "rational") -> "EValue":
        from .evidence import from_numeric

        ev = data["evidence"]
        return cls(space, tuple(from_numeric(to_number(ev[str(o)], backend)) for o in space.outcomes))


def as_threshold(phi: TestFamily) -> ThresholdFamily:
    """Threshold form of ``phi`` for e-value purposes.

    A deterministic coupled family rejects at every level on its event, which
    is critical level 0; elsewhere it never rejects.
    """
    if isinstance(phi, ThresholdFamily):
        return phi
    if isinstance(phi, ClosureFamily):
        return phi.family
    if isinstance(phi, CoupledFamily):
        if not phi.deterministic:
            bad = next(o for o, r in zip(phi.space.outcomes, phi.r) if r not in (0, 1))
            raise InteriorRandomizationError(
                f"family rejects with probability strictly between 0 and 1 at {bad!r}; "
                "the supremum over levels is not a pointwise decision"
            )
        return ThresholdFamily(phi.space, [0 if r == 1 else NEVER for r in phi.r])
    raise TypeError(f"unsupported family {type(phi).__name__}")


def evalue_of_family(phi: TestFamily) -> EValue:
    """Pointwise supremum of ``phi(alpha)`` over ``alpha`` in (0, 1)."""
    th = as_threshold(phi)
    return EValue(th.space, tuple(NON_REJECT if k == NEVER else reject_at(k) for k in th.kappa))


@dataclass(frozen=True, eq=False)
class ClosureFamily:
    """Threshold family generated by the e-value of ``source``."""

    source: TestFamily
    e: EValue
    family: ThresholdFamily

    @property
    def space(self) -> FiniteSpace:
        return self.family.space


def closure(phi: TestFamily, check_grid: Sequence | None = None) -> ClosureFamily:
    """Close ``phi``: reject at ``alpha`` exactly when ``e_phi >= d_alpha``.

    Dominance ``phi(alpha) <= closure(alpha)`` is asserted on ``check_grid``
    (by default every critical level plus a coarse grid), together with
    equality of the two e-values.
    """
    if isinstance(phi, ClosureFamily):
        phi = phi.family
    e = evalue_of_family(phi)
    kappa = []
    for d in e.decisions:
        kappa.append(NEVER if not d.rejects else d.level)
    fam = ThresholdFamily(phi.space, kappa)
    grid = list(check_grid) if check_grid is not None else _default_grid(fam)
    for a in grid:
        src, cl = phi.reject_probability(a), fam.reject_probability(a)
        if any(s > c for s, c in zip(src, cl)):
            raise AssertionError(f"closure fails to dominate the family at level {a}")
    if evalue_of_family(fam) != e:
        raise AssertionError("closure changed the e-value")
    return ClosureFamily(phi, e, fam)


def _default_grid(fam: ThresholdFamily) -> list:
    grid = {k for k in fam.kappa if 0 < k < 1}
    grid.update(to_number(i / 20, fam.space.backend) for i in range(1, 20))
    return sorted(grid)


def posthoc_approximation(phi: TestFamily, n: int) -> DataDependentLevel:
    """Level sequence whose decisions increase to ``e_phi``.

    Equal to the critical level where it lies in (0, 1); ``1/(n+1)`` where the
    family rejects at every level; ``1 - 1/(n+1)`` where it never rejects.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    th = as_threshold(phi)
    exact = th.space.exact
    small = to_number(1, "rational") / (n + 1) if exact else 1.0 / (n + 1)
    levels = []
    for k in th.kappa:
        if k == 0:
            levels.append(small)
        elif k == NEVER:
            levels.append(1 - small)
        else:
            levels.append(k)
    return DataDependentLevel(th.space, levels)


def evidence_profile(phi: TestFamily, alpha_tilde: DataDependentLevel) -> RandomVariable:
    """Numeric evidence of ``phi(alpha_tilde)`` per outcome (deterministic families)."""
    prof = evaluate(as_threshold(phi), alpha_tilde)
    return RandomVariable(
        prof.space, [numeric_rep(prof.decision(o)) for o in prof.space.outcomes]
    )


@dataclass(frozen=True)
class PosthocResult:
    passed: bool
    expected_evidence: object
    certifying: bool
    witness: DataDependentLevel | None = None
    witness_score: object = None
    notion: str = "general[expectation]"

    def __bool__(self) -> bool:
        return self.passed

    def to_json(self) -> dict:
        out = {
            "notion": self.notion,
            "passed": self.passed,
            "certifying": self.certifying,
            "expected_evidence": format_number(self.expected_evidence),
        }
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
            out["witness_score"] = format_number(self.witness_score)
        return out


def adversarial_level(phi: TestFamily, bound=1, max_doublings: int = 200):
    """Smallest power-of-two ``n`` whose approximation level pushes the
    expected normalized loss above ``bound``; ``None`` if none exists."""
    e = evalue_of_family(phi)
    if leq(e.expected(), bound):
        return None
    n = 1
    for _ in range(max_doublings):
        at = posthoc_approximation(phi, n)
        res = general_validity(as_threshold(phi), at, EXPECTATION_RHO, LossFunction.canonical())
        if not res.passed:
            return at, res.score
        n *= 2
    raise RuntimeError("no adversarial level found; evidence mass is too small")


def posthoc_validity(phi: TestFamily, notion: Notion | None = None) -> PosthocResult:
    """Validity of ``phi`` for every data-dependent level at once.

    Under the expected-loss notion with the canonical loss this is
    ``E[numeric_rep(e_phi)] <= 1``. A failing verdict comes with a
    data-dependent level at which the notion itself rejects ``phi``. Any other
    notion is only evaluated along the approximating sequence and never
    certifies.
    """
    e = evalue_of_family(phi)
    ee = e.expected()
    pinned = notion is None or notion.name == "general[expectation]" and (
        notion.config.get("loss", {"canonical": True}) == {"canonical": True}
    )
    if pinned:
        if leq(ee, 1):
            return PosthocResult(True, ee, True)
        at, score = adversarial_level(phi)
        return PosthocResult(False, ee, True, at, score)

    th = as_threshold(phi)
    for n in (1, 2, 4, 8, 16, 64, 256, 1024):
        at = posthoc_approximation(th, n)
        res = notion(th, at)
        if not res.passed:
            return PosthocResult(False, ee, False, at, res.score, notion.name)
    return PosthocResult(True, ee, False, None, None, notion.name)


@dataclass(frozen=True)
class Implication:
    name: str
    premise: bool
    conclusion: bool
    holds: bool
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "premise": self.premise,
            "conclusion": self.conclusion,
            "holds": self.holds,
            **self.detail,
        }


@dataclass(frozen=True)
class ImplicationReport:
    implications: tuple
    e_phi: EValue
    posthoc_phi: PosthocResult
    posthoc_closure: PosthocResult

    @property
    def passed(self) -> bool:
        return all(i.holds for i in self.implications)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "expected_evidence": format_number(self.e_phi.expected()),
            "implications": [i.to_json() for i in self.implications],
            "posthoc_family": self.posthoc_phi.to_json(),
            "posthoc_closure": self.posthoc_closure.to_json(),
        }


def implication_harness(phi: TestFamily, P: FiniteSpace | None = None) -> ImplicationReport:
    """Check the closure statements on one family.

    (i) post-hoc validity of ``phi`` carries over to its closure;
    (ii) the closure is post-hoc valid exactly when its e-value has
    expectation at most 1; (iii) closing does not change the e-value.
    """
    if P is not None:
        check_same_space(phi.space, P)
    cl = closure(phi)
    e_phi = evalue_of_family(phi)
    e_cl = evalue_of_family(cl.family)
    ph_phi = posthoc_validity(phi)
    ph_cl = posthoc_validity(cl.family)

    # witnesses are re-checked against the validity module directly
    for res, fam in ((ph_phi, as_threshold(phi)), (ph_cl, cl.family)):
        if res.witness is not None:
            again = general_validity(fam, res.witness)
            if again.passed:
                raise AssertionError("post-hoc witness does not reproduce")

    e_cl_valid = leq(expectation(e_cl.numeric()), 1)
    i1 = Implication(
        "posthoc(phi) => posthoc(closure)",
        ph_phi.passed,
        ph_cl.passed,
        (not ph_phi.passed) or ph_cl.passed,
    )
    i2 = Implication(
        "posthoc(closure) <=> valid(e_closure)",
        ph_cl.passed,
        e_cl_valid,
        ph_cl.passed == e_cl_valid,
    )
    i3 = Implication("e_closure == e_phi", True, e_cl == e_phi, e_cl == e_phi)
    return ImplicationReport((i1, i2, i3), e_phi, ph_phi, ph_cl)
