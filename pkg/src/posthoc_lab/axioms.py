"""Executable nesting, preservation and monotonicity audits, and the
constructions that produce counterexamples to them.

Each audit returns an :class:`AuditReport`. A failing report always carries a
counterexample that can be re-checked by running the validity notion again
(see :func:`recheck`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .backend import INF, RATIONAL, div, format_number, leq, to_number
from .finprob import FiniteSpace, RandomVariable, expectation
from .scenarios import (
    BOUNDARY,
    SUBCRITICAL,
    SUPERCRITICAL,
    Scenario,
    pvalue_family,
    random_profiles,
    uniform_pvalue_space,
)
from .testfam import (
    CoupledFamily,
    DataDependentLevel,
    TestFamily,
    ThresholdFamily,
    ValidityResult,
    dominates,
    evaluate,
)
from .validity import (
    CertaintyEquivalent,
    LossFunction,
    Notion,
    conditional_loss_profile,
    general_notion,
    general_validity,
    mean_level_validity,
)

NESTING = "nesting"
PRESERVATION = "preservation"
MONOTONICITY = "monotonicity"


class WrongRegimeError(ValueError):
    """The profile's mean lies on the wrong side of the threshold."""


class PreconditionError(ValueError):
    """An audit was called on inputs that violate its precondition."""


@dataclass
class AuditReport:
    """Outcome of one audit.

    ``counterexample`` holds plain data describing the violation, including
    the objects needed to re-run it under the key ``"objects"`` (not
    serialized).
    """

    property: str
    passed: bool
    counterexample: dict | None = None
    metadata: dict = field(default_factory=dict)
    details: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed

    def to_json(self) -> dict:
        out = {"property": self.property, "verdict": "pass" if self.passed else "fail", "metadata": self.metadata}
        if self.counterexample is not None:
            out["counterexample"] = {k: v for k, v in self.counterexample.items() if k != "objects"}
        if self.details:
            out["details"] = self.details
        return out


def grid(step_den: int = 100, lo: int = 1, hi: int = 99, backend: str = RATIONAL) -> list:
    """``[lo/den, ..., hi/den]`` as exact rationals or doubles."""
    return [Fraction(i, step_den) if backend == RATIONAL else i / step_den for i in range(lo, hi + 1)]


# ---------------------------------------------------------------------------
# nesting


def check_nesting(
    rho: CertaintyEquivalent,
    L: LossFunction | None = None,
    alpha_grid: Sequence | None = None,
    p_grid: Sequence | None = None,
    backend: str = RATIONAL,
) -> AuditReport:
    """Does ``rho``-validity at constant levels agree with classical validity?

    For each ``(alpha, p)`` a one-atom space carries a coupled family that
    rejects on an event of probability ``p`` at every level; the notion must
    accept it at the constant level ``alpha`` exactly when ``p <= alpha``.
    Stops at the first disagreement.
    """
    L = L or LossFunction.canonical()
    alpha_grid = list(alpha_grid) if alpha_grid is not None else grid(100, 1, 99, backend)
    p_grid = list(p_grid) if p_grid is not None else grid(100, 0, 100, backend)
    one = to_number(1, backend)
    space = FiniteSpace(["x"], [one])
    meta = {
        "rho": rho.name,
        "loss": _loss_json(L),
        "alpha_grid": _grid_meta(alpha_grid),
        "p_grid": _grid_meta(p_grid),
        "checked": 0,
    }
    for alpha in alpha_grid:
        at = DataDependentLevel(space, [alpha])
        for p in p_grid:
            phi = CoupledFamily(space, [p])
            res = general_validity(phi, at, rho, L)
            meta["checked"] += 1
            if res.passed != leq(p, alpha):
                ce = {
                    "alpha": format_number(alpha),
                    "p": format_number(p),
                    "score": format_number(res.score),
                    "bound": format_number(res.bound),
                    "declared_valid": res.passed,
                    "classically_valid": leq(p, alpha),
                    "objects": {"phi": phi, "alpha_tilde": at, "rho": rho, "L": L},
                }
                return AuditReport(NESTING, False, ce, meta)
    return AuditReport(NESTING, True, None, meta)


def _grid_meta(g: Sequence) -> dict:
    return {"size": len(g), "min": format_number(min(g)), "max": format_number(max(g))}


def _loss_json(L: LossFunction):
    try:
        return L.to_json()
    except ValueError:
        return "callable"


# ---------------------------------------------------------------------------
# preservation


def rejection_at_or_below(phi: TestFamily, alpha_tilde: DataDependentLevel, a):
    """``P(phi(alpha_tilde) >= d_a)``: rejection at a level no larger than ``a``."""
    prof = evaluate(phi, alpha_tilde)
    total = 0
    for m, lvl, r in zip(prof.space.masses, prof.levels, prof.reject_prob):
        if m and r and lvl <= a:
            total = total + m * r
    return total


def check_preservation(
    phi: TestFamily,
    alpha_tilde: DataDependentLevel,
    notion: Notion | None = None,
    a_grid: Iterable | None = None,
) -> AuditReport:
    """If ``notion`` accepts ``phi`` at ``alpha_tilde``, every threshold ``a``
    must satisfy ``P(phi(alpha_tilde) >= d_a) <= a``.

    The grid always includes the distinct values of ``alpha_tilde`` (the only
    places the left side jumps).
    """
    notion = notion or general_notion()
    verdict = notion(phi, alpha_tilde)
    a_values = set(alpha_tilde.distinct())
    if a_grid is not None:
        a_values.update(a_grid)
    a_values = sorted(a_values)
    meta = {"notion": notion.name, "declared_valid": verdict.passed, "score": format_number(verdict.score),
            "a_grid_size": len(a_values)}
    if not verdict.passed:
        meta["vacuous"] = True
        return AuditReport(PRESERVATION, True, None, meta)
    for a in a_values:
        if not 0 < a < 1:
            continue
        prob = rejection_at_or_below(phi, alpha_tilde, a)
        if not leq(prob, a):
            ce = {
                "a": format_number(a),
                "rejection_probability": format_number(prob),
                "notion": notion.name,
                "notion_score": format_number(verdict.score),
                "objects": {"phi": phi, "alpha_tilde": alpha_tilde, "notion": notion, "a": a},
            }
            return AuditReport(PRESERVATION, False, ce, meta)
    return AuditReport(PRESERVATION, True, None, meta)


# ---------------------------------------------------------------------------
# monotonicity


def check_monotonicity(
    phi: TestFamily,
    at_valid: DataDependentLevel,
    at_weaker: DataDependentLevel,
    notion: Notion | None = None,
) -> AuditReport:
    """Fails when ``notion`` accepts ``at_valid`` but rejects the dominated
    ``at_weaker``."""
    if not dominates(phi, at_weaker, at_valid):
        raise PreconditionError("phi(at_weaker) <= phi(at_valid) does not hold pointwise")
    notion = notion or general_notion()
    v, w = notion(phi, at_valid), notion(phi, at_weaker)
    meta = {
        "notion": notion.name,
        "valid_score": format_number(v.score),
        "weaker_score": format_number(w.score),
    }
    if v.passed and not w.passed:
        ce = {
            "notion": notion.name,
            "valid_score": format_number(v.score),
            "weaker_score": format_number(w.score),
            "objects": {"phi": phi, "at_valid": at_valid, "at_weaker": at_weaker, "notion": notion},
        }
        return AuditReport(MONOTONICITY, False, ce, meta)
    return AuditReport(MONOTONICITY, True, None, meta)


# ---------------------------------------------------------------------------
# replication constructions


@dataclass(frozen=True, eq=False)
class ReplicationBundle:
    """A coupled family and level whose conditional loss replicates ``Y``."""

    Y: RandomVariable
    ybar: RandomVariable
    phi: CoupledFamily
    alpha_tilde: DataDependentLevel
    a: object
    delta: object
    M: object
    L: LossFunction
    regime: str

    def profile(self) -> RandomVariable:
        return conditional_loss_profile(self.phi, self.alpha_tilde, self.L)

    def rejection_probability(self):
        """``P(A)``, the probability of the shared rejection event."""
        return self.phi.rejection_probability(self.a)

    def check(self) -> dict:
        """The construction's guarantees, each evaluated from scratch."""
        prof = self.profile()
        out = {"profile_matches": prof.values == self.Y.values}
        pa = self.rejection_probability()
        if self.regime == SUBCRITICAL:
            fixed = DataDependentLevel.constant(self.Y.space, self.a)
            out["fixed_level_valid"] = leq(self.phi.rejection_probability(self.a), self.a)
            out["level_above_a"] = all(x >= self.a for x in self.alpha_tilde.levels)
            out["dominated"] = dominates(self.phi, self.alpha_tilde, fixed)
        else:
            out["level_below_a"] = all(x <= self.a for x in self.alpha_tilde.levels)
            pr = rejection_at_or_below(self.phi, self.alpha_tilde, self.a)
            out["preservation_violated"] = pr > self.a and pr == pa
        return out


def _normalized_profile(Y: RandomVariable, L: LossFunction) -> tuple:
    if any(v == INF for v in Y.values):
        raise PreconditionError("Y must be bounded")
    if any(v < L.at_nonreject for v in Y.values):
        raise PreconditionError("Y must be at least L(0)")
    width = L.threshold - L.at_nonreject
    ybar = Y.map(lambda v: div(v - L.at_nonreject, width))
    top = max(ybar.values)
    M = top if top > 0 else to_number(1, Y.space.backend)
    return ybar, M


def _require_canonical(L: LossFunction, levels: Iterable) -> None:
    if not L.is_canonical_on(sorted(set(levels))):
        raise PreconditionError("the construction needs a loss whose normalized form is 1/alpha")


def _coupled(ybar: RandomVariable, levels: list) -> CoupledFamily:
    return CoupledFamily(ybar.space, [a * y for a, y in zip(levels, ybar.values)])


def replicate_subcritical(Y: RandomVariable, L: LossFunction | None = None, delta=None, a=None) -> ReplicationBundle:
    """Level ``a(1 + delta * Ybar / M)`` at or above a fixed valid level ``a``.

    Default choices: ``delta = min(1/2, 1/E[Ybar] - 1)`` (``1/2`` when the
    mean is 0) and ``a = 0.9 * min(1, 1/M) / (1 + delta)``. Explicit values
    are checked against the construction's constraints.
    """
    L = L or LossFunction.canonical()
    ybar, M = _normalized_profile(Y, L)
    mean = expectation(ybar)
    if not mean < 1:
        raise WrongRegimeError(f"E[Y] must be below C (normalized mean {mean})")
    exact = Y.space.exact
    half = Fraction(1, 2) if exact else 0.5
    one = to_number(1, Y.space.backend)
    if delta is None:
        delta = half if mean == 0 else min(half, 1 / mean - 1)
    if a is None:
        a = (Fraction(9, 10) if exact else 0.9) * min(one, 1 / M) / (1 + delta)
    if not delta > 0 or not leq((1 + delta) * mean, 1):
        raise PreconditionError(f"delta={delta} violates (1 + delta) E[Ybar] <= 1")
    if not (0 < a and a * (1 + delta) < 1 and leq(a * (1 + delta) * M, 1)):
        raise PreconditionError(f"a={a} violates a(1 + delta) < 1 or a(1 + delta) M <= 1")
    levels = [a * (1 + delta * y / M) for y in ybar.values]
    _require_canonical(L, levels)
    return ReplicationBundle(
        Y, ybar, _coupled(ybar, levels), DataDependentLevel(Y.space, levels), a, delta, M, L, SUBCRITICAL
    )


def replicate_supercritical(Y: RandomVariable, L: LossFunction | None = None, delta=None, a=None) -> ReplicationBundle:
    """Level ``a(1 - delta * Ybar / M)`` at or below ``a``, rejecting with
    probability above ``a``.

    Default choices: ``delta = (1 - 1/E[Ybar]) / 2`` and ``a = min(1/2, 1/M)``.
    """
    L = L or LossFunction.canonical()
    ybar, M = _normalized_profile(Y, L)
    mean = expectation(ybar)
    if not mean > 1:
        raise WrongRegimeError(f"E[Y] must exceed C (normalized mean {mean})")
    exact = Y.space.exact
    half = Fraction(1, 2) if exact else 0.5
    if delta is None:
        delta = half * (1 - 1 / mean)
    if a is None:
        a = min(half, 1 / M)
    if not (0 < delta < 1 and (1 - delta) * mean > 1):
        raise PreconditionError(f"delta={delta} violates (1 - delta) E[Ybar] > 1")
    if not (0 < a < 1 and leq(a * M, 1)):
        raise PreconditionError(f"a={a} violates a M <= 1")
    levels = [a * (1 - delta * y / M) for y in ybar.values]
    _require_canonical(L, levels)
    return ReplicationBundle(
        Y, ybar, _coupled(ybar, levels), DataDependentLevel(Y.space, levels), a, delta, M, L, SUPERCRITICAL
    )


# ---------------------------------------------------------------------------
# the esssup counterexample


@dataclass(frozen=True)
class DominatedLevelExample:
    space: FiniteSpace
    phi: ThresholdFamily
    alpha0: DataDependentLevel
    alpha1: DataDependentLevel

    def as_scenario(self) -> Scenario:
        return Scenario(self.space, self.phi, {"alpha0": self.alpha0, "alpha1": self.alpha1}, "esssup-monotonicity")


def dominated_level_example(n_atoms: int = 10_000, backend: str = RATIONAL) -> DominatedLevelExample:
    """Uniform p-values on ``i/n``; constant level 0.01 versus a level that is
    0.02 where ``p <= 0.01`` and 0.01 elsewhere.

    The second level reports weaker evidence on every rejection, yet esssup
    validity accepts only the first.
    """
    if n_atoms <= 0 or n_atoms % 100:
        raise ValueError("n_atoms must be a positive multiple of 100")
    space = uniform_pvalue_space(n_atoms, backend)
    phi = pvalue_family(space)
    lo = Fraction(1, 100) if backend == RATIONAL else 0.01
    hi = 2 * lo
    alpha0 = DataDependentLevel.constant(space, lo)
    alpha1 = DataDependentLevel(space, [hi if p <= lo else lo for p in phi.kappa])
    return DominatedLevelExample(space, phi, alpha0, alpha1)


# ---------------------------------------------------------------------------
# composite audit over the menu of certainty equivalents


def default_suite(n: int = 1000, seed: int = 0, backend: str = RATIONAL) -> list:
    """``n`` profiles, half with mean below 1 and half above, plus the
    conditional loss profile of the esssup example (first)."""
    ex = dominated_level_example(100, backend)
    ex_profile = conditional_loss_profile(ex.phi, ex.alpha1)
    # compress the example's profile to its two distinct values
    vals = sorted(set(ex_profile.support_values()))
    masses = [sum(m for m, v in zip(ex.space.masses, ex_profile.values) if v == x) for x in vals]
    compact = RandomVariable(FiniteSpace([f"y{i}" for i in range(len(vals))], masses), vals)
    n_sub = (n - 1) // 2
    n_super = n - 1 - n_sub
    return [compact] + random_profiles(n_sub, SUBCRITICAL, seed, backend) + random_profiles(
        n_super, SUPERCRITICAL, seed, backend
    )


def audit_composite(
    rho: CertaintyEquivalent,
    Y_suite: Sequence | None = None,
    seed: int = 0,
    L: LossFunction | None = None,
    n: int = 1000,
    stop_at_first: bool = False,
) -> AuditReport:
    """Run the replication constructions against ``rho``.

    Profiles with mean below C become bundles that are dominated by a valid
    fixed-level test, so ``rho`` rejecting them violates monotonicity.
    Profiles with mean above C become bundles violating preservation, so
    ``rho`` accepting them is a violation. Profiles with mean exactly C are
    recorded but never counted as failures.
    """
    L = L or LossFunction.canonical()
    backend = RATIONAL
    if Y_suite is None:
        Y_suite = default_suite(n, seed)
    elif Y_suite:
        backend = Y_suite[0].space.backend
    nest = check_nesting(rho, L, grid(20, 1, 19, backend), grid(20, 0, 20, backend), backend)
    meta = {"rho": rho.name, "seed": seed, "suite_size": len(Y_suite),
            "continuous_from_below": rho.continuous_from_below, "nesting": nest.passed}
    if not nest.passed:
        meta["skipped"] = "loss does not nest classical validity"
        return AuditReport("composite", False, nest.counterexample, meta, [nest.to_json()])
    notion = general_notion(rho, L)
    violations = []
    boundary = []
    counts = {SUBCRITICAL: 0, SUPERCRITICAL: 0, BOUNDARY: 0}
    for idx, Y in enumerate(Y_suite):
        ybar_mean = div(expectation(Y) - L.at_nonreject, L.threshold - L.at_nonreject)
        if ybar_mean < 1:
            counts[SUBCRITICAL] += 1
            b = replicate_subcritical(Y, L)
            res = notion(b.phi, b.alpha_tilde)
            if not res.passed:
                fixed = DataDependentLevel.constant(Y.space, b.a)
                report = check_monotonicity(b.phi, fixed, b.alpha_tilde, notion)
                violations.append(_violation(idx, MONOTONICITY, b, res, report))
        elif ybar_mean > 1:
            counts[SUPERCRITICAL] += 1
            b = replicate_supercritical(Y, L)
            res = notion(b.phi, b.alpha_tilde)
            if res.passed:
                report = check_preservation(b.phi, b.alpha_tilde, notion, [b.a])
                violations.append(_violation(idx, PRESERVATION, b, res, report))
        else:
            counts[BOUNDARY] += 1
            boundary.append({"index": idx, "score": format_number(rho(Y)), "declared_valid": leq(rho(Y), L.threshold)})
        if violations and stop_at_first:
            break
    meta["regimes"] = counts
    meta["violations"] = len(violations)
    if boundary:
        meta["boundary"] = boundary
    if violations:
        first = violations[0]
        return AuditReport("composite", False, first, meta, [v["summary"] for v in violations[:20]])
    return AuditReport("composite", True, None, meta)


def _violation(idx: int, prop: str, b: ReplicationBundle, res: ValidityResult, report: AuditReport) -> dict:
    if report.passed:
        raise AssertionError(f"{prop} violation at suite index {idx} does not re-check")
    summary = {
        "index": idx,
        "property": prop,
        "score": format_number(res.score),
        "a": format_number(b.a),
        "delta": format_number(b.delta),
        "rejection_probability": format_number(b.rejection_probability()),
    }
    ce = dict(report.counterexample)
    ce["summary"] = summary
    ce["property"] = prop
    ce["bundle"] = {
        "Y": [format_number(v) for v in b.Y.values],
        "mass": [format_number(m) for m in b.Y.space.masses],
        "alpha_tilde": [format_number(v) for v in b.alpha_tilde.levels],
        "r": [format_number(v) for v in b.phi.r],
    }
    return ce


# ---------------------------------------------------------------------------
# mean-level comparator


def audit_mean_level(phi: TestFamily, alpha_tilde: DataDependentLevel, a_grid: Iterable | None = None) -> AuditReport:
    """Run preservation under the mean-level criterion and link both results."""
    from .validity import mean_level_notion

    ml = mean_level_validity(phi, alpha_tilde)
    pres = check_preservation(phi, alpha_tilde, mean_level_notion(), a_grid)
    report = AuditReport(PRESERVATION, pres.passed, pres.counterexample, dict(pres.metadata))
    report.metadata["mean_level"] = ml.to_json()
    report.details.append({"mean_level_passed": ml.passed, "preservation_passed": pres.passed})
    return report


# ---------------------------------------------------------------------------
# re-checking


def recheck(report: AuditReport) -> bool:
    """Re-run the validity notion(s) behind a failing report; ``True`` when the
    failure reproduces."""
    if report.passed or report.counterexample is None:
        return False
    ce = report.counterexample
    obj = ce.get("objects", {})
    prop = ce.get("property", report.property)
    if report.property == NESTING or prop == NESTING:
        res = general_validity(obj["phi"], obj["alpha_tilde"], obj["rho"], obj["L"])
        p = obj["phi"].r[0]
        alpha = obj["alpha_tilde"].levels[0]
        return res.passed != leq(p, alpha)
    if prop == PRESERVATION:
        again = check_preservation(obj["phi"], obj["alpha_tilde"], obj["notion"], [obj["a"]])
        return not again.passed
    if prop == MONOTONICITY:
        again = check_monotonicity(obj["phi"], obj["at_valid"], obj["at_weaker"], obj["notion"])
        return not again.passed
    raise ValueError(f"cannot re-check property {prop!r}")
