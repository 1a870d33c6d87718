"""Loss functions, certainty equivalents and notions of validity for
data-dependent levels.

Every notion returns a :class:`~posthoc_lab.testfam.ValidityResult` so that
audits can report margins alongside verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .backend import INF, div, format_number, is_exact, leq, mul, reciprocal, to_number
from .finprob import (
    FiniteSpace,
    RandomVariable,
    check_same_space,
    conditional_expectation,
    esssup,
    expectation,
    quantile,
)
from .testfam import (
    DataDependentLevel,
    TestFamily,
    ValidityResult,
    conditioning_partition,
    evaluate,
)


class InvalidThresholdError(ValueError):
    """The loss threshold ``C`` does not exceed the non-rejection loss."""


# ---------------------------------------------------------------------------
# losses


@dataclass(frozen=True, eq=False)
class LossFunction:
    """Increasing loss on decisions with a validity threshold.

    ``at_reject(alpha)`` is the loss of rejecting at ``alpha``;
    ``at_nonreject`` the loss of not rejecting; ``threshold`` is ``C``.
    """

    at_nonreject: object
    at_reject: Callable
    threshold: object
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.threshold > self.at_nonreject:
            raise InvalidThresholdError(
                f"threshold C={self.threshold} must exceed L(0)={self.at_nonreject}"
            )

    @classmethod
    def canonical(cls, scale=1) -> "LossFunction":
        """``L(0) = 0``, ``L(d_alpha) = scale / alpha``, ``C = 1``."""
        return NormalizedLoss(lambda a: scale * reciprocal(a), params={"canonical": True, "scale": scale})

    @classmethod
    def from_table(cls, L0, C, table: Sequence) -> "LossFunction":
        """Loss given at finitely many levels; other levels raise ``KeyError``."""
        lookup = {a: v for a, v in table}

        def at_reject(alpha):
            try:
                return lookup[alpha]
            except KeyError:
                raise KeyError(f"loss not tabulated at level {alpha}") from None

        return cls(L0, at_reject, C, params={"L0": L0, "C": C, "Lreject": [[a, v] for a, v in table]})

    def __call__(self, alpha):
        return self.at_reject(alpha)

    def normalized_at(self, alpha):
        return div(self.at_reject(alpha) - self.at_nonreject, self.threshold - self.at_nonreject)

    def is_increasing_on(self, levels: Sequence) -> bool:
        """Check the order conditions on a finite grid of levels."""
        levels = sorted(levels)
        vals = [self.at_reject(a) for a in levels]
        if any(v < self.at_nonreject for v in vals):
            return False
        return all(v1 >= v2 for v1, v2 in zip(vals, vals[1:]))

    def is_canonical_on(self, levels: Sequence) -> bool:
        """Whether the normalized loss equals ``1/alpha`` at every given level."""
        for a in levels:
            lhs, rhs = self.normalized_at(a), reciprocal(a)
            if not (leq(lhs, rhs) and leq(rhs, lhs)):
                return False
        return True

    def to_json(self) -> dict:
        params = dict(self.params)
        if params.get("canonical"):
            out = {"canonical": True}
            if params.get("scale", 1) != 1:
                out["scale"] = format_number(params["scale"])
            return out
        if "Lreject" in params:
            return {
                "L0": format_number(params["L0"]),
                "C": format_number(params["C"]),
                "Lreject": [[format_number(a), format_number(v)] for a, v in params["Lreject"]],
            }
        raise ValueError("this loss was built from a callable and has no JSON form")


class NormalizedLoss(LossFunction):
    """Loss with ``L(0) = 0`` and threshold ``1``."""

    def __init__(self, at_reject: Callable, params: dict | None = None):
        super().__init__(0, at_reject, 1, params or {})


def loss_from_json(data: Mapping, backend: str = "rational") -> LossFunction:
    if data.get("canonical"):
        return LossFunction.canonical(to_number(data.get("scale", 1), backend))
    return LossFunction.from_table(
        to_number(data["L0"], backend),
        to_number(data["C"], backend),
        [(to_number(a, backend), to_number(v, backend)) for a, v in data["Lreject"]],
    )


def normalize(L: LossFunction) -> NormalizedLoss:
    """Affine rescaling to ``(L - L(0)) / (C - L(0))`` with threshold 1."""
    if isinstance(L, NormalizedLoss):
        return L
    if not L.threshold > L.at_nonreject:
        raise InvalidThresholdError("C must exceed L(0)")
    L0, width, f = L.at_nonreject, L.threshold - L.at_nonreject, L.at_reject
    params = {}
    if "Lreject" in L.params:
        params = {"L0": 0, "C": 1, "Lreject": [[a, div(v - L0, width)] for a, v in L.params["Lreject"]]}
    return NormalizedLoss(lambda a: div(f(a) - L0, width), params=params)


def affine_transform(L: LossFunction, a, b) -> LossFunction:
    """The pair ``(aL + b, aC + b)`` for ``a > 0``."""
    if not a > 0:
        raise ValueError("affine scale must be positive")
    f = L.at_reject
    return LossFunction(a * L.at_nonreject + b, lambda x: a * f(x) + b, a * L.threshold + b)


# ---------------------------------------------------------------------------
# certainty equivalents

EXPECTATION = "expectation"
ESSSUP = "esssup"
POWER_MEAN = "power_mean"
QUANTILE = "quantile"


def _exact_root(m, q: int):
    """``m ** (1/q)``, exact when ``m`` is a rational q-th power."""
    if is_exact(m) and m >= 0:
        m = Fraction(m)
        num, den = _int_root(m.numerator, q), _int_root(m.denominator, q)
        if num is not None and den is not None:
            return Fraction(num, den)
    return float(m) ** (1.0 / q)


def _int_root(n: int, q: int):
    """Integer q-th root of ``n`` if ``n`` is a perfect power, else ``None``."""
    if n < 2:
        return n
    x = 1 << -(-n.bit_length() // q)
    while True:
        y = ((q - 1) * x + n // x ** (q - 1)) // q
        if y >= x:
            break
        x = y
    return x if x**q == n else None


def power_mean(X: RandomVariable, q):
    """``E[X^q]^(1/q)`` for nonnegative ``X`` and ``q >= 1``."""
    if q == 1:
        return expectation(X)
    m = expectation(X.map(lambda v: INF if v == INF else v**q))
    if m == INF:
        return INF
    if isinstance(q, int) or (is_exact(q) and Fraction(q).denominator == 1):
        return _exact_root(m, int(q))
    return float(m) ** (1.0 / float(q))


@dataclass(frozen=True)
class CertaintyEquivalent:
    """A functional on random variables that fixes constants.

    ``continuous_from_below`` is a static property of the functional, not a
    computed one; quantiles do not have it.
    """

    tag: str
    param: object = None

    def __post_init__(self):
        if self.tag == POWER_MEAN and not self.param >= 1:
            raise ValueError("power mean needs q >= 1")
        if self.tag == QUANTILE and not 0 < self.param < 1:
            raise ValueError("quantile level must lie in (0, 1)")
        if self.tag not in (EXPECTATION, ESSSUP, POWER_MEAN, QUANTILE):
            raise ValueError(f"unknown certainty equivalent {self.tag!r}")

    def __call__(self, X: RandomVariable):
        if self.tag == EXPECTATION:
            return expectation(X)
        if self.tag == ESSSUP:
            return esssup(X)
        if self.tag == POWER_MEAN:
            return power_mean(X, self.param)
        return quantile(X, self.param)

    @property
    def continuous_from_below(self) -> bool:
        return self.tag != QUANTILE

    @property
    def name(self) -> str:
        if self.param is None:
            return self.tag
        return f"{self.tag}({self.param})"

    def fixes(self, space: FiniteSpace, c) -> bool:
        return self(RandomVariable.constant(space, c)) == c

    def to_json(self):
        if self.param is None:
            return self.tag
        return {self.tag: format_number(self.param)}


def rho_from_json(data, backend: str = "rational") -> CertaintyEquivalent:
    if isinstance(data, str):
        return CertaintyEquivalent(data)
    (tag, param), = data.items()
    param = to_number(param, backend)
    if tag == POWER_MEAN and is_exact(param) and Fraction(param).denominator == 1:
        param = int(param)
    return CertaintyEquivalent(tag, param)


def parse_rho(text: str) -> CertaintyEquivalent:
    """Parse ``expectation``, ``esssup``, ``power_mean:2`` or ``quantile:0.5``."""
    name, _, arg = text.replace("-", "_").partition(":")
    if name in (EXPECTATION, ESSSUP):
        if arg:
            raise ValueError(f"{name} takes no parameter")
        return CertaintyEquivalent(name)
    if name == POWER_MEAN:
        q = Fraction(arg)
        return CertaintyEquivalent(POWER_MEAN, int(q) if q.denominator == 1 else q)
    if name == QUANTILE:
        return CertaintyEquivalent(QUANTILE, Fraction(arg))
    raise ValueError(f"unknown certainty equivalent {text!r}")


EXPECTATION_RHO = CertaintyEquivalent(EXPECTATION)
ESSSUP_RHO = CertaintyEquivalent(ESSSUP)

#: The menu of certainty equivalents audited against each other.
MENU = (
    EXPECTATION_RHO,
    ESSSUP_RHO,
    CertaintyEquivalent(POWER_MEAN, 2),
    CertaintyEquivalent(QUANTILE, Fraction(1, 2)),
    CertaintyEquivalent(QUANTILE, Fraction(9, 10)),
)


# ---------------------------------------------------------------------------
# validity notions


def conditional_rejection(phi: TestFamily, alpha_tilde: DataDependentLevel) -> RandomVariable:
    """``P(phi(alpha_tilde) rejects | alpha_tilde)`` as a random variable."""
    profile = evaluate(phi, alpha_tilde)
    rej = RandomVariable(profile.space, profile.reject_prob)
    return conditional_expectation(rej, conditioning_partition(alpha_tilde))


def conditional_loss_profile(
    phi: TestFamily,
    alpha_tilde: DataDependentLevel,
    L: LossFunction | None = None,
    P: FiniteSpace | None = None,
) -> RandomVariable:
    """``E[L(phi(alpha_tilde)) | alpha_tilde]``.

    On the cell where the level equals ``a`` this is
    ``L(0) + (L(d_a) - L(0)) * P(reject | cell)``.
    """
    if P is not None:
        check_same_space(phi.space, P)
    L = L or LossFunction.canonical()
    profile = evaluate(phi, alpha_tilde)
    pi = conditioning_partition(alpha_tilde)
    cond = conditional_expectation(RandomVariable(profile.space, profile.reject_prob), pi)
    L0 = L.at_nonreject
    out = list(cond.values)
    space = cond.space
    # both the level and the conditional rejection are constant on a cell
    for cell in pi.cells:
        idx = [space.index(o) for o in cell]
        a, p = alpha_tilde.levels[idx[0]], cond.values[idx[0]]
        value = L0 + mul(L.at_reject(a) - L0, p)
        for i in idx:
            out[i] = value
    return RandomVariable(space, out)


def general_validity(
    phi: TestFamily,
    alpha_tilde: DataDependentLevel,
    rho: CertaintyEquivalent = EXPECTATION_RHO,
    L: LossFunction | None = None,
    P: FiniteSpace | None = None,
) -> ValidityResult:
    """``rho(E[L(phi(alpha_tilde)) | alpha_tilde]) <= C``."""
    L = L or LossFunction.canonical()
    if not rho.fixes(phi.space, L.threshold):
        raise ValueError(f"{rho.name} does not fix constants")
    score = rho(conditional_loss_profile(phi, alpha_tilde, L, P))
    return ValidityResult(leq(score, L.threshold), score, L.threshold, f"general[{rho.name}]")


def expected_loss_validity(phi, alpha_tilde, L: LossFunction | None = None) -> ValidityResult:
    """``E[L(phi(alpha_tilde))] <= C`` computed outcome by outcome, without conditioning."""
    L = L or LossFunction.canonical()
    profile = evaluate(phi, alpha_tilde)
    L0 = L.at_nonreject
    total = 0
    for m, a, r in zip(profile.space.masses, profile.levels, profile.reject_prob):
        if m:
            total = total + m * (L0 + mul(r, L.at_reject(a) - L0))
    return ValidityResult(leq(total, L.threshold), total, L.threshold, "expected_loss")


def expected_distortion_ratio(phi: TestFamily, alpha_tilde: DataDependentLevel, P: FiniteSpace | None = None):
    """``E[P(reject | alpha_tilde) / alpha_tilde]``, summed atom by atom."""
    if P is not None:
        check_same_space(phi.space, P)
    profile = evaluate(phi, alpha_tilde)
    total = 0
    for m, a, r in zip(profile.space.masses, profile.levels, profile.reject_prob):
        if m and r:
            total = total + m * r / a
    return total


def strong_conditional_validity(
    phi: TestFamily, alpha_tilde: DataDependentLevel, P: FiniteSpace | None = None
) -> ValidityResult:
    """``P(reject | alpha_tilde = a) <= a`` on every positive-mass cell.

    The score is the largest conditional ratio ``P(reject | cell) / a``.
    """
    if P is not None:
        check_same_space(phi.space, P)
    profile = evaluate(phi, alpha_tilde)
    cells: dict = {}
    for m, a, r in zip(profile.space.masses, profile.levels, profile.reject_prob):
        mass, rej = cells.get(a, (0, 0))
        cells[a] = (mass + m, rej + (m * r if m and r else 0))
    ok, worst = True, 0
    for a, (mass, rej) in cells.items():
        if mass == 0:
            continue
        ok = ok and leq(rej, a * mass)
        worst = max(worst, rej / (a * mass))
    return ValidityResult(ok, worst, 1, "strong_conditional")


def mean_level_validity(
    phi: TestFamily, alpha_tilde: DataDependentLevel, P: FiniteSpace | None = None
) -> ValidityResult:
    """``P(reject) <= E[alpha_tilde]``; kept as a comparator only."""
    if P is not None:
        check_same_space(phi.space, P)
    profile = evaluate(phi, alpha_tilde)
    rej = expectation(RandomVariable(profile.space, profile.reject_prob))
    mean_level = expectation(alpha_tilde.as_random_variable())
    return ValidityResult(leq(rej, mean_level), rej, mean_level, "mean_level")


@dataclass(frozen=True)
class Notion:
    """A named validity notion ``(phi, alpha_tilde) -> ValidityResult``."""

    name: str
    check: Callable = field(compare=False, repr=False)
    config: dict = field(default_factory=dict, compare=False)

    def __call__(self, phi: TestFamily, alpha_tilde: DataDependentLevel) -> ValidityResult:
        return self.check(phi, alpha_tilde)

    def to_json(self) -> dict:
        return {"name": self.name, **self.config}


def general_notion(rho: CertaintyEquivalent = EXPECTATION_RHO, L: LossFunction | None = None) -> Notion:
    L = L or LossFunction.canonical()
    config = {"rho": rho.to_json()}
    try:
        config["loss"] = L.to_json()
    except ValueError:
        pass
    return Notion(f"general[{rho.name}]", lambda phi, at: general_validity(phi, at, rho, L), config)


def strong_notion() -> Notion:
    return Notion("strong_conditional", strong_conditional_validity)


def mean_level_notion() -> Notion:
    return Notion("mean_level", mean_level_validity)


def notion_from_json(data: Mapping, backend: str = "rational") -> Notion:
    name = data.get("name", "general")
    if name == "mean_level":
        return mean_level_notion()
    if name == "strong_conditional":
        return strong_notion()
    rho = rho_from_json(data.get("rho", EXPECTATION), backend)
    L = loss_from_json(data.get("loss", {"canonical": True}), backend)
    return general_notion(rho, L)
