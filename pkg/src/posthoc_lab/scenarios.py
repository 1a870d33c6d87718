"""Ready-made and random scenarios on small exact spaces.

All random generators take a ``numpy.random.Generator`` and only draw
integers, which are turned into exact rationals (or doubles), so results are
reproducible from the seed on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .backend import RATIONAL, to_number
from .finprob import FiniteSpace, RandomVariable, expectation
from .testfam import NEVER, CoupledFamily, DataDependentLevel, TestFamily, ThresholdFamily

SUBCRITICAL = "subcritical"
SUPERCRITICAL = "supercritical"
BOUNDARY = "boundary"


def _num(num: int, den: int, backend: str):
    q = Fraction(num, den)
    return q if backend == RATIONAL else float(q)


@dataclass(frozen=True)
class Scenario:
    """A family with named data-dependent levels on one space."""

    space: FiniteSpace
    phi: TestFamily
    levels: dict
    name: str = ""


def uniform_pvalue_space(n: int, backend: str = RATIONAL) -> FiniteSpace:
    """Atoms ``1..n`` with equal mass; atom ``i`` carries p-value ``i/n``."""
    return FiniteSpace.uniform(range(1, n + 1), backend)


def pvalue_family(space: FiniteSpace) -> ThresholdFamily:
    n = len(space)
    return ThresholdFamily(space, [_num(i, n, space.backend) for i in space.outcomes])


def pvalue_scenario(n: int = 100, backend: str = RATIONAL) -> Scenario:
    space = uniform_pvalue_space(n, backend)
    return Scenario(space, pvalue_family(space), {}, "p-value")


def never_reject_scenario(n: int = 4, backend: str = RATIONAL) -> Scenario:
    space = FiniteSpace.uniform([f"x{i}" for i in range(1, n + 1)], backend)
    return Scenario(space, ThresholdFamily(space, [NEVER] * n), {}, "never-reject")


def likelihood_ratio_scenario(backend: str = RATIONAL) -> Scenario:
    """Likelihood-ratio test on four atoms: reject at level ``a`` iff
    ``dQ/dP >= 1/a``.

    ``dQ/dP = (0, 3/2, 7/4, 2)`` under ``P = (2/5, 3/10, 1/5, 1/10)``, so
    ``E_P[dQ/dP] = 1``. Every ratio is either 0 or above 1, so the family's
    e-value equals the likelihood ratio exactly.
    """
    outcomes = ["x1", "x2", "x3", "x4"]
    P = [_num(2, 5, backend), _num(3, 10, backend), _num(1, 5, backend), _num(1, 10, backend)]
    Q = [_num(0, 1, backend), _num(9, 20, backend), _num(7, 20, backend), _num(1, 5, backend)]
    space = FiniteSpace(outcomes, P)
    kappa = []
    for p, q in zip(P, Q):
        lr = q / p
        kappa.append(NEVER if lr <= 1 else 1 / lr)
    return Scenario(space, ThresholdFamily(space, kappa), {}, "likelihood-ratio")


def likelihood_ratio(space: FiniteSpace, Q) -> RandomVariable:
    return RandomVariable(space, [q / p for q, p in zip(Q, space.masses)])


def mean_level_comparator_scenario(backend: str = RATIONAL) -> Scenario:
    """A family the mean-level criterion accepts although it rejects at a small
    level far more often than that level allows.

    Uniform 100-atom grid; the family rejects at every level where ``p <= 0.3``
    and never elsewhere; the level is 0.05 on the rejection region and 0.7
    elsewhere. ``P(reject) = 0.3 <= E[level] = 0.505``, but
    ``P(reject at level <= 0.05) = 0.3 > 0.05``.
    """
    space = uniform_pvalue_space(100, backend)
    kappa = [0 if i <= 30 else NEVER for i in space.outcomes]
    level = DataDependentLevel(
        space, [_num(5, 100, backend) if i <= 30 else _num(70, 100, backend) for i in space.outcomes]
    )
    return Scenario(space, ThresholdFamily(space, kappa), {"alpha_tilde": level}, "mean-level comparator")


# ---------------------------------------------------------------------------
# random generators


def random_masses(rng: np.random.Generator, n: int, backend: str = RATIONAL, allow_zero: bool = False) -> list:
    lo = 0 if allow_zero else 1
    w = rng.integers(lo, 10, size=n, endpoint=True)
    if w.sum() == 0:
        w[0] = 1
    total = int(w.sum())
    masses = [_num(int(x), total, backend) for x in w]
    if backend != RATIONAL:
        masses[-1] = 1.0 - sum(masses[:-1])
    return masses


def random_space(rng: np.random.Generator, n: int, backend: str = RATIONAL, allow_zero: bool = False) -> FiniteSpace:
    return FiniteSpace([f"x{i}" for i in range(1, n + 1)], random_masses(rng, n, backend, allow_zero))


def random_profile(
    rng: np.random.Generator,
    regime: str,
    backend: str = RATIONAL,
    min_atoms: int = 2,
    max_atoms: int = 5,
    max_tries: int = 10_000,
) -> RandomVariable:
    """Random bounded profile with values in ``[0, 3]`` (step 1/100) whose mean
    lies in the requested regime: below 1, above 1, or exactly 1."""
    for _ in range(max_tries):
        n = int(rng.integers(min_atoms, max_atoms, endpoint=True))
        space = random_space(rng, n, backend)
        if regime == BOUNDARY:
            Y = _boundary_profile(rng, space, backend)
            if Y is not None:
                return Y
            continue
        vals = [_num(int(k), 100, backend) for k in rng.integers(0, 300, size=n, endpoint=True)]
        Y = RandomVariable(space, vals)
        m = expectation(Y)
        if (regime == SUBCRITICAL and m < 1) or (regime == SUPERCRITICAL and m > 1):
            return Y
    raise RuntimeError(f"could not draw a {regime} profile")


def _boundary_profile(rng, space, backend):
    # draw all but the last value, then solve for a last value giving mean 1
    n = len(space)
    vals = [_num(int(k), 100, backend) for k in rng.integers(0, 300, size=n - 1, endpoint=True)]
    partial = sum(m * v for m, v in zip(space.masses, vals))
    last = (1 - partial) / space.masses[-1]
    if not 0 <= last <= 3:
        return None
    return RandomVariable(space, vals + [last])


def random_profiles(n: int, regime: str, seed: int = 0, backend: str = RATIONAL) -> list:
    rng = np.random.default_rng([seed, hash_regime(regime)])
    return [random_profile(rng, regime, backend) for _ in range(n)]


def hash_regime(regime: str) -> int:
    return {SUBCRITICAL: 1, SUPERCRITICAL: 2, BOUNDARY: 3}[regime]


def random_level(rng: np.random.Generator, space: FiniteSpace, distinct: int | None = None) -> DataDependentLevel:
    """Levels in ``{1/100, ..., 99/100}``; ``distinct`` caps the number of values."""
    backend = space.backend
    if distinct:
        pool = rng.integers(1, 99, size=distinct, endpoint=True)
        ks = rng.choice(pool, size=len(space))
    else:
        ks = rng.integers(1, 99, size=len(space), endpoint=True)
    return DataDependentLevel(space, [_num(int(k), 100, backend) for k in ks])


def random_threshold_family(rng: np.random.Generator, space: FiniteSpace) -> ThresholdFamily:
    """Critical levels mixing the sentinel, zero and grid values in (0, 1)."""
    backend = space.backend
    kappa = []
    for _ in range(len(space)):
        u = rng.random()
        if u < 0.45:
            kappa.append(NEVER)
        elif u < 0.5:
            kappa.append(to_number(0, backend))
        else:
            kappa.append(_num(int(rng.integers(1, 99, endpoint=True)), 100, backend))
    return ThresholdFamily(space, kappa)


def random_coupled_family(rng: np.random.Generator, space: FiniteSpace, deterministic: bool = False) -> CoupledFamily:
    backend = space.backend
    if deterministic:
        return CoupledFamily(space, [to_number(int(b), backend) for b in rng.integers(0, 1, size=len(space), endpoint=True)])
    return CoupledFamily(space, [_num(int(k), 20, backend) for k in rng.integers(0, 20, size=len(space), endpoint=True)])


def random_scenario(rng: np.random.Generator, backend: str = RATIONAL, max_atoms: int = 8) -> Scenario:
    """Random space, family (either form) and data-dependent level."""
    n = int(rng.integers(1, max_atoms, endpoint=True))
    space = random_space(rng, n, backend, allow_zero=rng.random() < 0.2)
    if rng.random() < 0.5:
        phi = random_threshold_family(rng, space)
    else:
        phi = random_coupled_family(rng, space)
    at = random_level(rng, space, distinct=int(rng.integers(1, n, endpoint=True)))
    return Scenario(space, phi, {"alpha_tilde": at}, "random")


def scenario_corpus(n: int = 500, seed: int = 0, backend: str = RATIONAL) -> list:
    rng = np.random.default_rng(seed)
    return [random_scenario(rng, backend) for _ in range(n)]
