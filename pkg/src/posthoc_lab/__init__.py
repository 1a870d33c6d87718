"""Validity of hypothesis tests at data-dependent significance levels, checked
exactly on finite probability spaces."""

from .backend import DOUBLE, INF, RATIONAL
from .evidence import NON_REJECT, Decision, compare, numeric_rep, reject_at
from .finprob import (
    FiniteSpace,
    Partition,
    RandomVariable,
    conditional_expectation,
    esssup,
    expectation,
    quantile,
)
from .testfam import (
    CoupledFamily,
    DataDependentLevel,
    ThresholdFamily,
    classical_validity,
    conditioning_partition,
    dominates,
    evaluate,
)
from .validity import (
    ESSSUP_RHO,
    EXPECTATION_RHO,
    MENU,
    CertaintyEquivalent,
    LossFunction,
    conditional_loss_profile,
    expected_distortion_ratio,
    general_validity,
    mean_level_validity,
    normalize,
    strong_conditional_validity,
)
from .axioms import (
    AuditReport,
    audit_composite,
    check_monotonicity,
    check_nesting,
    check_preservation,
    dominated_level_example,
    replicate_subcritical,
    replicate_supercritical,
)
from .evalue import (
    EValue,
    closure,
    evalue_of_family,
    posthoc_approximation,
    posthoc_validity,
    implication_harness,
)

__version__ = "0.1.0"

__all__ = [
    "FiniteSpace",
    "Partition",
    "RandomVariable",
    "conditional_expectation",
    "esssup",
    "expectation",
    "quantile",
    "CoupledFamily",
    "DataDependentLevel",
    "ThresholdFamily",
    "classical_validity",
    "conditioning_partition",
    "dominates",
    "evaluate",
    "ESSSUP_RHO",
    "EXPECTATION_RHO",
    "MENU",
    "CertaintyEquivalent",
    "LossFunction",
    "conditional_loss_profile",
    "expected_distortion_ratio",
    "general_validity",
    "mean_level_validity",
    "normalize",
    "strong_conditional_validity",
    "AuditReport",
    "audit_composite",
    "check_monotonicity",
    "check_nesting",
    "check_preservation",
    "dominated_level_example",
    "replicate_subcritical",
    "replicate_supercritical",
    "EValue",
    "closure",
    "evalue_of_family",
    "posthoc_approximation",
    "posthoc_validity",
    "implication_harness",
    "DOUBLE",
    "INF",
    "RATIONAL",
    "NON_REJECT",
    "Decision",
    "compare",
    "numeric_rep",
    "reject_at",
]
