from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posthoc_lab.axioms import (
    MONOTONICITY,
    PRESERVATION,
    PreconditionError,
    WrongRegimeError,
    audit_composite,
    audit_mean_level,
    check_monotonicity,
    check_nesting,
    check_preservation,
    default_suite,
    dominated_level_example,
    grid,
    recheck,
    rejection_at_or_below,
    replicate_subcritical,
    replicate_supercritical,
)
from posthoc_lab.backend import DOUBLE
from posthoc_lab.finprob import FiniteSpace, RandomVariable, expectation
from posthoc_lab.scenarios import BOUNDARY, random_profiles
from posthoc_lab.testfam import DataDependentLevel, ThresholdFamily, classical_validity
from posthoc_lab.validity import (
    ESSSUP_RHO,
    EXPECTATION_RHO,
    MENU,
    LossFunction,
    general_notion,
    general_validity,
    mean_level_notion,
    parse_rho,
    strong_notion,
)

from strategies import data_dependent_levels, spaces, threshold_families

F = Fraction
pytestmark = pytest.mark.filterwarnings("ignore::posthoc_lab.finprob.ZeroMassCellWarning")


def profile(values, masses=None):
    n = len(values)
    space = FiniteSpace([f"y{i}" for i in range(n)], masses or [F(1, n)] * n)
    return RandomVariable(space, [F(v) for v in values])


class TestNesting:
    @pytest.mark.parametrize("rho", MENU, ids=lambda r: r.name)
    def test_menu_nests_on_coarse_grid(self, rho):
        rep = check_nesting(rho, alpha_grid=grid(20, 1, 19), p_grid=grid(20, 0, 20))
        assert rep.passed
        assert rep.metadata["checked"] == 19 * 21

    def test_inflated_loss_rejects_a_classically_valid_test(self):
        rep = check_nesting(EXPECTATION_RHO, LossFunction.canonical(F(11, 10)))
        assert not rep.passed
        assert (rep.counterexample["alpha"], rep.counterexample["p"]) == ("1/100", "1/100")
        assert recheck(rep)

    def test_deflated_loss_accepts_an_invalid_test(self):
        rep = check_nesting(EXPECTATION_RHO, LossFunction.canonical(F(9, 10)))
        assert (rep.counterexample["alpha"], rep.counterexample["p"]) == ("9/100", "1/10")

    def test_double_backend(self):
        rep = check_nesting(ESSSUP_RHO, alpha_grid=grid(10, 1, 9, DOUBLE), p_grid=grid(10, 0, 10, DOUBLE),
                            backend=DOUBLE)
        assert rep.passed


class TestPreservation:
    @settings(max_examples=50)
    @given(st.data())
    def test_valid_threshold_family_preserves(self, data):
        s = data.draw(spaces(allow_zero=False))
        phi = data.draw(threshold_families(s))
        at = data.draw(data_dependent_levels(s, distinct=3))
        rep = check_preservation(phi, at, general_notion(), grid(10, 1, 9))
        assert rep.passed

    def test_vacuous_when_notion_rejects(self):
        ex = dominated_level_example(100)
        rep = check_preservation(ex.phi, ex.alpha1, general_notion(ESSSUP_RHO))
        assert rep.passed and rep.metadata["vacuous"]

    def test_rejection_at_or_below(self):
        s = FiniteSpace.uniform("abcd")
        phi = ThresholdFamily(s, [F(1, 20), F(1, 10), F(1), F(0)])
        at = DataDependentLevel(s, [F(1, 10), F(1, 5), F(1, 10), F(1, 2)])
        assert rejection_at_or_below(phi, at, F(1, 10)) == F(1, 4)
        assert rejection_at_or_below(phi, at, F(1, 2)) == F(3, 4)


class TestMonotonicity:
    def test_esssup_example(self):
        ex = dominated_level_example(100)
        rep = check_monotonicity(ex.phi, ex.alpha0, ex.alpha1, general_notion(ESSSUP_RHO))
        assert not rep.passed
        assert rep.metadata["valid_score"] == "1"
        assert rep.metadata["weaker_score"] == "50"
        assert recheck(rep)

    def test_expectation_passes_the_example(self):
        ex = dominated_level_example(100)
        assert check_monotonicity(ex.phi, ex.alpha0, ex.alpha1, general_notion()).passed

    def test_strong_conditional_also_fails(self):
        ex = dominated_level_example(100)
        assert not check_monotonicity(ex.phi, ex.alpha0, ex.alpha1, strong_notion()).passed

    def test_precondition(self):
        ex = dominated_level_example(100)
        with pytest.raises(PreconditionError):
            check_monotonicity(ex.phi, ex.alpha1, ex.alpha0)

    def test_example_requires_multiple_of_100(self):
        with pytest.raises(ValueError):
            dominated_level_example(150)


class TestSubcriticalBundle:
    def test_hand_computed_values(self):
        Y = profile([F(2, 5), F(6, 5)])
        b = replicate_subcritical(Y, delta=F(1, 4), a=F(1, 10))
        # a (1 + delta y / M) with M = 6/5
        assert b.alpha_tilde.levels == (F(1, 10) * (1 + F(1, 4) * F(1, 3)), F(1, 10) * F(5, 4))
        assert b.alpha_tilde.levels == (F(13, 120), F(1, 8))
        assert b.phi.r == (F(13, 300), F(3, 20))
        assert b.rejection_probability() == F(29, 300)
        assert all(b.check().values())

    @settings(max_examples=50)
    @given(st.integers(0, 10_000))
    def test_random_profiles(self, seed):
        for Y in random_profiles(3, "subcritical", seed=seed):
            b = replicate_subcritical(Y)
            assert b.profile().values == Y.values
            assert classical_validity(b.phi, b.a).passed
            assert all(b.check().values())

    def test_wrong_regime(self):
        with pytest.raises(WrongRegimeError):
            replicate_subcritical(profile([2, 2]))

    def test_delta_constraint(self):
        with pytest.raises(PreconditionError):
            replicate_subcritical(profile([F(4, 5), F(4, 5)]), delta=F(1, 2))

    def test_bad_table_loss(self):
        L = LossFunction.from_table(0, 1, [(F(1, 10), 10)])
        with pytest.raises((PreconditionError, KeyError)):
            replicate_subcritical(profile([F(1, 2), F(1, 2)]), L)


class TestSupercriticalBundle:
    def test_hand_computed_values(self):
        Y = profile([F(1, 2), 2])
        b = replicate_supercritical(Y, delta=F(1, 10), a=F(1, 5))
        assert b.alpha_tilde.levels == (F(39, 200), F(9, 50))
        assert b.rejection_probability() == F(183, 800)
        assert rejection_at_or_below(b.phi, b.alpha_tilde, b.a) == F(183, 800) > F(1, 5)
        assert all(b.check().values())

    @settings(max_examples=50)
    @given(st.integers(0, 10_000))
    def test_random_profiles(self, seed):
        for Y in random_profiles(3, "supercritical", seed=seed):
            b = replicate_supercritical(Y)
            assert b.profile().values == Y.values
            assert rejection_at_or_below(b.phi, b.alpha_tilde, b.a) > b.a

    def test_wrong_regime(self):
        with pytest.raises(WrongRegimeError):
            replicate_supercritical(profile([F(1, 2), F(1, 2)]))


class TestCompositeAudit:
    def test_expectation_passes(self):
        assert audit_composite(EXPECTATION_RHO, default_suite(60, seed=3)).passed

    @pytest.mark.parametrize("rho", MENU[1:], ids=lambda r: r.name)
    def test_others_fail_with_recheckable_counterexample(self, rho):
        rep = audit_composite(rho, default_suite(200, seed=0))
        assert not rep.passed
        assert rep.counterexample["property"] in (MONOTONICITY, PRESERVATION)
        assert recheck(rep)

    def test_esssup_first_violation_is_the_example(self):
        rep = audit_composite(ESSSUP_RHO, default_suite(20), stop_at_first=True)
        assert rep.counterexample["summary"]["index"] == 0
        assert rep.counterexample["bundle"]["Y"] == ["0", "50"]

    def test_deterministic(self):
        r1 = audit_composite(parse_rho("quantile:0.5"), default_suite(100, seed=5), seed=5)
        r2 = audit_composite(parse_rho("quantile:0.5"), default_suite(100, seed=5), seed=5)
        assert r1.to_json() == r2.to_json()

    def test_boundary_profiles_are_informative(self):
        suite = random_profiles(5, BOUNDARY, seed=1)
        assert all(expectation(Y) == 1 for Y in suite)
        rep = audit_composite(ESSSUP_RHO, suite)
        assert rep.passed
        assert rep.metadata["regimes"]["boundary"] == 5

    def test_non_nesting_loss_short_circuits(self):
        rep = audit_composite(EXPECTATION_RHO, default_suite(10), L=LossFunction.canonical(F(11, 10)))
        assert not rep.passed
        assert "skipped" in rep.metadata


def test_mean_level_audit_links_both_verdicts():
    from posthoc_lab.scenarios import mean_level_comparator_scenario

    scen = mean_level_comparator_scenario()
    rep = audit_mean_level(scen.phi, scen.levels["alpha_tilde"])
    assert rep.property == PRESERVATION and not rep.passed
    assert rep.metadata["mean_level"]["passed"]
    assert rep.counterexample["rejection_probability"] == "3/10"
    assert rep.counterexample["notion"] == mean_level_notion().name


def test_median_accepts_a_supercritical_bundle():
    Y = profile([F(1, 5), F(19, 10)])
    median = parse_rho("quantile:0.5")
    assert expectation(Y) == F(21, 20) and median(Y) == F(1, 5)
    b = replicate_supercritical(Y)
    assert general_validity(b.phi, b.alpha_tilde, median).passed
    assert rejection_at_or_below(b.phi, b.alpha_tilde, b.a) > b.a
    rep = audit_composite(median, [Y])
    assert not rep.passed and rep.counterexample["property"] == PRESERVATION
