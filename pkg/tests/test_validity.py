from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posthoc_lab.backend import DOUBLE, INF
from posthoc_lab.finprob import FiniteSpace, RandomVariable, expectation
from posthoc_lab.scenarios import mean_level_comparator_scenario
from posthoc_lab.testfam import NEVER, CoupledFamily, DataDependentLevel, ThresholdFamily, evaluate
from posthoc_lab.validity import (
    ESSSUP_RHO,
    EXPECTATION_RHO,
    MENU,
    CertaintyEquivalent,
    InvalidThresholdError,
    LossFunction,
    affine_transform,
    conditional_loss_profile,
    expected_distortion_ratio,
    expected_loss_validity,
    general_notion,
    general_validity,
    loss_from_json,
    mean_level_validity,
    normalize,
    notion_from_json,
    parse_rho,
    power_mean,
    rho_from_json,
    strong_conditional_validity,
)

from strategies import scenarios, spaces, variables

F = Fraction
pytestmark = pytest.mark.filterwarnings("ignore::posthoc_lab.finprob.ZeroMassCellWarning")

nonneg = st.fractions(min_value=0, max_value=20, max_denominator=12)


def loss_profile_oracle(phi, at, L):
    """Per-level conditional loss, from sums over each level's preimage."""
    prof = evaluate(phi, at)
    out = []
    for a in at.levels:
        cell = [i for i, b in enumerate(at.levels) if b == a]
        mass = sum((phi.space.masses[i] for i in cell), F(0))
        if mass == 0:
            out.append(L.at_nonreject)
            continue
        rej = sum((phi.space.masses[i] * prof.reject_prob[i] for i in cell), F(0)) / mass
        out.append(L.at_nonreject + rej * (L.at_reject(a) - L.at_nonreject))
    return out


class TestLoss:
    def test_canonical(self):
        L = LossFunction.canonical()
        assert (L.at_nonreject, L(F(1, 20)), L.threshold) == (0, 20, 1)
        assert L.is_canonical_on([F(1, 100), F(1, 2)])

    def test_threshold_must_exceed_nonreject_loss(self):
        with pytest.raises(InvalidThresholdError):
            LossFunction(1, lambda a: 1 / a, 1)

    def test_table_loss_and_normalization(self):
        L = LossFunction.from_table(2, 5, [(F(1, 10), 32), (F(1, 2), 8)])
        N = normalize(L)
        assert (N.at_nonreject, N.threshold) == (0, 1)
        assert N(F(1, 10)) == 10 and N(F(1, 2)) == 2
        assert L.is_canonical_on([F(1, 10), F(1, 2)])
        assert L.is_increasing_on([F(1, 10), F(1, 2)])
        with pytest.raises(KeyError):
            L(F(1, 3))

    def test_json_roundtrip(self):
        L = LossFunction.from_table(F(1, 2), 3, [(F(1, 10), 7)])
        back = loss_from_json(L.to_json())
        assert back(F(1, 10)) == 7 and back.threshold == 3
        assert loss_from_json({"canonical": True, "scale": "11/10"})(F(1, 10)) == 11

    def test_scaled_canonical_is_not_canonical(self):
        assert not LossFunction.canonical(F(11, 10)).is_canonical_on([F(1, 2)])


class TestCertaintyEquivalents:
    @given(spaces(), nonneg)
    def test_every_menu_entry_fixes_constants(self, s, c):
        for rho in MENU:
            assert rho.fixes(s, c)

    def test_power_mean_is_exact_for_perfect_squares(self):
        X = RandomVariable(FiniteSpace.uniform("ab"), [1, 7])
        assert power_mean(X, 2) == 5
        assert isinstance(power_mean(X, 2), Fraction)

    def test_power_mean_irrational_falls_back_to_float(self):
        X = RandomVariable(FiniteSpace.uniform("ab"), [0, 1])
        assert power_mean(X, 2) == pytest.approx(0.5**0.5)

    @given(variables(values=nonneg))
    def test_power_mean_ordering(self, X):
        assert expectation(X) <= power_mean(X, 2) + 1e-12

    def test_continuity_flag(self):
        flags = {rho.name: rho.continuous_from_below for rho in MENU}
        assert flags == {
            "expectation": True,
            "esssup": True,
            "power_mean(2)": True,
            "quantile(1/2)": False,
            "quantile(9/10)": False,
        }

    def test_parse(self):
        assert parse_rho("power-mean:2") == CertaintyEquivalent("power_mean", 2)
        assert parse_rho("quantile:0.9") == CertaintyEquivalent("quantile", F(9, 10))
        with pytest.raises(ValueError):
            parse_rho("median")
        with pytest.raises(ValueError):
            parse_rho("quantile:1")

    def test_json_roundtrip(self):
        for rho in MENU:
            assert rho_from_json(rho.to_json()) == rho


class TestConditionalLoss:
    @given(scenarios())
    def test_matches_per_cell_oracle(self, case):
        phi, at = case
        L = LossFunction.canonical()
        assert list(conditional_loss_profile(phi, at, L).values) == loss_profile_oracle(phi, at, L)

    @given(scenarios())
    def test_expected_loss_equals_general_expectation(self, case):
        # conditioning does not change the expectation
        phi, at = case
        assert expected_loss_validity(phi, at).score == general_validity(phi, at).score

    @given(scenarios())
    def test_distortion_ratio_equals_expectation_score(self, case):
        phi, at = case
        assert expected_distortion_ratio(phi, at) == general_validity(phi, at, EXPECTATION_RHO).score

    @given(scenarios())
    def test_strong_conditional_equals_esssup(self, case):
        phi, at = case
        s, e = strong_conditional_validity(phi, at), general_validity(phi, at, ESSSUP_RHO)
        assert s.passed == e.passed
        assert s.score == e.score


class TestGeneralValidity:
    def test_constant_level_reduces_to_classical(self):
        s = FiniteSpace.uniform(range(10))
        phi = CoupledFamily(s, [F(1, 2)] * 3 + [0] * 7)
        # P(reject) = 3/20
        assert general_validity(phi, DataDependentLevel.constant(s, F(3, 20))).passed
        assert not general_validity(phi, DataDependentLevel.constant(s, F(1, 10))).passed

    @settings(max_examples=60)
    @given(scenarios(), st.fractions(min_value=F(1, 10), max_value=10, max_denominator=10),
           st.fractions(min_value=-10, max_value=10, max_denominator=10))
    def test_affine_invariance(self, case, a, b):
        phi, at = case
        base = LossFunction.canonical()
        moved = affine_transform(base, a, b)
        for rho in (EXPECTATION_RHO, ESSSUP_RHO, parse_rho("quantile:1/2")):
            r0, r1 = general_validity(phi, at, rho, base), general_validity(phi, at, rho, moved)
            assert r0.passed == r1.passed
            assert r1.score == (INF if r0.score == INF else a * r0.score + b)

    def test_affine_scale_must_be_positive(self):
        with pytest.raises(ValueError):
            affine_transform(LossFunction.canonical(), 0, 1)

    def test_double_backend_agrees(self):
        exact_space = FiniteSpace(["a", "b", "c"], [F(1, 5), F(3, 10), F(1, 2)])
        float_space = FiniteSpace(["a", "b", "c"], [0.2, 0.3, 0.5])
        kappa = [F(1, 20), F(0), F(NEVER)]
        levels = [F(1, 10), F(1, 4), F(1, 4)]
        for rho in MENU:
            r = general_validity(ThresholdFamily(exact_space, kappa), DataDependentLevel(exact_space, levels), rho)
            d = general_validity(
                ThresholdFamily(float_space, [float(k) for k in kappa]),
                DataDependentLevel(float_space, [float(x) for x in levels]),
                rho,
            )
            assert r.passed == d.passed
            assert float(d.score) == pytest.approx(float(r.score), abs=1e-12)
            assert float_space.backend == DOUBLE


def test_mean_level_validity():
    scen = mean_level_comparator_scenario()
    res = mean_level_validity(scen.phi, scen.levels["alpha_tilde"])
    assert res.passed
    assert (res.score, res.bound) == (F(3, 10), F(101, 200))


def test_notion_json_roundtrip():
    n = general_notion(parse_rho("quantile:0.5"), LossFunction.canonical(F(9, 10)))
    back = notion_from_json(n.to_json())
    assert back.name == n.name
    assert notion_from_json({"name": "mean_level"}).name == "mean_level"
    assert notion_from_json({"name": "strong_conditional"}).name == "strong_conditional"
