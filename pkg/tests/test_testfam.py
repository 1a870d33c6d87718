from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from posthoc_lab.evidence import NON_REJECT, compare, reject_at
from posthoc_lab.finprob import FiniteSpace
from posthoc_lab.testfam import (
    NEVER,
    CoupledFamily,
    DataDependentLevel,
    RandomizedComparisonError,
    ThresholdFamily,
    classical_validity,
    conditioning_partition,
    dominates,
    evaluate,
    family_from_json,
)

from strategies import coupled_families, data_dependent_levels, spaces, threshold_families

F = Fraction


@pytest.fixture
def three():
    return FiniteSpace(["a", "b", "c"], [F(1, 2), F(1, 4), F(1, 4)])


class TestThresholdFamily:
    def test_rejects_below_critical_level(self, three):
        phi = ThresholdFamily(three, [F(1, 10), F(0), F(NEVER)])
        assert phi.reject_probability(F(1, 20)) == (0, 1, 0)
        assert phi.reject_probability(F(1, 10)) == (1, 1, 0)
        assert phi.reject_probability(F(99, 100)) == (1, 1, 0)

    def test_decision(self, three):
        phi = ThresholdFamily(three, [F(1, 10), F(0), F(NEVER)])
        assert phi.decision("a", F(1, 5)) == reject_at(F(1, 5))
        assert phi.decision("c", F(1, 5)) == NON_REJECT

    def test_classical_validity(self, three):
        phi = ThresholdFamily(three, [F(1, 10), F(0), F(NEVER)])
        assert classical_validity(phi, F(1, 4)).score == F(3, 4)
        only_b = ThresholdFamily(three, [F(NEVER), F(0), F(NEVER)])
        assert classical_validity(only_b, F(1, 4)).passed
        assert not classical_validity(only_b, F(1, 5)).passed

    def test_critical_level_range(self, three):
        with pytest.raises(ValueError):
            ThresholdFamily(three, [F(3, 2), F(0), F(1)])


class TestCoupledFamily:
    def test_same_event_at_every_level(self, three):
        phi = CoupledFamily(three, [F(1, 5), 0, 1])
        assert phi.rejection_probability(F(1, 100)) == phi.rejection_probability(F(1, 2)) == F(7, 20)
        assert not phi.deterministic

    def test_randomized_decision_cannot_be_read_pointwise(self, three):
        phi = CoupledFamily(three, [F(1, 5), 0, 1])
        prof = evaluate(phi, DataDependentLevel.constant(three, F(1, 2)))
        assert prof.decision("b") == NON_REJECT
        assert prof.decision("c") == reject_at(F(1, 2))
        with pytest.raises(RandomizedComparisonError):
            prof.decision("a")


class TestDataDependentLevel:
    def test_open_interval(self, three):
        with pytest.raises(ValueError):
            DataDependentLevel(three, [F(1, 2), F(1), F(1, 2)])
        with pytest.raises(ValueError):
            DataDependentLevel(three, [F(1, 2), F(0), F(1, 2)])

    def test_conditioning_partition_groups_equal_levels(self, three):
        at = DataDependentLevel(three, [F(1, 10), F(1, 5), F(1, 10)])
        assert conditioning_partition(at).as_sets() == {frozenset("ac"), frozenset("b")}
        assert at.distinct() == [F(1, 10), F(1, 5)]

    @given(st.data())
    def test_json_roundtrip(self, data):
        s = data.draw(spaces())
        at = data.draw(data_dependent_levels(s))
        assert DataDependentLevel.from_json(at.to_json(), s) == at


@given(st.data())
def test_family_json_roundtrip(data):
    s = data.draw(spaces())
    phi = data.draw(st.one_of(threshold_families(s), coupled_families(s)))
    back = family_from_json(phi.to_json(), s)
    alpha = F(3, 10)
    assert back.reject_probability(alpha) == phi.reject_probability(alpha)


def _pointwise_leq(phi, at1, at2):
    """Oracle: compare the two deterministic decisions outcome by outcome."""
    p1, p2 = evaluate(phi, at1), evaluate(phi, at2)
    return all(compare(p1.decision(o), p2.decision(o)) <= 0 for o in phi.space.outcomes)


class TestDominance:
    @given(st.data())
    def test_matches_pointwise_decisions(self, data):
        s = data.draw(spaces())
        phi = data.draw(threshold_families(s))
        at1, at2 = data.draw(data_dependent_levels(s)), data.draw(data_dependent_levels(s))
        assert dominates(phi, at1, at2) == _pointwise_leq(phi, at1, at2)

    @given(st.data())
    def test_is_a_preorder(self, data):
        s = data.draw(spaces())
        phi = data.draw(st.one_of(threshold_families(s), coupled_families(s)))
        a, b, c = (data.draw(data_dependent_levels(s)) for _ in range(3))
        assert dominates(phi, a, a)
        if dominates(phi, a, b) and dominates(phi, b, c):
            assert dominates(phi, a, c)

    def test_coupled_rule(self, three):
        phi = CoupledFamily(three, [F(1, 2), 0, 0])
        lo = DataDependentLevel(three, [F(1, 10), F(9, 10), F(9, 10)])
        hi = DataDependentLevel(three, [F(1, 5), F(1, 100), F(1, 100)])
        # only the first atom can reject, and there ``hi`` is the weaker level
        assert dominates(phi, hi, lo)
        assert not dominates(phi, lo, hi)
