from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from posthoc_lab.backend import INF
from posthoc_lab.evidence import NON_REJECT, Decision, compare, from_numeric, numeric_rep, reject_at

positive_levels = st.fractions(min_value=0, max_value=1, max_denominator=200).filter(lambda q: q > 0)
decisions = st.one_of(st.just(NON_REJECT), st.just(reject_at(Fraction(0))), positive_levels.map(reject_at))


def test_numeric_representation():
    assert numeric_rep(NON_REJECT) == 0
    assert numeric_rep(reject_at(Fraction(1, 50))) == 50
    assert numeric_rep(reject_at(0)) == INF


def test_smaller_level_is_stronger():
    assert reject_at(Fraction(1, 100)) > reject_at(Fraction(1, 20)) > NON_REJECT
    assert reject_at(0) > reject_at(Fraction(1, 10**9))


def test_invalid_decisions():
    with pytest.raises(ValueError):
        reject_at(Fraction(-1, 2))
    with pytest.raises(ValueError):
        Decision("nonreject", Fraction(1, 2))
    with pytest.raises(ValueError):
        Decision("maybe")


def test_double_levels_compare_within_tolerance():
    assert compare(reject_at(0.1 + 0.2), reject_at(0.3)) == 0
    assert compare(reject_at(0.3 + 1e-9), reject_at(0.3)) == -1


@given(decisions, decisions)
def test_compare_agrees_with_numeric_rep(d1, d2):
    a, b = numeric_rep(d1), numeric_rep(d2)
    assert compare(d1, d2) == (a > b) - (a < b)


@given(decisions, decisions)
def test_compare_is_antisymmetric(d1, d2):
    assert compare(d1, d2) == -compare(d2, d1)


@given(decisions)
def test_from_numeric_inverts(d):
    assert from_numeric(numeric_rep(d)) == d


@given(decisions)
def test_json_roundtrip(d):
    assert Decision.from_json(d.to_json()) == d
