import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from posthoc_lab.backend import (
    BACKEND_ENV,
    DOUBLE,
    INF,
    RATIONAL,
    close,
    div,
    exact_sum,
    format_number,
    is_exact,
    leq,
    mul,
    reciprocal,
    resolve_backend,
    to_number,
)

fractions = st.fractions(min_value=-100, max_value=100, max_denominator=50)


class TestToNumber:
    def test_strings(self):
        assert to_number("3/4") == Fraction(3, 4)
        assert to_number("0.01") == Fraction(1, 100)
        assert to_number("inf") == INF

    def test_float_goes_through_repr(self):
        assert to_number(0.01) == Fraction(1, 100)
        assert to_number(0.1) != Fraction(0.1)

    def test_double_backend(self):
        x = to_number("1/4", DOUBLE)
        assert isinstance(x, float) and x == 0.25

    @given(fractions)
    def test_format_roundtrip(self, q):
        assert to_number(format_number(q)) == q


def test_format_number_infinity():
    assert format_number(INF) == "inf"
    assert to_number(format_number(INF)) == INF


def test_is_exact():
    assert is_exact(Fraction(1, 3)) and is_exact(2)
    assert not is_exact(0.5)


def test_leq_exact_has_no_tolerance():
    tiny = Fraction(1, 10**15)
    assert not leq(Fraction(1, 2) + tiny, Fraction(1, 2))


def test_leq_double_tolerance():
    assert leq(0.5 + 1e-13, 0.5)
    assert not leq(0.5 + 1e-9, 0.5)
    assert close(0.1 + 0.2, 0.3)


def test_reciprocal_and_infinity():
    assert reciprocal(0) == INF
    assert reciprocal(Fraction(1, 50)) == 50
    assert reciprocal(INF) == 0


def test_mul_zero_times_infinity_is_zero():
    assert mul(0, INF) == 0
    assert mul(INF, Fraction(0)) == 0
    assert not math.isnan(mul(0.0, INF))
    assert mul(Fraction(1, 2), INF) == INF


def test_mul_keeps_the_zero_type():
    assert isinstance(mul(Fraction(0), 3), Fraction)
    assert isinstance(mul(0.0, Fraction(1, 2)), float)


def test_div_stays_exact_for_ints():
    assert div(1, 3) == Fraction(1, 3)
    assert isinstance(div(0, 1), Fraction)
    assert isinstance(div(1.0, 4), float)


@given(st.lists(fractions, max_size=60))
def test_exact_sum_matches_sum(values):
    assert exact_sum(values) == sum(values, Fraction(0))


def test_exact_sum_falls_back_for_floats_and_infinity():
    vals = [Fraction(1, 3)] * 20
    assert exact_sum(vals + [INF]) == INF
    assert exact_sum(vals + [0.5]) == pytest.approx(20 / 3 + 0.5)


class TestResolveBackend:
    def test_default_is_rational(self):
        assert resolve_backend(None) == RATIONAL

    def test_env_var_wins(self, monkeypatch):
        monkeypatch.setenv(BACKEND_ENV, DOUBLE)
        assert resolve_backend(None) == DOUBLE
        assert resolve_backend(RATIONAL) == DOUBLE

    def test_bad_env_value(self, monkeypatch):
        monkeypatch.setenv(BACKEND_ENV, "quad")
        with pytest.raises(ValueError):
            resolve_backend(None)
