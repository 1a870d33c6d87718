"""Arithmetic backends.

Two number types are supported: exact rationals (``fractions.Fraction``) and
doubles. Infinity is always the float ``math.inf``; ``Fraction`` compares and
adds correctly against it, so mixed values behave as extended reals.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Union

RATIONAL = "rational"
DOUBLE = "double"
BACKENDS = (RATIONAL, DOUBLE)

#: Environment variable that overrides the arithmetic backend.
BACKEND_ENV = "POSTHOC_LAB_BACKEND"

INF = math.inf

#: Absolute tolerance used for comparisons whenever a double is involved.
DOUBLE_TOL = 1e-12

Number = Union[int, Fraction, float]


def default_backend() -> str:
    value = os.environ.get(BACKEND_ENV, RATIONAL).strip().lower()
    if value not in BACKENDS:
        raise ValueError(f"{BACKEND_ENV}={value!r}; expected one of {BACKENDS}")
    return value


def resolve_backend(backend: str | None) -> str:
    """Return the effective backend; the environment variable wins when set."""
    if os.environ.get(BACKEND_ENV):
        return default_backend()
    if backend is None:
        return RATIONAL
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    return backend


def is_exact(x) -> bool:
    t = type(x)
    if t is Fraction or t is int:
        return True
    if t is float:
        return False
    return isinstance(x, Rational)


def to_number(x, backend: str = RATIONAL) -> Number:
    """Convert ``x`` to the backend's number type.

    Strings are parsed (``"p/q"``, decimals, ``"inf"``). Floats become rationals
    through their shortest decimal repr, so ``0.01`` maps to ``1/100``.
    """
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return INF
        x = Fraction(s)
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, float):
        if math.isinf(x):
            if x < 0:
                raise ValueError("negative infinity is not an extended nonnegative value")
            return INF
        if math.isnan(x):
            raise ValueError("NaN is not a valid value")
        if backend == RATIONAL:
            return Fraction(repr(x))
        return x
    if backend == DOUBLE:
        return float(x)
    if isinstance(x, Rational):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to a number")


def format_number(x) -> Union[str, float, int]:
    """JSON form of a number: rationals as ``"p/q"``, infinity as ``"inf"``."""
    if isinstance(x, float):
        return "inf" if math.isinf(x) else x
    if isinstance(x, Rational):
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    raise TypeError(f"cannot format {type(x).__name__}")


def leq(a, b) -> bool:
    """``a <= b``, exact for rationals and with ``DOUBLE_TOL`` slack otherwise."""
    if is_exact(a) and is_exact(b):
        return a <= b
    if a == b:
        return True
    if math.isinf(a) or math.isinf(b):
        return a <= b
    return a <= b + DOUBLE_TOL * max(1.0, abs(b))


def close(a, b) -> bool:
    if is_exact(a) and is_exact(b):
        return a == b
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= DOUBLE_TOL * max(1.0, abs(a), abs(b))


def reciprocal(x) -> Number:
    """``1/x`` with ``1/0 = inf`` and ``1/inf = 0``."""
    if x == 0:
        return INF
    if isinstance(x, float) and math.isinf(x):
        return 0
    if is_exact(x):
        return Fraction(1) / x
    return 1.0 / x


def mul(a, b) -> Number:
    """Product with the measure-theoretic convention ``0 * inf = 0``."""
    if a == 0 or b == 0:
        # return the zero operand itself so its number type survives
        return a if a == 0 else b
    return a * b


def exact_sum(values: Iterable) -> Number:
    """Sum that adds rationals by shared denominator using integer arithmetic.

    Much faster than repeated ``Fraction`` addition when many terms share a
    denominator; falls back to ``sum`` once a float or infinity appears.
    """
    values = list(values)
    if len(values) < 16:
        return sum(values, 0)
    by_den: dict = {}
    for v in values:
        if isinstance(v, int):
            by_den[1] = by_den.get(1, 0) + v
        elif isinstance(v, Fraction):
            by_den[v.denominator] = by_den.get(v.denominator, 0) + v.numerator
        else:
            return sum(values, 0)
    total = Fraction(0)
    for den, num in by_den.items():
        total += Fraction(num, den)
    return total


def div(a, b) -> Number:
    """``a / b`` that stays exact when both operands are rational."""
    if is_exact(a) and is_exact(b):
        return Fraction(a) / Fraction(b)
    return a / b
