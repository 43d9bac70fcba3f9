import math

import pytest
import sympy

from vml.expr import N_SYMBOL as n
from vml.series import classify, first_index_below, integral_tail

CASES = [
    (2**-n, True),
    (1 / n**2, True),
    (1 / n, False),
    (1 / (n * sympy.log(n + 1) ** 2), True),
    (1 / (n * sympy.log(n + 1)), False),
    (n**sympy.Rational(-3, 2), True),
    (1 / sympy.log(n + 2), False),
    (sympy.Integer(0), True),
    (sympy.Integer(3), False),
]


@pytest.mark.parametrize("expr, converges", CASES)
def test_classify_against_known_series(expr, converges):
    assert classify(expr).verdict == ("converges" if converges else "diverges")


@pytest.mark.parametrize("expr, _", [c for c in CASES if c[0] != 0][:4])
def test_classify_agrees_with_sympy(expr, _):
    ours = classify(expr).verdict == "converges"
    assert ours == bool(sympy.Sum(expr, (n, 1, sympy.oo)).is_convergent())


def test_missing_expression_is_unknown():
    assert classify(None).verdict == "unknown"


def test_integral_tail_closed_forms():
    assert integral_tail(lambda t: t**-2.0, 100) == pytest.approx(0.01, rel=1e-8)
    assert integral_tail(lambda t: 2.0**-t, 10) == pytest.approx(2.0**-10 / math.log(2), rel=1e-8)
    assert integral_tail(lambda t: 1 / t, 10) == math.inf


def test_first_index_below_is_minimal():
    tail = lambda N: 1.0 / N
    N = first_index_below(tail, 1e-3)
    assert tail(N) <= 1e-3
    assert N <= 1024
