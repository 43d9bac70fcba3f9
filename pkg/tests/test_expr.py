import numpy as np
import pytest
import sympy

from vml.errors import ConfigError
from vml.expr import N_SYMBOL, Rule, compile_unary, parse


@pytest.mark.parametrize(
    "text, n, expected",
    [
        ("1/n", 4, 0.25),
        ("2^-n", 3, 0.125),
        ("sqrt(n)*log(n)", np.e**2, np.e * 2),
        ("-(n+1)^2", 2, -9.0),
        ("3", 10, 3.0),
    ],
)
def test_rule_values(text, n, expected):
    assert Rule(text)(np.array([n]))[0] == pytest.approx(expected)


def test_rule_vectorizes_constants():
    assert Rule("3")(np.arange(1, 5)).shape == (4,)


@pytest.mark.parametrize("bad", ["__import__('os')", "n.real", "sin(n)", "x+1", "n if n else 1", "[n]", "n^"])
def test_rejects_outside_sublanguage(bad):
    with pytest.raises(ConfigError):
        Rule(bad)


def test_sympy_conversion():
    assert sympy.simplify(Rule("1/(n*log(n+1)^2)").sympy_expr - 1 / (N_SYMBOL * sympy.log(N_SYMBOL + 1) ** 2)) == 0
    assert Rule("1").sympy_expr.is_number


def test_callable_rule_has_no_symbolic_form():
    r = Rule(lambda n: 1.0 / n, label="recip")
    assert r.sympy_expr is None
    assert r(np.array([2.0]))[0] == 0.5


def test_compile_unary():
    q = compile_unary("-log(1-u)", "u")
    assert q(np.array([0.5]))[0] == pytest.approx(np.log(2))


def test_parse_returns_expression():
    assert parse("n+1").body is not None
