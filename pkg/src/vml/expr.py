"""Tiny arithmetic-expression language for coefficient and parameter rules.

Grammar: numeric constants, the variable ``n`` (plus ``u`` for quantile
rules), ``+ - * / ^``, parentheses and the functions ``sqrt``, ``log``,
``exp``, ``abs``; the constant ``pi``.  ``^`` is exponentiation.

>>> r = Rule("2^(-n)")
>>> r(np.array([1, 2, 3]))
array([0.5  , 0.25 , 0.125])
"""
from __future__ import annotations

import ast
from functools import cached_property
from typing import Callable

import numpy as np
import sympy

from .errors import ConfigError

_FUNCS = {"sqrt": np.sqrt, "log": np.log, "exp": np.exp, "abs": np.abs}
_SYMPY_FUNCS = {"sqrt": sympy.sqrt, "log": sympy.log, "exp": sympy.exp, "abs": sympy.Abs}
_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)

N_SYMBOL = sympy.Symbol("n", positive=True, integer=True)
U_SYMBOL = sympy.Symbol("u", positive=True)


def parse(text: str, variables: tuple[str, ...] = ("n",)) -> ast.Expression:
    """Parse and whitelist-check an expression; raises ConfigError."""
    if not isinstance(text, str) or not text.strip():
        raise ConfigError("empty rule expression")
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse rule {text!r}: {exc.msg}") from None
    allowed_names = set(variables) | set(_FUNCS) | {"pi"}
    for node in ast.walk(tree):
        if isinstance(node, (ast.Expression, ast.Load, ast.BinOp, ast.UnaryOp, ast.USub, ast.UAdd) + _BINOPS):
            continue
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            continue
        if isinstance(node, ast.Name) and node.id in allowed_names:
            continue
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            continue
        raise ConfigError(f"unsupported syntax {type(node).__name__} in rule {text!r}")
    return tree


class Rule:
    """A total, deterministic map ``n -> value`` evaluated on integer arrays.

    Built either from an expression string (which also yields a sympy form for
    asymptotic analysis) or from a vectorized Python callable.
    """

    def __init__(self, source: str | float | int | Callable[[np.ndarray], np.ndarray], label: str | None = None):
        if isinstance(source, (int, float)) and not isinstance(source, bool):
            source = repr(float(source))
        if isinstance(source, str):
            tree = parse(source)
            self.text: str | None = source
            self._code = compile(tree, "<rule>", "eval")
            self._fn = None
        elif callable(source):
            self.text = None
            self._code = None
            self._fn = source
        else:
            raise ConfigError(f"rule must be an expression or callable, got {type(source).__name__}")
        self.label = label or (self.text if self.text is not None else getattr(source, "__name__", "rule"))

    def __call__(self, n) -> np.ndarray:
        n_arr = np.asarray(n)
        if self._code is not None:
            env = {"n": n_arr.astype(np.float64), "pi": np.pi, **_FUNCS}
            with np.errstate(all="ignore"):
                out = eval(self._code, {"__builtins__": {}}, env)
        else:
            out = self._fn(n_arr)
        return np.broadcast_to(np.asarray(out, dtype=np.result_type(out, np.float64)), n_arr.shape).copy()

    @cached_property
    def sympy_expr(self) -> sympy.Expr | None:
        if self.text is None:
            return None
        return to_sympy(self.text)

    def __repr__(self) -> str:
        return f"Rule({self.label!r})"


def to_sympy(text: str, variables: tuple[str, ...] = ("n",)) -> sympy.Expr:
    tree = parse(text, variables)
    env = {"n": N_SYMBOL, "u": U_SYMBOL, "pi": sympy.pi, **_SYMPY_FUNCS}
    return sympy.sympify(eval(compile(tree, "<rule>", "eval"), {"__builtins__": {}}, env))


def compile_unary(text: str, variable: str) -> Callable[[np.ndarray], np.ndarray]:
    """Compile an expression in a single variable other than ``n``."""
    code = compile(parse(text, (variable,)), "<rule>", "eval")

    def fn(x):
        with np.errstate(all="ignore"):
            return eval(code, {"__builtins__": {}}, {variable: np.asarray(x, dtype=np.float64), "pi": np.pi, **_FUNCS})

    return fn
