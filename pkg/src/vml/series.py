"""Convergence certificates for series of nonnegative closed-form terms.

Two independent tools:

* :func:`classify` compares the term ``g(n)`` against the logarithmic scale
  ``n^-a (log n)^-b (log log n)^-c`` using symbolic limits.  This decides
  convergence or divergence of ``sum g(n)`` for every term on that scale.
* :func:`integral_tail` bounds ``sum_{n>N} g(n)`` by ``int_N^inf g`` once ``g`` is
  nonincreasing, integrating in ``log t`` so very large ``N`` stay cheap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
import sympy
from scipy import integrate

from .expr import N_SYMBOL

n = N_SYMBOL


@dataclass(frozen=True)
class SeriesClass:
    verdict: str  # "converges" | "diverges" | "unknown"
    scale: tuple = field(default_factory=tuple)
    reason: str = ""


def _limit(expr):
    try:
        val = sympy.limit(expr, n, sympy.oo)
    except Exception:  # sympy raises a zoo of exception types on hard limits
        return None
    if val in (sympy.oo, -sympy.oo):
        return val
    if val.is_real and val.is_finite:
        return val
    return None


def _compare(value, threshold=1):
    """-1, 0, +1 for value <, =, > threshold; None when undecidable."""
    if value is None:
        return None
    diff = sympy.nsimplify(value - threshold) if value.is_finite else value
    if diff == 0:
        return 0
    if diff.is_positive:
        return 1
    if diff.is_negative:
        return -1
    return None


@lru_cache(maxsize=512)
def _classify_cached(g: sympy.Expr) -> SeriesClass:
    if g == 0:
        return SeriesClass("converges", (), "identically zero")
    try:
        if sympy.simplify(g) == 0:
            return SeriesClass("converges", (), "identically zero")
    except Exception:
        pass
    logg = sympy.expand_log(sympy.log(g), force=True)
    loglog = sympy.log(sympy.log(n))
    l0 = _limit(logg / sympy.log(n))
    if l0 is None:
        return SeriesClass("unknown", (), "no power-scale limit")
    if l0 == -sympy.oo:
        return SeriesClass("converges", (sympy.oo,), "terms decay faster than every power of n")
    if l0 == sympy.oo:
        return SeriesClass("diverges", (-sympy.oo,), "terms grow faster than every power of n")
    a = -l0
    c = _compare(a)
    if c == 1:
        return SeriesClass("converges", (a,), f"terms ~ n^-{a}, exponent > 1")
    if c == -1:
        return SeriesClass("diverges", (a,), f"terms ~ n^-{a}, exponent < 1")
    if c is None:
        return SeriesClass("unknown", (a,), "power exponent undecidable")
    l1 = _limit((logg + sympy.log(n)) / loglog)
    if l1 is None:
        return SeriesClass("unknown", (1,), "no log-scale limit")
    if l1 in (sympy.oo, -sympy.oo):
        verdict = "converges" if l1 == -sympy.oo else "diverges"
        return SeriesClass(verdict, (1, -l1), "log factor dominates")
    b = -l1
    c = _compare(b)
    if c == 1:
        return SeriesClass("converges", (1, b), f"terms ~ 1/(n log^{b} n), exponent > 1")
    if c == -1:
        return SeriesClass("diverges", (1, b), f"terms ~ 1/(n log^{b} n), exponent < 1")
    if c is None:
        return SeriesClass("unknown", (1, b), "log exponent undecidable")
    l2 = _limit((logg + sympy.log(n) + loglog) / sympy.log(loglog))
    if l2 is None:
        return SeriesClass("unknown", (1, 1), "no log-log-scale limit")
    if l2 in (sympy.oo, -sympy.oo):
        verdict = "converges" if l2 == -sympy.oo else "diverges"
        return SeriesClass(verdict, (1, 1, -l2), "log-log factor dominates")
    cc = _compare(-l2)
    if cc == 1:
        return SeriesClass("converges", (1, 1, -l2), "log-log exponent > 1")
    if cc == -1:
        return SeriesClass("diverges", (1, 1, -l2), "log-log exponent < 1")
    return SeriesClass("unknown", (1, 1, -l2), "beyond the log-log scale")


def classify(g: sympy.Expr | None) -> SeriesClass:
    """Decide convergence of ``sum_{n>=1} g(n)`` for a nonnegative closed form ``g``."""
    if g is None:
        return SeriesClass("unknown", (), "no closed form available")
    return _classify_cached(sympy.sympify(g))


def eventually_nonincreasing(fn: Callable[[np.ndarray], np.ndarray], start: float, points: int = 400) -> bool:
    """Numerical check that ``fn`` is nonincreasing on a log grid beyond ``start``."""
    t = np.unique(np.exp(np.linspace(math.log(max(start, 1.0)), 690.0, points)))
    with np.errstate(all="ignore"):
        v = np.asarray(fn(t), dtype=float)
    v = np.where(np.isfinite(v), v, 0.0)
    return bool(np.all(np.diff(v) <= 1e-12 * np.maximum(np.abs(v[:-1]), 1e-300)))


def integral_tail(fn: Callable[[np.ndarray], np.ndarray], N: float) -> float:
    """Upper bound for ``sum_{n>N} g(n)`` by ``int_N^inf g(t) dt`` (g nonincreasing).

    The integral is taken in ``s = log t``; an upper cutoff at ``t = e^700`` is
    closed off with the bound ``g(e^700) * e^700`` only when that is tiny, else
    the tail is reported as infinite.
    """
    lo = math.log(max(N, 1.0))
    hi = 700.0

    def integrand(s):
        t = math.exp(s)
        with np.errstate(all="ignore"):
            v = float(np.asarray(fn(np.array([t])))[0])
        return v * t if np.isfinite(v) else 0.0

    breaks = np.linspace(lo, hi, 30)
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        val, _ = integrate.quad(integrand, a, b, limit=200)
        total += val
    edge = integrand(hi)
    if edge > 1e-12:
        return math.inf
    return total


def first_index_below(tail: Callable[[float], float], tol: float, max_log2: int = 996) -> float | None:
    """Smallest power of two ``N`` with ``tail(N) <= tol`` (None if beyond ``2**max_log2``).

    ``tail`` must be nonincreasing; the exponent is found by bisection.
    """
    if tail(1.0) <= tol:
        return 1.0
    if tail(2.0**max_log2) > tol:
        return None
    lo, hi = 0, max_log2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail(2.0**mid) <= tol:
            hi = mid
        else:
            lo = mid
    return 2.0**hi
