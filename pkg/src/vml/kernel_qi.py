"""Cameron-Martin shifts of Gaussian product measures.

For ``mu = prod N(0, sigma_n^2)`` a shift ``h`` is admissible exactly when
``sum h_n^2 / sigma_n^2 < inf``; then ``mu(. - h)`` has density

    rho_h(x) = exp(sum_n h_n x_n / sigma_n^2 - h_n^2 / (2 sigma_n^2))

with respect to ``mu``.  Otherwise the shifted measure is singular, which the
Hellinger products ``prod exp(-h_n^2 / (8 sigma_n^2))`` detect by tending to 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import sympy

from . import mutations
from .errors import UnsupportedMeasureError
from .linfun import CoeffSeq, Evaluator, three_series_test
from .measure import ProductMeasure, SampleBatch, TruncatedSample, sample_batch, stream_sums
from .series import classify, eventually_nonincreasing, integral_tail


class ShiftVector(CoeffSeq):
    """A translation direction ``n -> h_n`` (same construction as :class:`CoeffSeq`)."""


def _require_gaussian(m):
    if not isinstance(m, ProductMeasure) or m.kind != "gaussian":
        raise UnsupportedMeasureError("Cameron-Martin computations need a Gaussian product measure")


def _ratio_expr(h: CoeffSeq, m: ProductMeasure):
    var = m.variance_expr
    if h.expr is None or var is None:
        return None
    return sympy.simplify(h.expr**2 / var)


def _ratio_num(h: CoeffSeq, m: ProductMeasure):
    return lambda t: np.abs(h.rule(t)) ** 2 / m.variances(t)


# ---------------------------------------------------------------------------
# membership


@dataclass
class CMNorm:
    norm_sq: float
    membership: str  # member | non_member | inconclusive
    partial_sum: float
    n_probe: int
    tail_bound: float | None
    reason: str = ""

    def to_dict(self):
        return dict(self.__dict__)


def cameron_martin_norm(
    h: CoeffSeq, m: ProductMeasure, N_probe: int = 10_000, tail_hint: Callable[[float], float] | None = None
) -> CMNorm:
    """``sum h_n^2 / sigma_n^2`` with a membership verdict.

    The reported ``norm_sq`` adds a midpoint integral estimate of the tail to
    the partial sum; ``tail_bound`` is a rigorous upper bound on that tail.
    """
    _require_gaussian(m)
    n = np.arange(1, N_probe + 1)
    terms = np.abs(h.at(n)) ** 2 / m.variances(n)
    partial = float(terms.sum())
    if h.support_max is not None and h.support_max <= N_probe:
        return CMNorm(partial, "member", partial, N_probe, 0.0, "finite support")
    if tail_hint is not None:
        bound = float(tail_hint(N_probe))
        if math.isfinite(bound):
            return CMNorm(partial + bound, "member", partial, N_probe, bound, "tail hint")
    cls = classify(_ratio_expr(h, m))
    if cls.verdict == "converges":
        g = _ratio_num(h, m)
        if eventually_nonincreasing(g, N_probe):
            bound = integral_tail(g, N_probe)
            estimate = integral_tail(g, N_probe + 0.5)
            return CMNorm(partial + estimate, "member", partial, N_probe, bound, cls.reason)
        return CMNorm(partial, "member", partial, N_probe, None, cls.reason + " (tail not monotone)")
    if cls.verdict == "diverges":
        return CMNorm(math.inf, "non_member", partial, N_probe, math.inf, cls.reason)
    return CMNorm(partial, "inconclusive", partial, N_probe, None, cls.reason)


# ---------------------------------------------------------------------------
# densities


@dataclass(frozen=True)
class DensityModel:
    """Radon-Nikodym derivative of the shifted measure, truncated at ``N`` coordinates."""

    shift: CoeffSeq
    measure: ProductMeasure
    N: int = 64

    def __post_init__(self):
        _require_gaussian(self.measure)

    def coefficients(self):
        n = np.arange(1, self.N + 1)
        h = np.real(self.shift.at(n)).astype(float)
        var = self.measure.variances(n)
        return h, var

    def log_density(self, x: SampleBatch | TruncatedSample) -> np.ndarray:
        """``sum_{n<=N} h_n x_n / sigma_n^2 - h_n^2 / (2 sigma_n^2)``."""
        if x.truncation < self.N:
            raise ValueError(f"sample truncation {x.truncation} below the model's {self.N}")
        h, var = self.coefficients()
        linear = x.values[..., : self.N] @ (h / var)
        quad = float(np.sum(h**2 / (2 * var)))
        if mutations.active("cm_sign"):
            quad = -quad
        return linear - quad

    def shift_vector(self, truncation: int) -> np.ndarray:
        return np.real(self.shift.at(np.arange(1, truncation + 1))).astype(float)


def translate_density(model: DensityModel, x: SampleBatch | TruncatedSample):
    """``rho_h(x)``, exponentiated once from log space."""
    return np.exp(model.log_density(x))


@dataclass
class QIReport:
    test: str
    lhs: float
    rhs: float
    delta: float
    std_error: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.delta <= self.tol + 3 * self.std_error

    def to_dict(self):
        return {**self.__dict__, "passed": self.passed}


def quasi_invariance_check(model: DensityModel, g: Evaluator, mc: int = 100_000, seed: int = 0, tol: float = 0.0, name: str = "") -> QIReport:
    """Compare ``E[rho_h g]`` with ``E[g(x + h)]`` on common random numbers."""
    x = sample_batch(model.measure, model.N, mc, seed)
    lhs = translate_density(model, x) * np.asarray(g(x), dtype=float)
    rhs = np.asarray(g(x.shifted(model.shift_vector(model.N))), dtype=float)
    d = lhs - rhs
    return QIReport(
        name or getattr(g, "__name__", "g"),
        float(lhs.mean()),
        float(rhs.mean()),
        float(abs(d.mean())),
        float(d.std() / math.sqrt(mc)),
        tol,
    )


def standard_tests() -> dict[str, Evaluator]:
    """The test functionals ``1, x_1, x_1 x_2, 1{x_1 > 0}``."""
    return {
        "one": lambda x: np.ones(len(x)) if isinstance(x, SampleBatch) else 1.0,
        "x1": lambda x: x.col(1),
        "x1x2": lambda x: x.col(1) * x.col(2),
        "x1_pos": lambda x: (x.col(1) > 0).astype(float),
    }


# ---------------------------------------------------------------------------
# dichotomy


@dataclass
class HellingerReport:
    grid: list[int]
    products: list[float]
    limit: str  # positive | zero | undetermined
    limit_estimate: float
    n_below: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return dict(self.__dict__)


def hellinger_dichotomy(
    h: CoeffSeq, m: ProductMeasure, N_grid: Sequence[int] = (2**10, 2**14, 2**18), floor: float = 1e-3, diag_max_log2: int = 20
) -> HellingerReport:
    """Partial affinities ``H_N = prod_{n<=N} exp(-h_n^2 / (8 sigma_n^2))``.

    The limit is diagnosed from the increments of ``S_N = sum h_n^2/sigma_n^2``
    over doubling blocks (up to ``2**diag_max_log2``): geometric decay of the
    increments means ``S`` converges and ``H`` has a positive limit; increments
    that do not decay mean ``H -> 0``, and the doubling count needed to push
    ``H`` below ``floor`` is extrapolated from the last increment.
    """
    _require_gaussian(m)
    top = max(max(N_grid), 2**diag_max_log2)
    n = np.arange(1, top + 1)
    S = np.cumsum(np.abs(h.at(n)) ** 2 / m.variances(n))
    products = [float(math.exp(-S[N - 1] / 8)) for N in N_grid]
    ks = np.arange(0, diag_max_log2 + 1)
    Sk = S[2**ks - 1]
    inc = np.diff(Sk)
    last, prev = inc[-1], inc[-2]
    if last == 0.0:
        ratio = 0.0
    else:
        ratio = float(last / prev) if prev > 0 else math.inf
    diag = {"doubling_increments": inc[-4:].tolist(), "ratio": ratio}
    target = 8 * math.log(1 / floor)
    if ratio < 0.97:
        tail = last * ratio / (1 - ratio) if ratio > 0 else 0.0
        limit = math.exp(-(Sk[-1] + tail) / 8)
        return HellingerReport(list(N_grid), products, "positive", limit, None, diag)
    if ratio > 0.995:
        if Sk[-1] >= target:
            n_below = float(np.argmax(S >= target) + 1)
        else:
            doublings = math.ceil((target - Sk[-1]) / last)
            n_below = 2.0 ** (diag_max_log2 + doublings)
        return HellingerReport(list(N_grid), products, "zero", 0.0, n_below, diag)
    return HellingerReport(list(N_grid), products, "undetermined", float(math.exp(-Sk[-1] / 8)), None, diag)


# ---------------------------------------------------------------------------
# action on functionals


@dataclass
class ShiftAction:
    f_out: CoeffSeq
    constant: float
    tail_bound: float | None
    verdict: str  # exact | converges | inconclusive

    def to_dict(self):
        return {"f_out": self.f_out.label, "constant": self.constant, "tail_bound": self.tail_bound, "verdict": self.verdict}


def shift_action_on_linfun(f: CoeffSeq, h: CoeffSeq, m: ProductMeasure, N_probe: int = 10_000) -> ShiftAction:
    """Translation by ``h`` acts on ``f`` as ``f(x + h) = f(x) + f(h)``.

    The linear part is unchanged; the constant ``f(h) = sum f_n h_n`` is summed
    to ``N_probe`` with a tail bound from Cauchy-Schwarz or the integral test.
    """
    if three_series_test(f, m).verdict != "converges":
        raise ValueError(f"{f.label} is not a certified measurable functional for {m.label}")
    n = np.arange(1, N_probe + 1)
    prod = np.real(f.at(n) * h.at(n))
    partial = float(np.sum(prod))
    supports = [s for s in (f.support_max, h.support_max) if s is not None]
    if supports and min(supports) <= N_probe:
        return ShiftAction(f, partial, 0.0, "exact")
    tf, th = f.tail_sq_bound(N_probe), h.tail_sq_bound(N_probe)
    if tf is not None and th is not None:
        return ShiftAction(f, partial, math.sqrt(tf * th), "converges")
    expr = None if f.expr is None or h.expr is None else sympy.Abs(f.expr * h.expr)
    if classify(expr).verdict == "converges":
        g = lambda t: np.abs(f.rule(t) * h.rule(t))  # noqa: E731
        if eventually_nonincreasing(g, N_probe):
            return ShiftAction(f, partial, integral_tail(g, N_probe), "converges")
    return ShiftAction(f, math.nan, None, "inconclusive")


def kernel_mass_proxy(m: ProductMeasure, N_grid: Sequence[int], mc: int = 2000, seed: int = 0, bound: float | None = None):
    """Growth of ``sum_{n<=N} x_n^2 / sigma_n^2`` along samples.

    Returns the mean partial sums on the grid and the fraction of samples that
    stay below ``bound`` (default: the first grid point) at the last grid point.
    """
    _require_gaussian(m)
    S = stream_sums(m, lambda n: 1.0 / m.variances(n), N_grid, mc, seed, power=2)
    b = float(N_grid[0]) if bound is None else bound
    return {"grid": list(N_grid), "mean": S.mean(axis=0).tolist(), "fraction_bounded": float(np.mean(S[:, -1] <= b))}


__all__ = [
    "CMNorm",
    "DensityModel",
    "HellingerReport",
    "QIReport",
    "ShiftAction",
    "ShiftVector",
    "cameron_martin_norm",
    "hellinger_dichotomy",
    "kernel_mass_proxy",
    "quasi_invariance_check",
    "shift_action_on_linfun",
    "standard_tests",
    "translate_density",
]
