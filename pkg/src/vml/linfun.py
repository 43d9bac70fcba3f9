"""Measurable linear functionals given by coefficient sequences.

A functional ``f(x) = sum_n f_n x_n`` is only defined where the series
converges, and that set depends on ``f``.  Evaluation is therefore always a
partial sum at the sample's truncation; whether the series defines a
functional at all is a separate question answered by
:func:`three_series_test` and checked by brute force with
:func:`cauchy_in_measure_oracle`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
import sympy
from scipy import special

from . import kernels
from .errors import ConfigError
from .expr import Rule
from .measure import CircleMeasure, Measure, ProductMeasure, SampleBatch, TruncatedSample, sample_batch, stream_sums
from .series import classify, eventually_nonincreasing, first_index_below, integral_tail

Evaluator = Callable[[SampleBatch | TruncatedSample], np.ndarray]


class CoeffSeq:
    """A candidate functional ``n -> f_n``.

    Exactly one of ``rule`` (closed form, possibly an expression string) or
    ``finite`` (a mapping ``index -> value`` with finite support) is given.
    ``domain`` is ``"natural"`` (``n >= 1``, product measures) or
    ``"integer"`` (``n`` in Z, circle measure).  ``tail_sq_bound(N)`` bounds
    ``sum_{n>N} |f_n|^2`` and must be nonincreasing.
    """

    def __init__(
        self,
        rule: Rule | str | float | Callable | None = None,
        *,
        finite: Mapping[int, complex] | Sequence[complex] | None = None,
        domain: str = "natural",
        tail_sq_bound: Callable[[float], float] | None = None,
        label: str = "",
    ):
        if domain not in ("natural", "integer"):
            raise ConfigError(f"unknown coefficient domain {domain!r}")
        if (rule is None) == (finite is None):
            raise ConfigError("give exactly one of rule or finite")
        self.domain = domain
        self._tail_sq_bound = tail_sq_bound
        if finite is not None:
            if not isinstance(finite, Mapping):
                start = 1 if domain == "natural" else 0
                finite = {start + i: v for i, v in enumerate(finite)}
            self.finite = {int(k): complex(v) if np.iscomplexobj(v) else float(v) for k, v in finite.items() if v != 0}
            self.rule = None
        else:
            self.finite = None
            self.rule = rule if isinstance(rule, Rule) else Rule(rule)
        self.label = label or (self.rule.label if self.rule is not None else f"finite{sorted(self.finite)}")

    # constructors ------------------------------------------------------------
    @classmethod
    def zero(cls, domain="natural"):
        return cls(finite={}, domain=domain, label="0")

    @classmethod
    def basis(cls, k: int, scale: float = 1.0, domain="natural"):
        return cls(finite={k: scale}, domain=domain, label=f"{scale:g}*e_{k}")

    # evaluation ------------------------------------------------------------
    def at(self, indices) -> np.ndarray:
        idx = np.asarray(indices, dtype=np.int64)
        if self.finite is not None:
            dtype = complex if any(isinstance(v, complex) for v in self.finite.values()) else float
            out = np.array([self.finite.get(int(i), 0.0) for i in idx.ravel()], dtype=dtype).reshape(idx.shape)
        else:
            out = self.rule(idx)
        if self.domain == "natural":
            out = np.where(idx >= 1, out, 0)
        return out

    def values(self, N: int) -> np.ndarray:
        """Coefficients for ``n = 1..N`` (natural) or ``n = -N..N`` (integer)."""
        if self.domain == "natural":
            return self.at(np.arange(1, N + 1))
        return self.at(np.arange(-N, N + 1))

    @property
    def is_complex(self) -> bool:
        probe = self.at(np.arange(-3, 4) if self.domain == "integer" else np.arange(1, 8))
        return bool(np.iscomplexobj(probe) and np.any(probe.imag != 0))

    @property
    def support_max(self) -> int | None:
        """Largest |index| with a nonzero coefficient, or None for infinite support."""
        if self.finite is None:
            return None
        return max((abs(k) for k in self.finite), default=0)

    @property
    def expr(self) -> sympy.Expr | None:
        if self.finite is not None:
            return sympy.Integer(0) if not self.finite else None
        return self.rule.sympy_expr

    def tail_sq_bound(self, N: float) -> float | None:
        """Bound on ``sum_{|n|>N} |f_n|^2`` (None when no certificate is available)."""
        if self._tail_sq_bound is not None:
            return float(self._tail_sq_bound(N))
        if self.finite is not None:
            return 0.0 if N >= self.support_max else sum(abs(v) ** 2 for k, v in self.finite.items() if abs(k) > N)
        sq = self.expr
        if sq is None or classify(sq**2).verdict != "converges":
            return None
        g = lambda t: np.abs(self.rule(t)) ** 2  # noqa: E731
        if not eventually_nonincreasing(g, N):
            return None
        bound = integral_tail(g, N)
        return 2 * bound if self.domain == "integer" else bound

    # linear structure --------------------------------------------------------
    def _combine(self, other: "CoeffSeq", a: complex, b: complex) -> "CoeffSeq":
        if self.domain != other.domain:
            raise ConfigError("cannot combine coefficient sequences on different domains")
        label = f"{a:g}*({self.label}) + {b:g}*({other.label})"
        if self.finite is not None and other.finite is not None:
            keys = set(self.finite) | set(other.finite)
            return CoeffSeq(
                finite={k: a * self.finite.get(k, 0) + b * other.finite.get(k, 0) for k in keys}, domain=self.domain, label=label
            )
        ta, tb = self.tail_sq_bound, other.tail_sq_bound

        def tail(N):
            x, y = ta(N), tb(N)
            if x is None or y is None:
                return math.inf
            return (abs(a) * math.sqrt(x) + abs(b) * math.sqrt(y)) ** 2

        text = None
        if self.rule is not None and other.rule is not None and self.rule.text and other.rule.text:
            if np.isreal(a) and np.isreal(b):
                text = f"({float(np.real(a))!r})*({self.rule.text}) + ({float(np.real(b))!r})*({other.rule.text})"
        if text is not None:
            return CoeffSeq(text, domain=self.domain, label=label)
        fa, fb = self, other
        return CoeffSeq(Rule(lambda n: a * fa.at(n) + b * fb.at(n), label), domain=self.domain, tail_sq_bound=tail, label=label)

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def __neg__(self):
        return self * -1.0

    def __mul__(self, c):
        if self.finite is not None:
            return CoeffSeq(finite={k: c * v for k, v in self.finite.items()}, domain=self.domain, label=f"{c:g}*({self.label})")
        if self.rule is not None and self.rule.text and np.isreal(c):
            return CoeffSeq(f"({float(np.real(c))!r})*({self.rule.text})", domain=self.domain, label=f"{c:g}*({self.label})")
        return self._combine(CoeffSeq.zero(self.domain), c, 0.0)

    __rmul__ = __mul__

    def __repr__(self):
        return f"CoeffSeq({self.label!r}, domain={self.domain!r})"


def coeffs_from_config(cfg: dict) -> CoeffSeq:
    domain = cfg.get("domain", "natural")
    label = cfg.get("label", "")
    if "finite" in cfg:
        fin = cfg["finite"]
        if isinstance(fin, dict):
            fin = {int(k): (complex(*v) if isinstance(v, list) else v) for k, v in fin.items()}
        return CoeffSeq(finite=fin, domain=domain, label=label)
    if "rule" in cfg:
        return CoeffSeq(cfg["rule"], domain=domain, label=label)
    raise ConfigError("coefficients need 'rule' or 'finite'", "/rule")


# ---------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class Evaluation:
    value: np.ndarray | float | complex
    tail_note: dict | None


def evaluate(f: CoeffSeq, x: SampleBatch | TruncatedSample, variance_scale: float = 1.0) -> Evaluation:
    """Partial sum ``sum_{n in window} f_n x_n`` at the sample's own truncation.

    ``tail_note`` reports ``tail_sq_bound(N) * variance_scale``, the second
    moment bound of the neglected tail when ``variance_scale`` bounds the
    coordinate variances beyond the window.
    """
    coeffs = f.at(x.indices)
    data = x.values if x.convention == "real" else x.complex_values()
    value = data @ coeffs
    N = int(np.max(np.abs(x.indices))) if len(x.indices) else 0
    bound = f.tail_sq_bound(N)
    note = None if bound is None else {"N": N, "tail_sq_bound": bound, "tail_second_moment": bound * variance_scale}
    if np.ndim(value) == 0:
        value = value.item()
    return Evaluation(value, note)


def functional(f: CoeffSeq) -> Evaluator:
    """Evaluator ``x -> f(x)`` suitable for the Monte Carlo tests below."""

    def F(x):
        return evaluate(f, x).value

    F.__name__ = f"eval[{f.label}]"
    return F


def coordinate(n: int) -> Evaluator:
    def F(x):
        return x.col(n)

    F.__name__ = f"x_{n}"
    return F


# ---------------------------------------------------------------------------
# the three-series test


@dataclass
class SeriesDetail:
    name: str
    partial_sum: float
    tail_bound: float | None
    n_probe: int

    def to_dict(self):
        return {"name": self.name, "partial_sum": self.partial_sum, "tail_bound": self.tail_bound, "n_probe": self.n_probe}


@dataclass
class CauchyStat:
    N: int
    M: int
    eps: float
    prob: float
    std_error: float

    def to_dict(self):
        return {"N": self.N, "M": self.M, "eps": self.eps, "prob": self.prob, "std_error": self.std_error}


@dataclass
class ConvergenceReport:
    verdict: str  # converges | diverges | inconclusive
    series: list[SeriesDetail] = field(default_factory=list)
    cauchy: list[CauchyStat] = field(default_factory=list)
    reason: str = ""
    tail_index: float | None = None

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "reason": self.reason,
            "tail_index": self.tail_index,
            "series": [s.to_dict() for s in self.series],
            "cauchy": [c.to_dict() for c in self.cauchy],
        }


def truncated_terms(f_n: np.ndarray, measure: ProductMeasure, n: np.ndarray, c: float = 1.0, u_points: int = 2048):
    """Per-term ``P(|X_n| > c)``, ``E[X_n; |X_n| <= c]``, ``Var[X_n 1{|X_n| <= c}]`` for ``X_n = f_n xi_n``."""
    f_n = np.abs(np.asarray(f_n, dtype=float)) if measure.symmetric else np.asarray(f_n, dtype=float)
    if measure.kind == "gaussian":
        s = f_n * measure.scales(n)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            z = np.where(s > 0, c / s, np.inf)
            p = np.where(s > 0, 2.0 * special.ndtr(-z), 0.0)
            edge = np.where(z < 40.0, z * np.exp(-0.5 * np.minimum(z, 40.0) ** 2), 0.0)
            second = np.where(s > 0, s**2 * ((1.0 - p) - 2.0 * edge / math.sqrt(2 * math.pi)), 0.0)
        return p, np.zeros_like(p), second
    if measure.kind == "rademacher":
        p = (f_n > c).astype(float)
        return p, np.zeros_like(p), np.where(f_n <= c, f_n**2, 0.0)
    if measure.kind == "uniform":
        a = f_n * measure.scales(n)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            p = np.where(a > c, 1.0 - c / a, 0.0)
            second = np.where(a > 0, np.minimum(a, c) ** 3 / (3.0 * a), 0.0)
        return p, np.zeros_like(p), second
    # custom: integrate over the quantile
    u = (np.arange(u_points) + 0.5) / u_points
    q = np.asarray(measure.quantile(u), dtype=float)
    x = (f_n * measure.scales(n))[:, None] * q[None, :]
    inside = np.abs(x) <= c
    p = 1.0 - inside.mean(axis=1)
    m1 = np.where(inside, x, 0.0).mean(axis=1)
    m2 = np.where(inside, x**2, 0.0).mean(axis=1)
    return p, m1, m2 - m1**2


def three_series_test(
    f: CoeffSeq, m: ProductMeasure, trunc_level: float = 1.0, N_probe: int = 10_000, tol: float = 1e-2
) -> ConvergenceReport:
    """Kolmogorov's three series for ``X_n = f_n xi_n`` under the product measure ``m``.

    Partial sums are computed up to ``N_probe``.  Tails are certified through
    ``g(n) = f_n^2 Var(xi_n)``: Chebyshev bounds the probability series by
    ``sum g / c^2`` and the truncated variances by ``sum g``.  Convergence is
    declared once the certified tails drop below ``tol`` (possibly far beyond
    ``N_probe``); divergence only when ``sum g`` is shown divergent and the
    coordinate law makes that equivalent to divergence of one of the series.
    """
    if not isinstance(m, ProductMeasure):
        raise ConfigError("three_series_test needs a product measure")
    c = float(trunc_level)
    n = np.arange(1, N_probe + 1)
    fn = f.at(n)
    if np.iscomplexobj(fn):
        raise ConfigError("three_series_test needs real coefficients")
    p, m1, var = truncated_terms(fn, m, n, c)
    sums = [float(p.sum()), float(m1.sum()), float(var.sum())]
    names = ["prob_exceed", "truncated_mean", "truncated_variance"]

    def report(verdict, reason, tails=(None, None, None), tail_index=None):
        series = [SeriesDetail(nm, s, t, N_probe) for nm, s, t in zip(names, sums, tails)]
        return ConvergenceReport(verdict, series, [], reason, tail_index)

    if f.support_max is not None:
        if f.support_max <= N_probe:
            return report("converges", "finite support", (0.0, 0.0, 0.0), float(f.support_max))

    if m.kind == "custom" and not math.isfinite(m.base_variance):
        return report("inconclusive", "custom law without finite variance: truncated moments have no tail certificate")

    var_expr = m.variance_expr
    g_expr = None if f.expr is None or var_expr is None else sympy.simplify(f.expr**2 * var_expr)
    cls = classify(g_expr)

    g_tail: Callable[[float], float] | None = None
    if cls.verdict == "converges":
        g_num = lambda t: fn_sq_var(f, m, t)  # noqa: E731
        if g_expr == 0:
            g_tail = lambda N: 0.0  # noqa: E731
        else:
            g_tail = lambda N: integral_tail(g_num, N) if eventually_nonincreasing(g_num, N) else math.inf  # noqa: E731
    elif cls.verdict == "unknown" and var_expr is not None and var_expr.is_number:
        sq = f.tail_sq_bound
        if f._tail_sq_bound is not None:
            g_tail = lambda N: float(var_expr) * sq(N)  # noqa: E731

    mean_tail: Callable[[float], float] = lambda N: 0.0  # noqa: E731
    if not m.symmetric and m.base_mean != 0:
        mean_expr = None if f.expr is None else sympy.Abs(f.expr * m.scale_rule.sympy_expr * sympy.nsimplify(m.base_mean))
        if classify(mean_expr).verdict != "converges":
            return report("inconclusive", "mean series of the custom law not certified")

        def mean_tail(N):
            h = lambda t: np.abs(f.rule(t) * m.scale_rule(t)) * abs(m.base_mean)  # noqa: E731
            return integral_tail(h, N)

    if g_tail is not None:
        factor = max(1.0, 1.0 / c**2, 1.0 / c)

        def total_tail(N):
            return factor * g_tail(N) + mean_tail(N)

        N_star = first_index_below(total_tail, tol)
        if N_star is None:
            return report("inconclusive", f"{cls.reason}; tail bound never below tol")
        gt = g_tail(N_probe)
        tails = (gt / c**2, mean_tail(N_probe) + gt / c, gt)
        return report("converges", f"sum f_n^2 Var(xi_n) converges: {cls.reason}", tails, N_star)

    if cls.verdict == "diverges":
        if m.kind in ("gaussian", "rademacher", "uniform"):
            return report(
                "diverges",
                f"sum f_n^2 Var(xi_n) diverges ({cls.reason}); for this law that forces the "
                "probability or truncated-variance series to diverge",
                (math.inf, None, math.inf),
            )
        return report("inconclusive", "variance series diverges but the custom law gives no lower bound")
    return report("inconclusive", cls.reason or "no tail certificate")


def fn_sq_var(f: CoeffSeq, m: ProductMeasure, t) -> np.ndarray:
    """``f(t)^2 Var(xi_t)`` for real ``t`` (used by the integral test)."""
    t = np.asarray(t, dtype=float)
    return np.abs(f.rule(t)) ** 2 * m.variances(t)


# ---------------------------------------------------------------------------
# brute-force oracle


def _partial_sums(f: CoeffSeq, m: Measure, grid: Sequence[int], mc: int, seed: int) -> np.ndarray:
    if isinstance(m, CircleMeasure):
        batch = sample_batch(m, max(grid), mc, seed)
        z = batch.complex_values()
        out = []
        for N in grid:
            sel = np.abs(batch.indices) <= N
            out.append(z[:, sel] @ f.at(batch.indices[sel]))
        return np.stack(out, axis=1)
    if f.support_max is not None and f.support_max == 0:
        return np.zeros((mc, len(grid)))
    return stream_sums(m, lambda n: np.real(f.at(n)), grid, mc, seed)


def cauchy_in_measure_oracle(
    f: CoeffSeq, m: Measure, eps: float, N_grid: Sequence[int], mc: int = 10_000, seed: int = 0
) -> list[CauchyStat]:
    """Monte Carlo ``P(|S_M - S_N| > eps)`` for consecutive grid points, with binomial errors.

    Partial sums at all grid points come from the same truncation-coherent
    samples, so each estimate looks at the same random points.
    """
    grid = [int(N) for N in N_grid]
    if len(grid) < 2 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("N_grid needs at least two increasing entries")
    S = _partial_sums(f, m, grid, mc, seed)
    stats = []
    for j in range(len(grid) - 1):
        hit = np.abs(S[:, j + 1] - S[:, j]) > eps
        p = float(hit.mean())
        stats.append(CauchyStat(grid[j], grid[j + 1], float(eps), p, math.sqrt(p * (1 - p) / mc)))
    return stats


# ---------------------------------------------------------------------------
# almost linearity and distance in measure


@dataclass
class LinearityReport:
    trials: int
    max_violation: float
    mean_violation: float
    max_scaled_violation: float
    fraction_exceeding: float
    tol: float

    def to_dict(self):
        return dict(self.__dict__)


def _aux_uniforms(seed: int, label: int, count: int, width: int) -> np.ndarray:
    key = kernels.derive_key(seed, kernels.DOMAIN_AUX, label)
    return kernels.counter_uniforms(key, np.arange(width), np.arange(count))


def almost_linearity_test(
    F: Evaluator,
    m: Measure,
    trials: int = 1000,
    truncation: int = 64,
    lambda_law: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]] | None = None,
    tol: float = 1e-9,
    seed: int = 0,
) -> LinearityReport:
    """Violation ``|F(l1 x + l2 y) - l1 F(x) - l2 F(y)|`` over independent ``x, y`` and coefficients.

    ``lambda_law`` maps a ``(trials, 2)`` array of uniforms to the pair
    ``(l1, l2)``; the default is uniform on ``[-2, 2]^2``.  The scaled
    violation divides by ``1 + |l1 F(x)| + |l2 F(y)|``.
    """
    x = sample_batch(m, truncation, trials, seed, 0)
    y = sample_batch(m, truncation, trials, seed, trials)
    u = _aux_uniforms(seed, 11, trials, 2)
    l1, l2 = lambda_law(u) if lambda_law is not None else (4 * u[:, 0] - 2, 4 * u[:, 1] - 2)
    fx, fy = np.asarray(F(x)), np.asarray(F(y))
    fz = np.asarray(F(x.combine(l1, y, l2)))
    v = np.abs(fz - l1 * fx - l2 * fy)
    scaled = v / (1.0 + np.abs(l1 * fx) + np.abs(l2 * fy))
    return LinearityReport(trials, float(v.max()), float(v.mean()), float(scaled.max()), float(np.mean(scaled > tol)), tol)


def in_measure_distance(F: Evaluator, G: Evaluator, m: Measure, mc: int = 10_000, seed: int = 0, truncation: int = 64):
    """``E[min(1, |F - G|)]`` with its standard error; metrizes convergence in measure."""
    x = sample_batch(m, truncation, mc, seed)
    d = np.minimum(1.0, np.abs(np.asarray(F(x)) - np.asarray(G(x))))
    return float(d.mean()), float(d.std() / math.sqrt(mc))


__all__ = [
    "CauchyStat",
    "CoeffSeq",
    "ConvergenceReport",
    "Evaluation",
    "LinearityReport",
    "SeriesDetail",
    "almost_linearity_test",
    "cauchy_in_measure_oracle",
    "coeffs_from_config",
    "coordinate",
    "evaluate",
    "functional",
    "in_measure_distance",
    "three_series_test",
    "truncated_terms",
]
